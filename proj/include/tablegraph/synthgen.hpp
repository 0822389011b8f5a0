#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tablegraph/docmodel.hpp"
#include "tablegraph/rowdecode.hpp"

namespace tablegraph {

/// Parameters of the synthetic register-page generator. All distances are in
/// the page's coordinate units.
struct SynthConfig {
    double page_width = 1000;
    double page_height = 1400;

    int columns_min = 5, columns_max = 9;
    int rows_min = 8, rows_max = 20;

    // probability that a cell has 1, 2, 3 or 4 lines
    std::array<double, 4> lines_per_cell = {0.45, 0.25, 0.2, 0.1};

    double line_height_min = 20, line_height_max = 26;
    double line_gap_min = 4, line_gap_max = 7;    // between lines of one cell
    double row_gap_min = 26, row_gap_max = 40;    // between row bands

    // per-page zoom applied to heights, gaps and jitter (writing-size
    // variability across pages; absolute gap thresholds do not transfer)
    double scale_min = 1.0, scale_max = 1.0;

    double jitter_x = 0;  // horizontal placement noise
    double jitter_y = 0;  // vertical cell-top noise, uniform in [-j, j]

    bool center_lines = false;  // center lines in the column instead of left-aligning
    double empty_cell_prob = 0;
    double long_cell_prob = 0;  // chance a cell gets extra-wide lines
    int outside_lines_max = 0;  // marginalia line count, uniform in [0, max]
};

/// Aligned rows, no jitter, no empty cells: decode(gold) is exact.
SynthConfig easy_preset();
/// Writer-like variability: jittered centered lines, empty cells, marginalia.
SynthConfig writers_preset();

struct SynthPage {
    Page page;             // lines carry gold labels
    TableStructure gold;   // cells and rows recorded during construction
};

/// Generates one page. The gold structure comes from the construction, not
/// from the decoder. Throws when rows_min minimum-height rows cannot fit the
/// table region.
SynthPage generate_page(const SynthConfig& config, std::uint64_t seed,
                        const std::string& id = "");

struct SynthDataset {
    Dataset dataset;
    std::vector<TableStructure> golds;  // parallel to dataset.pages
};

/// n_pages pages from per-page seeds split off the master seed, with 4-fold
/// assignment i mod 4.
SynthDataset generate_dataset(const SynthConfig& config, int n_pages, std::uint64_t seed);

}  // namespace tablegraph
