#include "tablegraph/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "tablegraph/rng.hpp"

namespace tablegraph {

SynthConfig easy_preset() {
    SynthConfig config;
    config.columns_min = 5;
    config.columns_max = 9;
    config.rows_min = 8;
    config.rows_max = 16;
    config.jitter_x = 0;
    config.jitter_y = 0;
    config.center_lines = false;
    config.empty_cell_prob = 0;
    config.long_cell_prob = 0;
    config.outside_lines_max = 2;
    return config;
}

SynthConfig writers_preset() {
    SynthConfig config;
    config.columns_min = 5;
    config.columns_max = 9;
    config.rows_min = 8;
    config.rows_max = 16;
    config.line_gap_min = 4;
    config.line_gap_max = 9;
    config.row_gap_min = 22;
    config.row_gap_max = 40;
    config.scale_min = 0.6;
    config.scale_max = 2.2;
    config.jitter_x = 6;
    config.jitter_y = 6;
    config.center_lines = true;
    config.empty_cell_prob = 0.12;
    config.long_cell_prob = 0.1;
    config.outside_lines_max = 3;
    return config;
}

namespace {

void validate_config(const SynthConfig& c) {
    if (c.page_width <= 0 || c.page_height <= 0)
        throw ValidationError("synth: page dimensions must be positive");
    if (c.columns_min < 1 || c.columns_max < c.columns_min)
        throw ValidationError("synth: empty column range");
    if (c.rows_min < 1 || c.rows_max < c.rows_min)
        throw ValidationError("synth: empty row range");
    if (c.line_height_min <= 0 || c.line_height_max < c.line_height_min)
        throw ValidationError("synth: bad line height range");
    if (c.scale_min <= 0 || c.scale_max < c.scale_min)
        throw ValidationError("synth: bad scale range");
    double sum = 0;
    for (double w : c.lines_per_cell) {
        if (w < 0) throw ValidationError("synth: negative lines-per-cell weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("synth: lines-per-cell weights must sum to 1");
    for (double p : {c.empty_cell_prob, c.long_cell_prob})
        if (p < 0 || p > 1) throw ValidationError("synth: probability out of [0,1]");
}

std::string line_id(int counter) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "l%04d", counter);
    return std::string(buf);
}

}  // namespace

SynthPage generate_page(const SynthConfig& config, std::uint64_t seed, const std::string& id) {
    validate_config(config);
    Rng rng(seed);

    SynthPage out;
    Page& page = out.page;
    page.id = id.empty() ? "synth-" + std::to_string(seed) : id;
    page.width = config.page_width;
    page.height = config.page_height;

    const int ncols = rng.int_in(config.columns_min, config.columns_max);
    const int nrows = rng.int_in(config.rows_min, config.rows_max);
    const double scale = rng.uniform(config.scale_min, config.scale_max);
    const double line_h = scale * rng.uniform(config.line_height_min, config.line_height_max);

    const double margin_left = rng.uniform(40, 80);
    const double margin_right = rng.uniform(40, 80);
    const double margin_top = rng.uniform(100, 160);
    const double margin_bottom = rng.uniform(60, 120);
    page.table_region = BoundingBox{margin_left, margin_top,
                                    page.width - margin_left - margin_right,
                                    page.height - margin_top - margin_bottom};
    const BoundingBox& region = page.table_region;

    if (config.rows_min * line_h + (config.rows_min - 1) * scale * config.row_gap_min > region.h)
        throw Error("synth: infeasible geometry, " + std::to_string(config.rows_min) +
                    " minimum-height rows exceed the table region");

    std::vector<double> col_weights(ncols);
    double weight_sum = 0;
    for (double& w : col_weights) {
        w = rng.uniform(0.65, 1.35);
        weight_sum += w;
    }
    double x = region.left();
    for (int c = 0; c < ncols; ++c) {
        const double w = region.w * col_weights[c] / weight_sum;
        page.columns.push_back(Column{c, BoundingBox{x, region.top(), w, region.h}});
        x += w;
    }

    int line_counter = 0;
    struct BuiltCell {
        Cell cell;
        int row = 0;
    };
    std::vector<BuiltCell> built;

    double y = region.top();
    for (int r = 0; r < nrows; ++r) {
        // row structure: line count per column (0 = empty slot)
        std::vector<int> counts(ncols, 0);
        bool any = false;
        for (int c = 0; c < ncols; ++c) {
            if (config.empty_cell_prob > 0 && rng.bernoulli(config.empty_cell_prob)) continue;
            counts[c] = 1 + static_cast<int>(rng.categorical(
                                std::vector<double>(config.lines_per_cell.begin(),
                                                    config.lines_per_cell.end())));
            any = true;
        }
        if (!any) counts[static_cast<int>(rng.below(ncols))] = 1;

        std::vector<double> cell_gap(ncols, 0);
        double row_height = 0;
        for (int c = 0; c < ncols; ++c) {
            if (counts[c] == 0) continue;
            cell_gap[c] = scale * rng.uniform(config.line_gap_min, config.line_gap_max);
            row_height = std::max(row_height,
                                  counts[c] * line_h + (counts[c] - 1) * cell_gap[c]);
        }
        if (y + row_height > region.bottom()) break;  // page full; later rows are dropped

        for (int c = 0; c < ncols; ++c) {
            if (counts[c] == 0) continue;
            const Column& col = page.columns[c];
            const int k = counts[c];
            double cell_top = y;
            if (config.jitter_y > 0)
                cell_top += scale * rng.uniform(-config.jitter_y, config.jitter_y);
            cell_top = std::max(cell_top, 2.0);

            const bool wide = config.long_cell_prob > 0 && rng.bernoulli(config.long_cell_prob);
            Cell cell;
            cell.column = c;
            cell.top_y = cell_top;
            for (int l = 0; l < k; ++l) {
                const double frac = wide ? rng.uniform(0.85, 0.95) : rng.uniform(0.5, 0.8);
                double width = std::min(frac * col.box.w, col.box.w - 4.0);
                double left;
                if (config.center_lines) {
                    left = col.box.left() + 0.5 * (col.box.w - width);
                    if (config.jitter_x > 0)
                        left += scale * rng.uniform(-config.jitter_x, config.jitter_x);
                } else {
                    left = col.box.left() + 3.0;
                    if (config.jitter_x > 0) left += scale * rng.uniform(0, config.jitter_x);
                }
                left = std::clamp(left, col.box.left() + 1.0, col.box.right() - width - 1.0);

                TextLine line;
                line.id = line_id(line_counter++);
                line.box = BoundingBox{left, cell_top + l * (line_h + cell_gap[c]), width, line_h};
                line.column = c;
                if (k == 1)
                    line.label = BiesoLabel::S;
                else if (l == 0)
                    line.label = BiesoLabel::B;
                else if (l == k - 1)
                    line.label = BiesoLabel::E;
                else
                    line.label = BiesoLabel::I;
                cell.lines.push_back(line.id);
                page.lines.push_back(std::move(line));
            }
            built.push_back(BuiltCell{std::move(cell), r});
        }
        y += row_height + scale * rng.uniform(config.row_gap_min, config.row_gap_max);
    }

    // marginalia outside the table region, labeled O
    const int n_out = config.outside_lines_max > 0 ? rng.int_in(0, config.outside_lines_max) : 0;
    for (int i = 0; i < n_out; ++i) {
        const bool above = rng.bernoulli(0.5);
        const double zone_top = above ? 4.0 : region.bottom() + 4.0;
        const double zone_bottom = above ? region.top() - 4.0 : page.height - 4.0;
        if (zone_bottom - zone_top < line_h + 2) continue;
        TextLine line;
        line.id = line_id(line_counter++);
        const double width = rng.uniform(120, 380);
        const double left = rng.uniform(region.left(), region.left() + 0.5 * region.w - 1);
        const double top = rng.uniform(zone_top, zone_bottom - line_h);
        line.box = BoundingBox{std::min(left, page.width - width - 2), top, width, line_h};
        line.label = BiesoLabel::O;
        page.lines.push_back(std::move(line));
    }

    // gold structure: cells in decode order (column, then top), rows by
    // construction, cut at each row's minimum cell top
    std::vector<int> cell_order(built.size());
    for (std::size_t i = 0; i < built.size(); ++i) cell_order[i] = static_cast<int>(i);
    std::sort(cell_order.begin(), cell_order.end(), [&](int a, int b) {
        if (built[a].cell.column != built[b].cell.column)
            return built[a].cell.column < built[b].cell.column;
        return built[a].cell.top_y < built[b].cell.top_y;
    });

    std::vector<int> row_of;
    for (int idx : cell_order) {
        out.gold.cells.push_back(built[idx].cell);
        row_of.push_back(built[idx].row);
    }
    const int max_row = built.empty() ? -1 : *std::max_element(row_of.begin(), row_of.end());
    std::vector<std::vector<int>> rows_tmp(max_row + 1);
    for (std::size_t i = 0; i < row_of.size(); ++i) rows_tmp[row_of[i]].push_back(static_cast<int>(i));
    for (const std::vector<int>& row : rows_tmp) {
        if (row.empty()) continue;  // fully empty constructed rows hold no gold row
        double cut = out.gold.cells[row.front()].top_y;
        std::vector<int> columns;
        for (int ci : row) {
            cut = std::min(cut, out.gold.cells[ci].top_y);
            columns.push_back(out.gold.cells[ci].column);
        }
        std::sort(columns.begin(), columns.end());
        columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
        out.gold.cuts.push_back(RowCut{cut, static_cast<int>(columns.size())});
        out.gold.rows.push_back(row);
    }
    return out;
}

SynthDataset generate_dataset(const SynthConfig& config, int n_pages, std::uint64_t seed) {
    if (n_pages < 1) throw ValidationError("synth: n_pages must be >= 1");
    SynthDataset out;
    for (int i = 0; i < n_pages; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "p%04d", i);
        SynthPage sp = generate_page(config, derive_seed(seed, static_cast<std::uint64_t>(i)),
                                     name);
        out.dataset.folds[sp.page.id] = i % 4;
        out.dataset.pages.push_back(std::move(sp.page));
        out.golds.push_back(std::move(sp.gold));
    }
    return out;
}

}  // namespace tablegraph
