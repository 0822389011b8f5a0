#pragma once

#include <string>
#include <vector>

#include "tablegraph/docmodel.hpp"

namespace tablegraph {

/// A run of text lines forming one table cell within a column.
struct Cell {
    int column = 0;
    std::vector<std::string> lines;  // line ids, top to bottom
    double top_y = 0;                // minimum top over member lines

    bool operator==(const Cell&) const = default;
};

/// A horizontal ordinate separating two rows.
struct RowCut {
    double y = 0;
    int support = 0;  // distinct columns contributing a cell top to the cluster

    bool operator==(const RowCut&) const = default;
};

struct TableStructure {
    std::vector<Cell> cells;
    std::vector<RowCut> cuts;            // strictly ascending y
    std::vector<std::vector<int>> rows;  // row index -> indices into cells

    bool operator==(const TableStructure&) const = default;
};

/// One column's lines (already sorted by top y, ties by x) with their tags.
struct TaggedLine {
    std::string id;
    double top_y = 0;
    BiesoLabel label = BiesoLabel::O;
};

/// Splits one column into cells. S opens and closes, B opens, E closes,
/// I continues, O is skipped. Inconsistent sequences are repaired:
///   R1: I or E with no open cell acts as B or S.
///   R2: B or S while a cell is open first closes the open cell.
///   R3: a cell still open at the end of the column is closed.
/// Total: every input sequence yields a valid partition of the non-O lines.
std::vector<Cell> segment_column(int column, const std::vector<TaggedLine>& lines);

/// Single-linkage agglomerative clustering of cell top ordinates: sort the
/// cells by top_y and cut at consecutive gaps > stop. Returns groups of
/// indices into `cells`.
std::vector<std::vector<int>> cluster_ycuts(const std::vector<Cell>& cells, double stop);

/// Keeps clusters whose distinct-column support exceeds fraction * num_columns
/// (strict) and turns each into a cut at the cluster's minimum top ordinate.
std::vector<RowCut> select_cuts(const std::vector<Cell>& cells,
                                const std::vector<std::vector<int>>& clusters, int num_columns,
                                double fraction = 0.33);

/// Assigns every cell to the band of consecutive cuts containing its top_y.
/// Cells above the first cut join row 0; with no cuts all cells share one row.
TableStructure build_rows(std::vector<Cell> cells, std::vector<RowCut> cuts);

/// Full pipeline: segment each column, cluster tops with stop = median line
/// height of the page, select cuts, build rows.
/// use_predicted selects line.predicted (default) over line.label.
TableStructure decode(const Page& page, bool use_predicted = true);

/// Median height over all lines of the page (the clustering stop criterion).
double median_line_height(const Page& page);

/// Line-id sets per row, for the row-level metrics.
std::vector<std::vector<std::string>> row_line_ids(const TableStructure& s);

std::string structure_to_json(const TableStructure& s);
TableStructure structure_from_json(const std::string& text);
void save_structure(const TableStructure& s, const std::string& path);
TableStructure load_structure(const std::string& path);

}  // namespace tablegraph
