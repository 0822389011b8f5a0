#include "tablegraph/rowdecode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace tablegraph {

std::vector<Cell> segment_column(int column, const std::vector<TaggedLine>& lines) {
    std::vector<Cell> cells;
    Cell open;
    bool has_open = false;

    auto open_cell = [&](const TaggedLine& line) {
        open = Cell{column, {line.id}, line.top_y};
        has_open = true;
    };
    auto close_cell = [&]() {
        cells.push_back(std::move(open));
        has_open = false;
    };

    for (const TaggedLine& line : lines) {
        switch (line.label) {
            case BiesoLabel::O:
                break;
            case BiesoLabel::B:
                if (has_open) close_cell();  // R2
                open_cell(line);
                break;
            case BiesoLabel::S:
                if (has_open) close_cell();  // R2
                open_cell(line);
                close_cell();
                break;
            case BiesoLabel::I:
                if (!has_open) {
                    open_cell(line);  // R1: leading I acts as B
                } else {
                    open.lines.push_back(line.id);
                    open.top_y = std::min(open.top_y, line.top_y);
                }
                break;
            case BiesoLabel::E:
                if (!has_open) {
                    open_cell(line);  // R1: stray E acts as S
                } else {
                    open.lines.push_back(line.id);
                    open.top_y = std::min(open.top_y, line.top_y);
                }
                close_cell();
                break;
        }
    }
    if (has_open) close_cell();  // R3
    return cells;
}

std::vector<std::vector<int>> cluster_ycuts(const std::vector<Cell>& cells, double stop) {
    std::vector<int> order(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (cells[a].top_y != cells[b].top_y) return cells[a].top_y < cells[b].top_y;
        return a < b;
    });

    std::vector<std::vector<int>> clusters;
    for (int idx : order) {
        if (clusters.empty() || cells[idx].top_y - cells[clusters.back().back()].top_y > stop)
            clusters.emplace_back();
        clusters.back().push_back(idx);
    }
    return clusters;
}

std::vector<RowCut> select_cuts(const std::vector<Cell>& cells,
                                const std::vector<std::vector<int>>& clusters, int num_columns,
                                double fraction) {
    std::vector<RowCut> cuts;
    for (const std::vector<int>& cluster : clusters) {
        std::vector<int> columns;
        double y = cells[cluster.front()].top_y;
        for (int idx : cluster) {
            columns.push_back(cells[idx].column);
            y = std::min(y, cells[idx].top_y);
        }
        std::sort(columns.begin(), columns.end());
        columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
        const int support = static_cast<int>(columns.size());
        if (support > fraction * num_columns) cuts.push_back(RowCut{y, support});
    }
    std::sort(cuts.begin(), cuts.end(), [](const RowCut& a, const RowCut& b) { return a.y < b.y; });
    return cuts;
}

TableStructure build_rows(std::vector<Cell> cells, std::vector<RowCut> cuts) {
    TableStructure s;
    s.cells = std::move(cells);
    s.cuts = std::move(cuts);
    if (s.cells.empty()) return s;

    const int num_rows = s.cuts.empty() ? 1 : static_cast<int>(s.cuts.size());
    s.rows.assign(num_rows, {});
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
        int row = 0;
        // last cut with y <= top_y; cells above the first cut stay in row 0
        for (std::size_t k = 1; k < s.cuts.size(); ++k) {
            if (s.cuts[k].y <= s.cells[i].top_y) row = static_cast<int>(k);
        }
        s.rows[row].push_back(static_cast<int>(i));
    }
    return s;
}

double median_line_height(const Page& page) {
    std::vector<double> heights;
    heights.reserve(page.lines.size());
    for (const TextLine& line : page.lines) heights.push_back(line.box.h);
    std::sort(heights.begin(), heights.end());
    const std::size_t n = heights.size();
    if (n == 0) return 0;
    return n % 2 == 1 ? heights[n / 2] : 0.5 * (heights[n / 2 - 1] + heights[n / 2]);
}

TableStructure decode(const Page& page, bool use_predicted) {
    if (page.columns.empty()) throw ValidationError("decode: page '" + page.id + "' has no columns");

    const int num_columns = static_cast<int>(page.columns.size());
    std::vector<std::vector<TaggedLine>> per_column(num_columns);
    for (const TextLine& line : page.lines) {
        const std::optional<BiesoLabel>& label = use_predicted ? line.predicted : line.label;
        if (!label)
            throw ValidationError("decode: line '" + line.id + "' of page '" + page.id +
                                  "' has no " + (use_predicted ? "predicted" : "gold") + " label");
        if (*label == BiesoLabel::O) continue;
        // non-O lines without a column carry no cell; treat them like O
        if (!line.column) continue;
        per_column[*line.column].push_back(TaggedLine{line.id, line.box.top(), *label});
    }

    std::vector<Cell> cells;
    for (int c = 0; c < num_columns; ++c) {
        std::sort(per_column[c].begin(), per_column[c].end(),
                  [](const TaggedLine& a, const TaggedLine& b) {
                      if (a.top_y != b.top_y) return a.top_y < b.top_y;
                      return a.id < b.id;
                  });
        std::vector<Cell> col_cells = segment_column(c, per_column[c]);
        cells.insert(cells.end(), col_cells.begin(), col_cells.end());
    }
    if (cells.empty()) return TableStructure{};

    const double stop = median_line_height(page);
    std::vector<std::vector<int>> clusters = cluster_ycuts(cells, stop);
    std::vector<RowCut> cuts = select_cuts(cells, clusters, num_columns);
    return build_rows(std::move(cells), std::move(cuts));
}

std::vector<std::vector<std::string>> row_line_ids(const TableStructure& s) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(s.rows.size());
    for (const std::vector<int>& row : s.rows) {
        std::vector<std::string> ids;
        for (int ci : row)
            for (const std::string& id : s.cells[ci].lines) ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        rows.push_back(std::move(ids));
    }
    return rows;
}

std::string structure_to_json(const TableStructure& s) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["cells"] = nlohmann::ordered_json::array();
    for (const Cell& cell : s.cells) {
        nlohmann::ordered_json cj;
        cj["column"] = cell.column;
        cj["lines"] = cell.lines;
        cj["top_y"] = cell.top_y;
        j["cells"].push_back(std::move(cj));
    }
    j["cuts"] = nlohmann::ordered_json::array();
    for (const RowCut& cut : s.cuts)
        j["cuts"].push_back(nlohmann::ordered_json{{"y", cut.y}, {"support", cut.support}});
    j["rows"] = s.rows;
    return j.dump(2) + "\n";
}

TableStructure structure_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("table structure JSON parse error: ") + e.what());
    }
    TableStructure s;
    try {
        for (const auto& cj : j.at("cells")) {
            Cell cell;
            cell.column = cj.at("column").get<int>();
            cell.lines = cj.at("lines").get<std::vector<std::string>>();
            cell.top_y = cj.at("top_y").get<double>();
            s.cells.push_back(std::move(cell));
        }
        for (const auto& cj : j.at("cuts"))
            s.cuts.push_back(RowCut{cj.at("y").get<double>(), cj.at("support").get<int>()});
        s.rows = j.at("rows").get<std::vector<std::vector<int>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("table structure JSON: ") + e.what());
    }
    for (const std::vector<int>& row : s.rows)
        for (int ci : row)
            if (ci < 0 || ci >= static_cast<int>(s.cells.size()))
                throw ValidationError("table structure JSON: row references missing cell " +
                                      std::to_string(ci));
    return s;
}

void save_structure(const TableStructure& s, const std::string& path) {
    atomic_write(path, structure_to_json(s));
}

TableStructure load_structure(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open table structure file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return structure_from_json(text);
}

}  // namespace tablegraph
