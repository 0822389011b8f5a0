#include "tablegraph/docmodel.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace tablegraph {

namespace {

constexpr int kFormatVersion = 1;

void warn_unknown_fields(const ordered_json& obj, const std::set<std::string>& known,
                         const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            std::cerr << "warning: ignoring unknown field '" << it.key() << "' in " << context
                      << "\n";
        }
    }
}

double require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw ValidationError(what + " is not a finite number");
    return v;
}

BoundingBox parse_box(const ordered_json& obj, const std::string& context) {
    BoundingBox b;
    b.x = require_finite(obj.at("x").get<double>(), context + ".x");
    b.y = require_finite(obj.at("y").get<double>(), context + ".y");
    b.w = require_finite(obj.at("w").get<double>(), context + ".w");
    b.h = require_finite(obj.at("h").get<double>(), context + ".h");
    return b;
}

ordered_json box_json(const BoundingBox& b) {
    return ordered_json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

void validate_page(const Page& page) {
    if (!(page.width > 0) || !(page.height > 0))
        throw ValidationError("page '" + page.id + "': width and height must be > 0");
    if (!(page.table_region.w > 0) || !(page.table_region.h > 0))
        throw ValidationError("page '" + page.id + "': table_region must have positive size");

    for (std::size_t i = 0; i < page.columns.size(); ++i) {
        const Column& c = page.columns[i];
        if (c.index != static_cast<int>(i))
            throw ValidationError("page '" + page.id +
                                  "': column indices must be contiguous from 0");
        if (!(c.box.w > 0) || !(c.box.h > 0))
            throw ValidationError("page '" + page.id + "': column " + std::to_string(c.index) +
                                  " must have positive size");
        if (i > 0 && !(page.columns[i - 1].box.x < c.box.x))
            throw ValidationError("page '" + page.id +
                                  "': column boxes must be ordered by increasing x");
    }

    std::set<std::string> seen;
    for (const TextLine& line : page.lines) {
        if (line.id.empty())
            throw ValidationError("page '" + page.id + "': line with empty id");
        if (!seen.insert(line.id).second)
            throw ValidationError("page '" + page.id + "': duplicate line id '" + line.id + "'");
        if (!(line.box.w > 0) || !(line.box.h > 0))
            throw ValidationError("page '" + page.id + "': line '" + line.id +
                                  "' must have w > 0 and h > 0");
        if (line.box.left() < 0 || line.box.top() < 0 || line.box.right() > page.width ||
            line.box.bottom() > page.height)
            throw ValidationError("page '" + page.id + "': line '" + line.id +
                                  "' lies outside the page bounds");
        if (line.column && (*line.column < 0 ||
                            *line.column >= static_cast<int>(page.columns.size())))
            throw ValidationError("page '" + page.id + "': line '" + line.id +
                                  "' references column " + std::to_string(*line.column) +
                                  " but the page has " + std::to_string(page.columns.size()) +
                                  " columns");
    }
}

Page page_from_json(const ordered_json& doc) {
    if (!doc.is_object()) throw ValidationError("page document must be a JSON object");
    if (doc.value("format_version", kFormatVersion) != kFormatVersion)
        throw ValidationError("unsupported page format_version");

    warn_unknown_fields(doc,
                        {"format_version", "id", "width", "height", "table_region", "columns",
                         "lines"},
                        "page");

    Page page;
    page.id = doc.at("id").get<std::string>();
    page.width = doc.at("width").get<double>();
    page.height = doc.at("height").get<double>();
    page.table_region = parse_box(doc.at("table_region"), "table_region");

    for (const auto& cj : doc.value("columns", ordered_json::array())) {
        warn_unknown_fields(cj, {"index", "x", "y", "w", "h"}, "column");
        Column col;
        col.index = cj.at("index").get<int>();
        col.box = parse_box(cj, "column");
        page.columns.push_back(col);
    }

    for (const auto& lj : doc.value("lines", ordered_json::array())) {
        warn_unknown_fields(lj, {"id", "x", "y", "w", "h", "column", "label", "predicted"},
                            "line");
        TextLine line;
        line.id = lj.at("id").get<std::string>();
        line.box = parse_box(lj, "line '" + line.id + "'");
        if (lj.contains("column") && !lj.at("column").is_null())
            line.column = lj.at("column").get<int>();
        auto read_label = [&](const char* key) -> std::optional<BiesoLabel> {
            if (!lj.contains(key) || lj.at(key).is_null()) return std::nullopt;
            const std::string s = lj.at(key).get<std::string>();
            if (s.size() != 1)
                throw ValidationError("line '" + line.id + "': bad " + key + " '" + s + "'");
            return bieso_from_char(s[0]);
        };
        line.label = read_label("label");
        line.predicted = read_label("predicted");
        page.lines.push_back(std::move(line));
    }

    validate_page(page);
    return page;
}

}  // namespace

char to_char(BiesoLabel label) {
    static constexpr char chars[kNumLabels] = {'B', 'I', 'E', 'S', 'O'};
    return chars[static_cast<int>(label)];
}

BiesoLabel bieso_from_char(char c) {
    switch (c) {
        case 'B': return BiesoLabel::B;
        case 'I': return BiesoLabel::I;
        case 'E': return BiesoLabel::E;
        case 'S': return BiesoLabel::S;
        case 'O': return BiesoLabel::O;
    }
    throw ValidationError(std::string("unknown BIESO label '") + c + "'");
}

Page load_page(const std::string& bytes) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("page JSON parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    try {
        return page_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("page JSON: ") + e.what());
    }
}

Page load_page_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open page file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return load_page(ss.str());
    } catch (Error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::string save_page(const Page& page) {
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["id"] = page.id;
    doc["width"] = page.width;
    doc["height"] = page.height;
    doc["table_region"] = box_json(page.table_region);
    doc["columns"] = ordered_json::array();
    for (const Column& c : page.columns) {
        ordered_json col;
        col["index"] = c.index;
        col["x"] = c.box.x;
        col["y"] = c.box.y;
        col["w"] = c.box.w;
        col["h"] = c.box.h;
        doc["columns"].push_back(col);
    }
    doc["lines"] = ordered_json::array();
    for (const TextLine& line : page.lines) {
        ordered_json lj;
        lj["id"] = line.id;
        lj["x"] = line.box.x;
        lj["y"] = line.box.y;
        lj["w"] = line.box.w;
        lj["h"] = line.box.h;
        if (line.column) lj["column"] = *line.column;
        if (line.label) lj["label"] = std::string(1, to_char(*line.label));
        if (line.predicted) lj["predicted"] = std::string(1, to_char(*line.predicted));
        doc["lines"].push_back(lj);
    }
    return doc.dump(2) + "\n";
}

void save_page_file(const Page& page, const std::string& path) {
    atomic_write(path, save_page(page));
}

DatasetStats label_stats(const Dataset& dataset) {
    DatasetStats stats;
    for (const Page& page : dataset.pages) {
        for (const TextLine& line : page.lines) {
            if (!line.label)
                throw ValidationError("page '" + page.id + "': line '" + line.id +
                                      "' has no label");
            stats.label_counts[static_cast<int>(*line.label)]++;
            stats.total_lines++;
        }
    }
    stats.cells = stats.label_counts[static_cast<int>(BiesoLabel::B)] +
                  stats.label_counts[static_cast<int>(BiesoLabel::S)];
    return stats;
}

Dataset load_dataset(const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw Error("cannot open manifest '" + manifest_path + "'");
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("manifest JSON parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    if (doc.value("format_version", kFormatVersion) != kFormatVersion)
        throw ValidationError("unsupported manifest format_version");
    warn_unknown_fields(doc, {"format_version", "pages", "folds"}, "manifest");

    Dataset ds;
    const fs::path base = fs::path(manifest_path).parent_path();
    for (const auto& pj : doc.at("pages")) {
        const fs::path p = pj.get<std::string>();
        ds.pages.push_back(load_page_file((p.is_absolute() ? p : base / p).string()));
    }
    if (doc.contains("folds")) {
        for (auto it = doc["folds"].begin(); it != doc["folds"].end(); ++it)
            ds.folds[it.key()] = it.value().get<int>();
        std::set<int> indices;
        for (const auto& [page_id, fold] : ds.folds) indices.insert(fold);
        int expect = 0;
        for (int f : indices) {
            if (f != expect++)
                throw ValidationError("manifest folds must be contiguous from 0");
        }
    }
    return ds;
}

void save_manifest(const std::vector<std::string>& page_paths,
                   const std::map<std::string, int>& folds, const std::string& manifest_path) {
    ordered_json doc;
    doc["format_version"] = kFormatVersion;
    doc["pages"] = page_paths;
    if (!folds.empty()) {
        ordered_json fj;
        for (const auto& [id, fold] : folds) fj[id] = fold;
        doc["folds"] = fj;
    }
    atomic_write(manifest_path, doc.dump(2) + "\n");
}

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("short write to '" + tmp + "'");
    }
    fs::rename(tmp, path);
}

}  // namespace tablegraph
