#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tablegraph {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input could not be parsed at all (bad JSON, bad container header).
struct ParseError : Error {
    using Error::Error;
};

/// Input parsed but violates a document invariant.
struct ValidationError : Error {
    using Error::Error;
};

/// Axis-aligned box, y grows downward (top of page = 0).
struct BoundingBox {
    double x = 0, y = 0, w = 0, h = 0;

    double left() const { return x; }
    double right() const { return x + w; }
    double top() const { return y; }
    double bottom() const { return y + h; }
    double center_x() const { return x + w / 2; }
    double center_y() const { return y + h / 2; }

    bool operator==(const BoundingBox&) const = default;
};

/// Per-line tag marking the line's position within a table cell.
/// The declaration order fixes the label order used for confusion-matrix
/// indexing and for tie-breaking: B < I < E < S < O.
enum class BiesoLabel : std::uint8_t { B = 0, I = 1, E = 2, S = 3, O = 4 };

inline constexpr int kNumLabels = 5;
inline constexpr std::array<BiesoLabel, kNumLabels> kAllLabels = {
    BiesoLabel::B, BiesoLabel::I, BiesoLabel::E, BiesoLabel::S, BiesoLabel::O};

char to_char(BiesoLabel label);
BiesoLabel bieso_from_char(char c);

struct TextLine {
    std::string id;
    BoundingBox box;
    std::optional<int> column;
    std::optional<BiesoLabel> label;      // ground truth
    std::optional<BiesoLabel> predicted;  // model output

    bool operator==(const TextLine&) const = default;
};

struct Column {
    int index = 0;
    BoundingBox box;

    bool operator==(const Column&) const = default;
};

struct Page {
    std::string id;
    double width = 0, height = 0;
    BoundingBox table_region;
    std::vector<Column> columns;
    std::vector<TextLine> lines;

    bool operator==(const Page&) const = default;
};

struct Dataset {
    std::vector<Page> pages;
    std::map<std::string, int> folds;  // page id -> fold index, optional
};

/// Parses a page from its JSON serialization. Unknown fields are ignored
/// with a warning on stderr. Throws ParseError (with byte offset) on
/// malformed JSON and ValidationError (naming the offending line) on
/// invariant violations.
Page load_page(const std::string& bytes);
Page load_page_file(const std::string& path);

/// Serializes a page; load_page(save_page(p)) == p field by field.
std::string save_page(const Page& page);
void save_page_file(const Page& page, const std::string& path);

/// Label frequencies plus cell count (#B + #S) over a fully labeled dataset.
struct DatasetStats {
    std::array<std::int64_t, kNumLabels> label_counts{};
    std::int64_t total_lines = 0;
    std::int64_t cells = 0;
};
DatasetStats label_stats(const Dataset& dataset);

/// Manifest: list of page files plus optional fold assignment.
Dataset load_dataset(const std::string& manifest_path);
void save_manifest(const std::vector<std::string>& page_paths,
                   const std::map<std::string, int>& folds,
                   const std::string& manifest_path);

/// Writes bytes via a temporary file and rename, so readers never observe a
/// partially written file.
void atomic_write(const std::string& path, const std::string& bytes);

}  // namespace tablegraph
