#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace tablegraph;
using tgtest::make_line;
using tgtest::make_page;

TEST_CASE("bieso label order and characters") {
    CHECK(static_cast<int>(BiesoLabel::B) == 0);
    CHECK(static_cast<int>(BiesoLabel::I) == 1);
    CHECK(static_cast<int>(BiesoLabel::E) == 2);
    CHECK(static_cast<int>(BiesoLabel::S) == 3);
    CHECK(static_cast<int>(BiesoLabel::O) == 4);
    for (BiesoLabel l : kAllLabels) CHECK(bieso_from_char(to_char(l)) == l);
    CHECK_THROWS_AS(bieso_from_char('X'), ValidationError);
}

TEST_CASE("bounding box accessors") {
    BoundingBox b{10, 20, 30, 40};
    CHECK(b.left() == 10);
    CHECK(b.right() == 40);
    CHECK(b.top() == 20);
    CHECK(b.bottom() == 60);
    CHECK(b.center_x() == 25);
    CHECK(b.center_y() == 40);
}

TEST_CASE("minimal page parses") {
    const char* text = R"({
      "format_version": 1, "id": "p1", "width": 100, "height": 100,
      "table_region": {"x": 0, "y": 0, "w": 100, "h": 100},
      "columns": [], "lines": [{"id": "l1", "x": 1, "y": 2, "w": 3, "h": 4}]
    })";
    Page p = load_page(text);
    CHECK(p.lines.size() == 1);
    CHECK(p.columns.empty());
    CHECK_FALSE(p.lines[0].label.has_value());
}

TEST_CASE("invalid pages rejected") {
    SUBCASE("zero-width line") {
        Page p = make_page({make_line("l1", 0, 0, 0, 5)});
        CHECK_THROWS_AS(load_page(save_page(p)), ValidationError);
    }
    SUBCASE("column index out of range") {
        Page p = make_page({make_line("l1", 0, 0, 10, 5, 3)});
        Column c0;
        c0.index = 0;
        c0.box = {0, 0, 50, 100};
        Column c1;
        c1.index = 1;
        c1.box = {50, 0, 50, 100};
        p.columns = {c0, c1};
        CHECK_THROWS_AS(load_page(save_page(p)), ValidationError);
    }
    SUBCASE("duplicate line id") {
        Page p = make_page({make_line("l1", 0, 0, 10, 5), make_line("l1", 0, 20, 10, 5)});
        CHECK_THROWS_AS(load_page(save_page(p)), ValidationError);
    }
    SUBCASE("malformed json") { CHECK_THROWS_AS(load_page("{nope"), ParseError); }
}

TEST_CASE("page round-trip is identity") {
    Page p = make_page({make_line("a", 1.5, 2.25, 10, 5, 0), make_line("b", 3, 20, 10, 5)});
    Column c;
    c.index = 0;
    c.box = {0, 0, 100, 200};
    p.columns = {c};
    p.lines[0].label = BiesoLabel::B;
    p.lines[0].predicted = BiesoLabel::S;
    p.lines[1].label = BiesoLabel::O;
    Page q = load_page(save_page(p));
    CHECK(p == q);

    SUBCASE("empty lines list") {
        Page empty = make_page({});
        CHECK(load_page(save_page(empty)) == empty);
    }
}

TEST_CASE("label stats count cells as B plus S") {
    Page p = make_page({make_line("1", 0, 0, 10, 5), make_line("2", 0, 10, 10, 5),
                        make_line("3", 0, 20, 10, 5), make_line("4", 0, 30, 10, 5),
                        make_line("5", 0, 40, 10, 5)});
    const BiesoLabel seq[] = {BiesoLabel::B, BiesoLabel::I, BiesoLabel::E, BiesoLabel::S,
                              BiesoLabel::O};
    for (int i = 0; i < 5; ++i) p.lines[i].label = seq[i];
    Dataset ds;
    ds.pages = {p};
    DatasetStats stats = label_stats(ds);
    for (int i = 0; i < kNumLabels; ++i) CHECK(stats.label_counts[i] == 1);
    CHECK(stats.total_lines == 5);
    CHECK(stats.cells == 2);

    SUBCASE("empty dataset is all zeros") {
        DatasetStats zero = label_stats(Dataset{});
        CHECK(zero.total_lines == 0);
        CHECK(zero.cells == 0);
    }
    SUBCASE("unlabeled line errors with ids") {
        p.lines[2].label.reset();
        Dataset bad;
        bad.pages = {p};
        CHECK_THROWS_WITH_AS(label_stats(bad), doctest::Contains("3"), ValidationError);
    }
}

TEST_CASE("atomic write leaves no temp files and replaces content") {
    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "tg_atomic_test").string();
    fs::create_directories(dir);
    const std::string path = dir + "/out.txt";
    atomic_write(path, "first");
    atomic_write(path, "second");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "second");
    int entries = 0;
    for ([[maybe_unused]] auto& e : fs::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
    fs::remove_all(dir);
}

TEST_CASE("manifest round-trip with folds") {
    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "tg_manifest_test").string();
    fs::create_directories(dir);
    Page p1 = make_page({make_line("l1", 0, 0, 10, 5)});
    p1.id = "pg1";
    Page p2 = make_page({make_line("l2", 0, 20, 10, 5)});
    p2.id = "pg2";
    save_page_file(p1, dir + "/pg1.json");
    save_page_file(p2, dir + "/pg2.json");
    save_manifest({"pg1.json", "pg2.json"}, {{"pg1", 0}, {"pg2", 1}}, dir + "/manifest.json");
    Dataset ds = load_dataset(dir + "/manifest.json");
    CHECK(ds.pages.size() == 2);
    CHECK(ds.pages[0] == p1);
    CHECK(ds.folds.at("pg2") == 1);
    SUBCASE("non-contiguous folds rejected") {
        save_manifest({"pg1.json"}, {{"pg1", 2}}, dir + "/bad.json");
        CHECK_THROWS_AS(load_dataset(dir + "/bad.json"), ValidationError);
    }
    fs::remove_all(dir);
}
