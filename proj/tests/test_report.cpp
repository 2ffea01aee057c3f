#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "anchor/report.hpp"

using namespace anchor;
namespace fs = std::filesystem;

TEST_CASE("csv_escape: RFC quoting") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("CsvTable: round trip through text") {
    CsvTable t;
    t.header = {"name", "value"};
    t.add_row({"comma,field", "1.5"});
    t.add_row({"quote\"field", "-2"});
    t.add_row({"multi\nline", "0"});

    const CsvTable back = CsvTable::parse(t.to_string());
    CHECK(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(back.rows[i] == t.rows[i]);

    CHECK_THROWS_AS(t.add_row({"only-one"}), ValidationError);
}

TEST_CASE("csv_num: stable shortest-ish formatting") {
    CHECK(csv_num(0.25) == "0.25");
    CHECK(csv_num(33024.0 / 92160.0) == csv_num(33024.0 / 92160.0));
    CHECK(csv_num(1e-9) == "1e-09");
}

TEST_CASE("RunDir: atomic writes leave no temp files") {
    const fs::path base = fs::temp_directory_path() / "anchor_report_test";
    fs::remove_all(base);
    const RunDir run = RunDir::create(base, "unit");
    CsvTable t;
    t.header = {"a"};
    t.add_row({"1"});
    run.write_csv(t);
    run.write_text("summary.json", "{}\n");

    CHECK(fs::exists(run.path() / "results.csv"));
    CHECK(fs::exists(run.path() / "summary.json"));
    for (const auto& entry : fs::directory_iterator(run.path()))
        CHECK(entry.path().extension() != ".tmp");

    std::ifstream in(run.path() / "results.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "a");
    fs::remove_all(base);
}

TEST_CASE("RunDir: name collisions get a suffix") {
    const fs::path base = fs::temp_directory_path() / "anchor_report_collide";
    fs::remove_all(base);
    const RunDir a = RunDir::create(base, "same");
    const RunDir b = RunDir::create(base, "same");
    CHECK(a.path() != b.path());
    fs::remove_all(base);
}

TEST_CASE("svg_line_plot: emits a well-formed polyline") {
    const std::string svg = svg_line_plot("demo", {{"series", {0, 1, 2}, {1.0, 4.0, 2.0}}});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("demo") != std::string::npos);
}
