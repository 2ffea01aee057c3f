#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "anchor/errors.hpp"

namespace anchor {

// ── CSV tables ───────────────────────────────────────────────────────────────
// RFC-4180 quoting: fields holding commas, quotes, or newlines are quoted and
// embedded quotes doubled.

std::string csv_escape(const std::string& field);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string to_string() const;
    static CsvTable parse(const std::string& text);
};

// Fixed-format numeric cell so result rows are byte-stable across runs.
std::string csv_num(double value);

// ── Run directories ──────────────────────────────────────────────────────────
// <out_dir>/<subcommand>-<timestamp>[-k]/  with every file written through a
// temp-file-then-rename so readers never observe partial output.

class RunDir {
public:
    static RunDir create(const std::filesystem::path& out_dir, const std::string& subcommand);

    const std::filesystem::path& path() const { return dir_; }
    void write_csv(const CsvTable& table, const std::string& name = "results.csv") const;
    void write_text(const std::string& name, const std::string& content) const;

private:
    explicit RunDir(std::filesystem::path dir) : dir_(std::move(dir)) {}
    std::filesystem::path dir_;
};

void write_file_atomic(const std::filesystem::path& target, const std::string& content);

// ── Minimal SVG line plot ────────────────────────────────────────────────────
// Static image output for --plot; acceptance logic never reads these.
struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
};

std::string svg_line_plot(const std::string& title, const std::vector<SvgSeries>& series,
                          int width = 640, int height = 400);

}  // namespace anchor
