#include "anchor/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace anchor {

namespace fs = std::filesystem;

std::string csv_escape(const std::string& field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += '"';
    return out;
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (!header.empty() && row.size() != header.size())
        throw ValidationError("CsvTable: row has " + std::to_string(row.size()) +
                              " cells, header has " + std::to_string(header.size()));
    rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
    std::ostringstream out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(cells[i]);
        }
        out << '\n';
    };
    if (!header.empty()) emit(header);
    for (const auto& row : rows) emit(row);
    return out.str();
}

CsvTable CsvTable::parse(const std::string& text) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool first_line = true;

    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
    };
    auto end_line = [&]() {
        end_field();
        if (first_line) {
            table.header = row;
            first_line = false;
        } else {
            table.rows.push_back(row);
        }
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            end_field();
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_line();
        } else {
            field += ch;
        }
    }
    if (!field.empty() || !row.empty()) end_line();
    return table;
}

std::string csv_num(double value) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

// ── RunDir ───────────────────────────────────────────────────────────────────

RunDir RunDir::create(const fs::path& out_dir, const std::string& subcommand) {
    fs::create_directories(out_dir);
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
#if defined(_WIN32)
    gmtime_s(&tm, &tt);
#else
    gmtime_r(&tt, &tm);
#endif
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);

    fs::path dir = out_dir / (subcommand + "-" + stamp);
    for (int k = 2; fs::exists(dir); ++k)
        dir = out_dir / (subcommand + "-" + stamp + "-" + std::to_string(k));
    fs::create_directory(dir);
    return RunDir(dir);
}

void write_file_atomic(const fs::path& target, const std::string& content) {
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

void RunDir::write_csv(const CsvTable& table, const std::string& name) const {
    write_file_atomic(dir_ / name, table.to_string());
}

void RunDir::write_text(const std::string& name, const std::string& content) const {
    write_file_atomic(dir_ / name, content);
}

// ── SVG plot ─────────────────────────────────────────────────────────────────

std::string svg_line_plot(const std::string& title, const std::vector<SvgSeries>& series,
                          int width, int height) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b"};
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    const double ml = 60, mr = 20, mt = 40, mb = 40;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title
        << "</text>\n"
        << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
        << "' fill='none' stroke='#888'/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", ymin);
    svg << "<text x='8' y='" << sy(ymin) << "' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", ymax);
    svg << "<text x='8' y='" << sy(ymax) + 10 << "' font-size='11'>" << buf << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = palette[si % 6];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
        svg << "'/>\n";
        svg << "<text x='" << ml + 10 << "' y='" << mt + 16 + 14 * static_cast<double>(si)
            << "' font-size='12' fill='" << color << "'>" << s.label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace anchor
