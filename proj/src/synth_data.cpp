#include "anchor/synth_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace anchor {

void SignalSpec::validate() const {
    if (length < 4) throw ConfigError("SignalSpec: length must be >= 4");
    if (components.empty()) throw ConfigError("SignalSpec: at least one tone component required");
    if (kind == SignalKind::FractionalSine && components.size() != 1)
        throw ConfigError("SignalSpec: FractionalSine takes exactly one component");
    for (const auto& c : components) {
        if (!(c.period > 1.0))
            throw ConfigError("SignalSpec: periods must be > 1, got " + std::to_string(c.period));
        if (!std::isfinite(c.amplitude) || !std::isfinite(c.phase))
            throw ConfigError("SignalSpec: non-finite component");
    }
    if (noise_std < 0.0 || !std::isfinite(noise_std))
        throw ConfigError("SignalSpec: noise_std must be >= 0");
    if (kind == SignalKind::AnomalyInjected) {
        if (anomalies.positions.size() != anomalies.magnitudes.size())
            throw ConfigError("SignalSpec: anomaly positions/magnitudes length mismatch");
        for (int p : anomalies.positions)
            if (p < 0 || p >= length)
                throw ConfigError("SignalSpec: anomaly position " + std::to_string(p) +
                                  " outside [0, " + std::to_string(length) + ")");
    }
}

GeneratedSignal generate(const SignalSpec& spec) {
    spec.validate();

    GeneratedSignal out{SeriesBatch(1, 1, spec.length), {}};
    auto x = out.batch.series(0, 0);

    double max_period = 0.0;
    for (const auto& c : spec.components) {
        out.meta.true_periods.push_back(c.period);
        max_period = std::max(max_period, c.period);
        const double omega = 2.0 * std::numbers::pi / c.period;
        for (int t = 0; t < spec.length; ++t) x[t] += c.amplitude * std::sin(omega * t + c.phase);
    }
    out.meta.length_warning = spec.length < 4.0 * max_period;

    if (spec.kind == SignalKind::TrendPlusSeason && spec.trend_slope != 0.0)
        for (int t = 0; t < spec.length; ++t) x[t] += spec.trend_slope * t;

    if (spec.noise_std > 0.0) {
        SeededRng rng(spec.seed);
        for (int t = 0; t < spec.length; ++t) x[t] += spec.noise_std * rng.normal();
    }

    if (spec.kind == SignalKind::FractionalSine) {
        const double period = spec.components[0].period;
        out.meta.integer_period = static_cast<int>(std::floor(period));
        out.meta.fractional_part = period - std::floor(period);
    }

    if (spec.kind == SignalKind::AnomalyInjected) {
        out.meta.anomaly_labels.assign(static_cast<std::size_t>(spec.length), 0);
        for (std::size_t i = 0; i < spec.anomalies.positions.size(); ++i) {
            const int p = spec.anomalies.positions[i];
            x[static_cast<std::size_t>(p)] += spec.anomalies.magnitudes[i];
            out.meta.anomaly_labels[static_cast<std::size_t>(p)] = 1;
        }
    }
    return out;
}

// ── CSV ──────────────────────────────────────────────────────────────────────

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
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
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ValidationError("load_csv: non-numeric cell at row " + std::to_string(row + 1) +
                              ", column " + std::to_string(col + 1) + ": '" + cell + "'");
    return value;
}

}  // namespace

CsvData load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw ValidationError("load_csv: cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> names;
    std::string line;
    std::size_t line_no = 0;
    bool want_header = options.header;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (want_header) {
            for (auto& f : fields) {
                while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
                names.push_back(f);
            }
            want_header = false;
            continue;
        }
        if (!rows.empty() && fields.size() != rows[0].size())
            throw ValidationError("load_csv: ragged row " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " cells, expected " +
                                  std::to_string(rows[0].size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row.push_back(parse_cell(fields[c], line_no - 1, c));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("load_csv: '" + path + "' holds no data rows");

    const int channels = static_cast<int>(rows[0].size());
    const int length = static_cast<int>(rows.size());
    if (!names.empty() && static_cast<int>(names.size()) != channels)
        throw ValidationError("load_csv: header has " + std::to_string(names.size()) +
                              " names for " + std::to_string(channels) + " columns");

    CsvData out{SeriesBatch(1, channels, length), std::move(names), {}, {}, false};
    for (int t = 0; t < length; ++t)
        for (int c = 0; c < channels; ++c)
            out.batch.at(0, c, t) = rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];

    out.means.assign(static_cast<std::size_t>(channels), 0.0);
    out.stds.assign(static_cast<std::size_t>(channels), 1.0);
    if (options.standardize) {
        for (int c = 0; c < channels; ++c) {
            auto series = out.batch.series(0, c);
            double mean = 0.0;
            for (double v : series) mean += v;
            mean /= static_cast<double>(length);
            double var = 0.0;
            for (double v : series) var += (v - mean) * (v - mean);
            var /= static_cast<double>(length);
            const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
            for (double& v : series) v = (v - mean) / sd;
            out.means[static_cast<std::size_t>(c)] = mean;
            out.stds[static_cast<std::size_t>(c)] = sd;
        }
        out.standardized = true;
    }
    return out;
}

}  // namespace anchor
