// anchor: period-anchored deformable convolution experiments.
//
// Subcommands mirror the experiment drivers in the library: extract-periods,
// gradcheck, compensation-bench, ablation, topk-sweep, routing-ablation,
// cost-model, train.  Every run writes results.csv plus summary.json into
// <out-dir>/<subcommand>-<timestamp>/; result rows are a pure function of the
// config and seed.
//
// Exit codes: 0 success, 1 runtime error, 2 validation/config error,
// 3 check-suite failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchor/experiments.hpp"
#include "anchor/fgdm.hpp"
#include "anchor/report.hpp"

using nlohmann::json;

namespace {

constexpr const char* kVersion = "anchor 0.1.0";

bool use_color() {
    const char* env = std::getenv("ANCHOR_NO_COLOR");
    return env == nullptr || env[0] == '\0';
}

std::string paint(const std::string& text, const char* code) {
    if (!use_color()) return text;
    return std::string("\033[") + code + "m" + text + "\033[0m";
}

std::string pass_str(bool ok) {
    return ok ? paint("PASS", "32") : paint("FAIL", "31");
}

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "runs";
    std::uint64_t seed = 42;
    int threads = 1;
    bool plot = false;
};

// JSON config keys mirror flag names; flags given on the command line win.
// Unknown keys are rejected.
class JsonBinder {
public:
    explicit JsonBinder(const CLI::App* sub) : sub_(sub) {}

    template <typename T>
    JsonBinder& bind(const std::string& key, T& target) {
        setters_.emplace_back(key, [&target, key](const json& j) { target = j.at(key).get<T>(); });
        return *this;
    }

    void apply(const json& j) const {
        for (const auto& [key, value] : j.items()) {
            bool known = false;
            for (const auto& [k, fn] : setters_)
                if (k == key) known = true;
            if (!known)
                throw anchor::ConfigError("config: unknown key '" + key + "' for subcommand '" +
                                          sub_->get_name() + "'");
        }
        for (const auto& [key, fn] : setters_) {
            if (!j.contains(key)) continue;
            // A flag explicitly passed on the command line keeps priority.
            const CLI::Option* opt = sub_->get_option_no_throw("--" + key);
            if (opt != nullptr && opt->count() > 0) continue;
            fn(j);
        }
    }

private:
    const CLI::App* sub_;
    std::vector<std::pair<std::string, std::function<void(const json&)>>> setters_;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw anchor::ValidationError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw anchor::ValidationError("config: invalid JSON in '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw anchor::ValidationError("config: top level must be an object");
    return j;
}

json global_summary(const GlobalOpts& g, const std::string& subcommand, double wall_seconds) {
    return json{{"tool", kVersion},
                {"subcommand", subcommand},
                {"seed", g.seed},
                {"threads", g.threads},
                {"wall_seconds", wall_seconds}};
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

anchor::SeriesBatch input_or_synth(const std::string& input_path, bool header, double period,
                                   int length) {
    if (!input_path.empty()) {
        anchor::CsvData data = anchor::load_csv(input_path, {header, false});
        return data.batch;
    }
    anchor::SignalSpec spec;
    spec.kind = anchor::SignalKind::MultiTone;
    spec.length = length;
    spec.components = {{period, 1.0, 0.0}};
    return anchor::generate(spec).batch;
}

// ── subcommand runners ───────────────────────────────────────────────────────

int cmd_extract_periods(const GlobalOpts& g, const std::string& input, bool header,
                        double synth_period, int synth_length, int k) {
    Stopwatch watch;
    const anchor::SeriesBatch batch = input_or_synth(input, header, synth_period, synth_length);
    const auto rows = anchor::run_extract_periods(batch, k);

    anchor::CsvTable table;
    table.header = {"rank", "frequency", "period", "energy"};
    for (const auto& r : rows)
        table.add_row({std::to_string(r.rank), std::to_string(r.frequency),
                       std::to_string(r.period), anchor::csv_num(r.energy)});

    const auto run = anchor::RunDir::create(g.out_dir, "extract-periods");
    run.write_csv(table);
    json summary = global_summary(g, "extract-periods", watch.seconds());
    summary["config"] = {{"input", input}, {"header", header}, {"synth_period", synth_period},
                         {"synth_length", synth_length}, {"topk", k}};
    summary["window_length"] = batch.length();
    run.write_text("summary.json", summary.dump(2) + "\n");

    if (g.plot) {
        const auto energies = anchor::spectral_energy(batch);
        anchor::SvgSeries s{"spectral energy a(f)", {}, {}};
        for (std::size_t f = 0; f < energies.size(); ++f) {
            s.x.push_back(static_cast<double>(f));
            s.y.push_back(energies[f]);
        }
        run.write_text("plot.svg", anchor::svg_line_plot("spectral energy", {s}));
    }

    std::cout << "rank  freq  period  energy\n";
    for (const auto& r : rows)
        std::cout << r.rank << "     " << r.frequency << "     " << r.period << "      "
                  << r.energy << "\n";
    std::cout << "report: " << run.path().string() << "\n";
    return 0;
}

int cmd_gradcheck(const GlobalOpts& g, const std::string& scope_name, double tolerance,
                  bool inject_fault) {
    Stopwatch watch;
    anchor::GradcheckScope scope;
    if (scope_name == "interp") scope = anchor::GradcheckScope::Interp;
    else if (scope_name == "defop") scope = anchor::GradcheckScope::Defop;
    else if (scope_name == "fgdm") scope = anchor::GradcheckScope::Fgdm;
    else if (scope_name == "backbone") scope = anchor::GradcheckScope::Backbone;
    else throw anchor::ConfigError("gradcheck: unknown scope '" + scope_name + "'");

    const double tol = tolerance > 0 ? tolerance : anchor::default_gradcheck_tol(scope);
    const auto result = anchor::run_gradcheck(scope, g.seed, tol, inject_fault);

    anchor::CsvTable table;
    table.header = {"group", "max_rel_err", "pass"};
    for (const auto& r : result.rows) {
        table.add_row({r.group, anchor::csv_num(r.max_rel_err), r.pass ? "1" : "0"});
        std::cout << pass_str(r.pass) << "  " << r.group << "  max_rel_err=" << r.max_rel_err
                  << "\n";
    }

    const auto run = anchor::RunDir::create(g.out_dir, "gradcheck");
    run.write_csv(table);
    json summary = global_summary(g, "gradcheck", watch.seconds());
    summary["config"] = {{"scope", scope_name}, {"tolerance", tol},
                         {"inject_fault", inject_fault}};
    summary["scope"] = scope_name;
    summary["rel_tol"] = result.rel_tol;
    summary["abs_floor"] = result.abs_floor;
    summary["pass"] = result.pass;
    run.write_text("summary.json", summary.dump(2) + "\n");

    std::cout << (result.pass ? pass_str(true) : pass_str(false)) << "  overall (tol " << tol
              << ")\nreport: " << run.path().string() << "\n";
    return result.pass ? 0 : 3;
}

int cmd_compensation_bench(const GlobalOpts& g, anchor::CompensationConfig cfg) {
    Stopwatch watch;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    const auto rows = anchor::run_compensation_bench(cfg);

    anchor::CsvTable table;
    table.header = {"period", "integer_period", "mae_linear", "mae_gaussian", "eta"};
    int wins = 0;
    double eta_sum = 0.0;
    for (const auto& r : rows) {
        table.add_row({anchor::csv_num(r.period), std::to_string(r.integer_period),
                       anchor::csv_num(r.mae_linear), anchor::csv_num(r.mae_gaussian),
                       anchor::csv_num(r.eta)});
        if (r.eta > 1.0) ++wins;
        eta_sum += r.eta;
        std::cout << "T*=" << r.period << "  mae_lin=" << r.mae_linear
                  << "  mae_gauss=" << r.mae_gaussian << "  eta=" << r.eta << "\n";
    }

    const auto run = anchor::RunDir::create(g.out_dir, "compensation-bench");
    run.write_csv(table);

    json summary = global_summary(g, "compensation-bench", watch.seconds());
    summary["config"] = {{"periods", cfg.periods}, {"steps", cfg.steps}, {"lr", cfg.lr},
                         {"sigma", cfg.sigma}, {"kernel_size", cfg.kernel_size},
                         {"length", cfg.length}};
    summary["steps"] = cfg.steps;
    summary["lr"] = cfg.lr;
    summary["sigma"] = cfg.sigma;
    summary["eta_gt_1_count"] = wins;
    summary["eta_mean"] = eta_sum / static_cast<double>(rows.size());
    json detail = json::array();
    for (const auto& r : rows)
        detail.push_back({{"period", r.period},
                          {"theoretical", r.theoretical},
                          {"learned_linear", r.learned_linear},
                          {"learned_gaussian", r.learned_gaussian}});
    summary["offsets"] = detail;
    run.write_text("summary.json", summary.dump(2) + "\n");

    if (g.plot) {
        anchor::SvgSeries eta_series{"eta = mae_linear / mae_gaussian", {}, {}};
        for (const auto& r : rows) {
            eta_series.x.push_back(r.period);
            eta_series.y.push_back(r.eta);
        }
        run.write_text("plot.svg",
                       anchor::svg_line_plot("quantization compensation", {eta_series}));
    }
    std::cout << "eta>1 in " << wins << "/" << rows.size() << ", mean eta "
              << eta_sum / static_cast<double>(rows.size()) << "\nreport: " << run.path().string()
              << "\n";
    return 0;
}

int cmd_ablation(const GlobalOpts& g, anchor::AblationConfig cfg) {
    Stopwatch watch;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    const auto rows = anchor::run_ablation(cfg);

    anchor::CsvTable table;
    table.header = {"variant", "train_mse", "val_mse", "val_mae", "val_smape"};
    for (const auto& r : rows) {
        table.add_row({r.variant, anchor::csv_num(r.train_mse), anchor::csv_num(r.val.mse),
                       anchor::csv_num(r.val.mae), anchor::csv_num(r.val.smape)});
        std::cout << r.variant << "  val_mse=" << r.val.mse << "  val_mae=" << r.val.mae
                  << "  val_smape=" << r.val.smape << "\n";
    }

    const auto run = anchor::RunDir::create(g.out_dir, "ablation");
    run.write_csv(table);
    json summary = global_summary(g, "ablation", watch.seconds());
    summary["config"] = {{"period", cfg.task.period}, {"noise", cfg.task.noise_std},
                         {"epochs", cfg.epochs}, {"batch_size", cfg.batch_size},
                         {"lr", cfg.lr}, {"sigma", cfg.sigma}};
    summary["epochs"] = cfg.epochs;
    summary["period"] = cfg.task.period;
    run.write_text("summary.json", summary.dump(2) + "\n");

    if (g.plot) {
        anchor::SvgSeries s{"final val mse per variant", {}, {}};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(rows[i].val.mse);
        }
        run.write_text("plot.svg", anchor::svg_line_plot("variant ablation", {s}));
    }
    std::cout << "report: " << run.path().string() << "\n";
    return 0;
}

int cmd_topk_sweep(const GlobalOpts& g, anchor::TopkConfig cfg) {
    Stopwatch watch;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    if (cfg.k_max > cfg.input_length / 2) {
        std::cerr << "warning: k_max clamped to " << cfg.input_length / 2 << "\n";
        cfg.k_max = cfg.input_length / 2;
    }
    const auto rows = anchor::run_topk_sweep(cfg);

    anchor::CsvTable table;
    table.header = {"k", "train_mse", "val_mse", "val_mae", "val_smape"};
    double best = 0, worst = 0;
    bool first = true;
    for (const auto& r : rows) {
        table.add_row({std::to_string(r.k), anchor::csv_num(r.train_mse),
                       anchor::csv_num(r.val.mse), anchor::csv_num(r.val.mae),
                       anchor::csv_num(r.val.smape)});
        if (first) { best = worst = r.val.mse; first = false; }
        best = std::min(best, r.val.mse);
        worst = std::max(worst, r.val.mse);
        std::cout << "k=" << r.k << "  val_mse=" << r.val.mse << "\n";
    }

    const auto run = anchor::RunDir::create(g.out_dir, "topk-sweep");
    run.write_csv(table);
    const double ratio = best > 0 ? worst / best : 0.0;
    const bool bounded = ratio <= cfg.sensitivity_bound;
    json summary = global_summary(g, "topk-sweep", watch.seconds());
    summary["config"] = {{"k_min", cfg.k_min}, {"k_max", cfg.k_max}, {"epochs", cfg.epochs},
                         {"lr", cfg.lr}, {"sensitivity_bound", cfg.sensitivity_bound}};
    summary["sensitivity_ratio"] = ratio;
    summary["sensitivity_bounded"] = bounded;
    run.write_text("summary.json", summary.dump(2) + "\n");

    if (g.plot) {
        anchor::SvgSeries s{"val mse", {}, {}};
        for (const auto& r : rows) {
            s.x.push_back(r.k);
            s.y.push_back(r.val.mse);
        }
        run.write_text("plot.svg", anchor::svg_line_plot("top-k sensitivity", {s}));
    }
    std::cout << pass_str(bounded) << "  sensitivity ratio (worst/best val mse) " << ratio
              << " vs bound " << cfg.sensitivity_bound << "\nreport: " << run.path().string()
              << "\n";
    return bounded ? 0 : 3;
}

int cmd_routing_ablation(const GlobalOpts& g, anchor::RoutingConfig cfg) {
    Stopwatch watch;
    cfg.seed = g.seed;
    const auto rows = anchor::run_routing_ablation(cfg);

    anchor::CsvTable table;
    table.header = {"order", "precision", "recall", "f1", "threshold"};
    for (const auto& r : rows) {
        table.add_row({r.order, anchor::csv_num(r.precision), anchor::csv_num(r.recall),
                       anchor::csv_num(r.f1), anchor::csv_num(r.threshold)});
        std::cout << r.order << "  precision=" << r.precision << "  recall=" << r.recall
                  << "  f1=" << r.f1 << "\n";
    }

    const auto run = anchor::RunDir::create(g.out_dir, "routing-ablation");
    run.write_csv(table);
    json summary = global_summary(g, "routing-ablation", watch.seconds());
    summary["config"] = {{"epochs", cfg.epochs}, {"lr", cfg.lr},
                         {"quantile_r", cfg.quantile_r}, {"anomalies", cfg.anomaly_count}};
    summary["quantile_r"] = cfg.quantile_r;
    run.write_text("summary.json", summary.dump(2) + "\n");

    if (g.plot) {
        anchor::SvgSeries s{"f1 per routing order", {}, {}};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(rows[i].f1);
        }
        run.write_text("plot.svg", anchor::svg_line_plot("routing ablation", {s}));
    }
    std::cout << "report: " << run.path().string() << "\n";
    return 0;
}

int cmd_cost_model(const GlobalOpts& g, int channels, int length, int partitions,
                   std::vector<int> kernels) {
    Stopwatch watch;
    const anchor::CostModel m = anchor::cost_model(channels, length, partitions, kernels);

    anchor::CsvTable table;
    table.header = {"cost_baseline", "cost_spatial", "ratio", "rfft_cost", "rfft_fraction"};
    table.add_row({anchor::csv_num(m.baseline), anchor::csv_num(m.spatial),
                   anchor::csv_num(m.ratio), anchor::csv_num(m.rfft_cost),
                   anchor::csv_num(m.rfft_fraction)});

    const auto run = anchor::RunDir::create(g.out_dir, "cost-model");
    run.write_csv(table);
    json summary = global_summary(g, "cost-model", watch.seconds());
    summary["config"] = {{"channels", channels}, {"length", length},
                         {"partitions", partitions}, {"kernels", kernels}};
    summary["channels"] = channels;
    summary["length"] = length;
    summary["partitions"] = partitions;
    summary["kernels"] = kernels;
    run.write_text("summary.json", summary.dump(2) + "\n");

    std::cout << "cost_baseline  = " << m.baseline << "\n"
              << "cost_spatial   = " << m.spatial << "\n"
              << "ratio          = " << m.ratio << "\n"
              << "rfft_cost      = " << m.rfft_cost << "  (fraction of total "
              << m.rfft_fraction << ")\n"
              << "report: " << run.path().string() << "\n";
    return 0;
}

int cmd_train(const GlobalOpts& g, anchor::TrainRunConfig cfg, const std::string& task_name) {
    Stopwatch watch;
    cfg.seed = g.seed;
    if (task_name == "forecast") cfg.head = anchor::TaskHead::Forecast;
    else if (task_name == "reconstruction") cfg.head = anchor::TaskHead::Reconstruction;
    else throw anchor::ConfigError("train: task must be 'forecast' or 'reconstruction'");

    const auto result = anchor::run_train(cfg);

    anchor::CsvTable table;
    table.header = {"epoch", "train_loss", "val_mse", "val_mae", "val_smape"};
    for (const auto& rec : result.records)
        table.add_row({std::to_string(rec.epoch), anchor::csv_num(rec.train_loss),
                       anchor::csv_num(rec.val.mse), anchor::csv_num(rec.val.mae),
                       anchor::csv_num(rec.val.smape)});

    const auto run = anchor::RunDir::create(g.out_dir, "train");
    run.write_csv(table);

    if (!result.anomaly_scores.empty()) {
        anchor::CsvTable scores;
        scores.header = {"index", "anomaly_score"};
        for (std::size_t i = 0; i < result.anomaly_scores.size(); ++i)
            scores.add_row({std::to_string(i), anchor::csv_num(result.anomaly_scores[i])});
        run.write_csv(scores, "anomaly_scores.csv");
    }

    // Parameter dump: flat native-endian doubles plus a JSON shape manifest.
    std::string blob(reinterpret_cast<const char*>(result.flat_params.data()),
                     result.flat_params.size() * sizeof(double));
    run.write_text("params.bin", blob);
    json manifest = json::array();
    std::size_t offset = 0;
    for (const auto& [name, count] : result.manifest) {
        manifest.push_back({{"name", name}, {"count", count}, {"offset", offset}});
        offset += count;
    }
    run.write_text("params_manifest.json", manifest.dump(2) + "\n");

    json summary = global_summary(g, "train", watch.seconds());
    summary["config"] = {{"input", cfg.csv_path}, {"task", task_name},
                         {"horizon", cfg.horizon}, {"window", cfg.input_length},
                         {"stride", cfg.stride}, {"epochs", cfg.epochs},
                         {"batch_size", cfg.batch_size}, {"lr", cfg.lr},
                         {"partitions", cfg.partitions}, {"kernels", cfg.kernel_schedule},
                         {"width", cfg.stage_width}, {"blocks", cfg.blocks},
                         {"sigma", cfg.sigma}, {"standardize", cfg.standardize}};
    summary["task"] = task_name;
    summary["csv"] = cfg.csv_path;
    summary["final_val_mse"] = result.final_val.mse;
    summary["final_val_mae"] = result.final_val.mae;
    summary["final_val_smape"] = result.final_val.smape;
    run.write_text("summary.json", summary.dump(2) + "\n");

    if (g.plot) {
        anchor::SvgSeries s{"train loss", {}, {}};
        for (const auto& rec : result.records) {
            s.x.push_back(rec.epoch);
            s.y.push_back(rec.train_loss);
        }
        run.write_text("plot.svg", anchor::svg_line_plot("training loss", {s}));
    }

    std::cout << "final val mse " << result.final_val.mse << ", mae " << result.final_val.mae
              << ", smape " << result.final_val.smape << "\nreport: " << run.path().string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"period-anchored deformable convolution experiments"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file (flags override)");
    app.add_option("--seed", g.seed, "global random seed");
    app.add_option("--out-dir", g.out_dir, "report output directory");
    app.add_option("--threads", g.threads, "parallel sweep cases")->check(CLI::PositiveNumber);
    app.add_flag("--plot", g.plot, "also write a static SVG plot");

    // extract-periods
    auto* sc_extract = app.add_subcommand("extract-periods", "dominant periods of a series");
    std::string ep_input;
    bool ep_header = false;
    double ep_period = 24.0;
    int ep_length = 96, ep_k = 3;
    sc_extract->add_option("--input", ep_input, "CSV input (one column per channel)");
    sc_extract->add_flag("--header", ep_header, "CSV has a header row");
    sc_extract->add_option("--synth-period", ep_period, "synthetic tone period");
    sc_extract->add_option("--synth-length", ep_length, "synthetic series length");
    sc_extract->add_option("-k,--topk", ep_k, "periods to extract");

    // gradcheck
    auto* sc_grad = app.add_subcommand("gradcheck", "analytic vs finite-difference gradients");
    std::string gc_scope = "interp";
    double gc_tol = 0.0;
    bool gc_fault = false;
    sc_grad->add_option("--scope", gc_scope, "interp|defop|fgdm|backbone");
    sc_grad->add_option("--tolerance", gc_tol, "relative tolerance (0 = scope default)");
    sc_grad->add_flag("--inject-fault", gc_fault, "corrupt a gradient (harness self-test)");

    // compensation-bench
    auto* sc_comp = app.add_subcommand("compensation-bench",
                                       "fractional-period offset compensation");
    anchor::CompensationConfig comp_cfg;
    sc_comp->add_option("--periods", comp_cfg.periods, "fractional periods");
    sc_comp->add_option("--steps", comp_cfg.steps, "training steps per case");
    sc_comp->add_option("--lr", comp_cfg.lr, "learning rate");
    sc_comp->add_option("--sigma", comp_cfg.sigma, "Gaussian kernel sigma");
    sc_comp->add_option("--kernel-size", comp_cfg.kernel_size, "taps");
    sc_comp->add_option("--length", comp_cfg.length, "signal length");

    // ablation
    auto* sc_abl = app.add_subcommand("ablation", "conv1d vs bilinear vs gaussian variants");
    anchor::AblationConfig abl_cfg;
    sc_abl->add_option("--period", abl_cfg.task.period, "fractional task period");
    sc_abl->add_option("--noise", abl_cfg.task.noise_std, "noise std");
    sc_abl->add_option("--epochs", abl_cfg.epochs, "training epochs");
    sc_abl->add_option("--batch-size", abl_cfg.batch_size, "minibatch size");
    sc_abl->add_option("--lr", abl_cfg.lr, "learning rate");
    sc_abl->add_option("--sigma", abl_cfg.sigma, "Gaussian kernel sigma");

    // topk-sweep
    auto* sc_topk = app.add_subcommand("topk-sweep", "sensitivity to the number of periods");
    anchor::TopkConfig topk_cfg;
    sc_topk->add_option("--k-min", topk_cfg.k_min, "smallest k");
    sc_topk->add_option("--k-max", topk_cfg.k_max, "largest k");
    sc_topk->add_option("--epochs", topk_cfg.epochs, "training epochs");
    sc_topk->add_option("--lr", topk_cfg.lr, "learning rate");
    sc_topk->add_option("--sensitivity-bound", topk_cfg.sensitivity_bound,
                        "max allowed worst/best val-mse ratio");

    // routing-ablation
    auto* sc_route = app.add_subcommand("routing-ablation",
                                        "energy-asc vs energy-desc kernel routing");
    anchor::RoutingConfig route_cfg;
    sc_route->add_option("--epochs", route_cfg.epochs, "training epochs");
    sc_route->add_option("--lr", route_cfg.lr, "learning rate");
    sc_route->add_option("--quantile-r", route_cfg.quantile_r, "anomaly quantile r in (0,1)");
    sc_route->add_option("--anomalies", route_cfg.anomaly_count, "injected spike count");

    // cost-model
    auto* sc_cost = app.add_subcommand("cost-model", "baseline vs partitioned cascade cost");
    int cm_channels = 8, cm_length = 96, cm_partitions = 4;
    std::vector<int> cm_kernels = {3, 5, 7};
    sc_cost->add_option("--channels", cm_channels, "channel count C");
    sc_cost->add_option("--length", cm_length, "sequence length L");
    sc_cost->add_option("--partitions", cm_partitions, "partitions N");
    sc_cost->add_option("--kernels", cm_kernels, "kernel schedule (N-1 odd sizes)");

    // train
    auto* sc_train = app.add_subcommand("train", "train the backbone on CSV data");
    anchor::TrainRunConfig train_cfg;
    std::string train_task = "forecast";
    sc_train->add_option("--input", train_cfg.csv_path, "CSV input")->required();
    sc_train->add_flag("--header", train_cfg.csv_header, "CSV has a header row");
    sc_train->add_option("--task", train_task, "forecast|reconstruction");
    sc_train->add_option("--horizon", train_cfg.horizon, "forecast horizon");
    sc_train->add_option("--window", train_cfg.input_length, "input window length");
    sc_train->add_option("--stride", train_cfg.stride, "window stride");
    sc_train->add_option("--epochs", train_cfg.epochs, "training epochs");
    sc_train->add_option("--batch-size", train_cfg.batch_size, "minibatch size");
    sc_train->add_option("--lr", train_cfg.lr, "learning rate");
    sc_train->add_option("--partitions", train_cfg.partitions, "FGDM partitions");
    sc_train->add_option("--kernels", train_cfg.kernel_schedule, "kernel schedule");
    sc_train->add_option("--width", train_cfg.stage_width, "stage channel width");
    sc_train->add_option("--blocks", train_cfg.blocks, "FGDM blocks per stage");
    sc_train->add_option("--sigma", train_cfg.sigma, "Gaussian kernel sigma");
    sc_train->add_flag("!--no-standardize", train_cfg.standardize,
                       "skip per-channel standardization");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        // Config file values fill in anything not given as a flag.
        const json cfg = load_config(g.config_path);
        if (!cfg.empty()) {
            const CLI::App* sub = app.get_subcommands().front();
            JsonBinder binder(sub);
            binder.bind("seed", g.seed).bind("out_dir", g.out_dir).bind("threads", g.threads)
                  .bind("plot", g.plot);
            if (sub == sc_extract)
                binder.bind("input", ep_input).bind("header", ep_header)
                      .bind("synth_period", ep_period).bind("synth_length", ep_length)
                      .bind("topk", ep_k);
            else if (sub == sc_grad)
                binder.bind("scope", gc_scope).bind("tolerance", gc_tol)
                      .bind("inject_fault", gc_fault);
            else if (sub == sc_comp)
                binder.bind("periods", comp_cfg.periods).bind("steps", comp_cfg.steps)
                      .bind("lr", comp_cfg.lr).bind("sigma", comp_cfg.sigma)
                      .bind("kernel_size", comp_cfg.kernel_size).bind("length", comp_cfg.length);
            else if (sub == sc_abl)
                binder.bind("period", abl_cfg.task.period).bind("noise", abl_cfg.task.noise_std)
                      .bind("epochs", abl_cfg.epochs).bind("batch_size", abl_cfg.batch_size)
                      .bind("lr", abl_cfg.lr).bind("sigma", abl_cfg.sigma);
            else if (sub == sc_topk)
                binder.bind("k_min", topk_cfg.k_min).bind("k_max", topk_cfg.k_max)
                      .bind("epochs", topk_cfg.epochs).bind("lr", topk_cfg.lr)
                      .bind("sensitivity_bound", topk_cfg.sensitivity_bound);
            else if (sub == sc_route)
                binder.bind("epochs", route_cfg.epochs).bind("lr", route_cfg.lr)
                      .bind("quantile_r", route_cfg.quantile_r)
                      .bind("anomalies", route_cfg.anomaly_count);
            else if (sub == sc_cost)
                binder.bind("channels", cm_channels).bind("length", cm_length)
                      .bind("partitions", cm_partitions).bind("kernels", cm_kernels);
            else if (sub == sc_train)
                binder.bind("input", train_cfg.csv_path).bind("header", train_cfg.csv_header)
                      .bind("task", train_task).bind("horizon", train_cfg.horizon)
                      .bind("window", train_cfg.input_length).bind("stride", train_cfg.stride)
                      .bind("epochs", train_cfg.epochs).bind("batch_size", train_cfg.batch_size)
                      .bind("lr", train_cfg.lr).bind("partitions", train_cfg.partitions)
                      .bind("kernels", train_cfg.kernel_schedule)
                      .bind("width", train_cfg.stage_width).bind("blocks", train_cfg.blocks)
                      .bind("sigma", train_cfg.sigma)
                      .bind("standardize", train_cfg.standardize);
            binder.apply(cfg);
        }

        if (sc_extract->parsed())
            return cmd_extract_periods(g, ep_input, ep_header, ep_period, ep_length, ep_k);
        if (sc_grad->parsed()) return cmd_gradcheck(g, gc_scope, gc_tol, gc_fault);
        if (sc_comp->parsed()) return cmd_compensation_bench(g, comp_cfg);
        if (sc_abl->parsed()) return cmd_ablation(g, abl_cfg);
        if (sc_topk->parsed()) return cmd_topk_sweep(g, topk_cfg);
        if (sc_route->parsed()) return cmd_routing_ablation(g, route_cfg);
        if (sc_cost->parsed())
            return cmd_cost_model(g, cm_channels, cm_length, cm_partitions, cm_kernels);
        if (sc_train->parsed()) return cmd_train(g, train_cfg, train_task);
        throw anchor::ConfigError("no subcommand given");
    } catch (const anchor::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
