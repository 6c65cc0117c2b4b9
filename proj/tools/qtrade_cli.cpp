// qtrade: simulate, calibrate, train, backtest, study and report from one
// JSON-configured entry point. Exit codes: 0 ok, 2 configuration error,
// 3 data error, 4 anything else.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qtrade/agent.hpp"
#include "qtrade/backtest.hpp"
#include "qtrade/config.hpp"
#include "qtrade/data_io.hpp"
#include "qtrade/errors.hpp"
#include "qtrade/features.hpp"
#include "qtrade/io_format.hpp"
#include "qtrade/metrics.hpp"
#include "qtrade/net.hpp"
#include "qtrade/sim.hpp"

namespace {

using nlohmann::json;
using namespace qtrade;

// Stream-id namespaces shared with the library (training-path streams live
// in backtest.cpp; these are CLI-level).
constexpr std::uint64_t kSimulatePathStream = 0x53500000ULL; // simulate outputs
constexpr std::uint64_t kEvalPanelStream = 0x45500000ULL;    // backtest eval path

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "JSON config file (or a manifest)");
    cmd->add_option("--set", args.overrides,
                    "Override a config entry, e.g. --set train.gamma=0.9");
    cmd->add_option("--seed", args.seed, "Override the master seed");
    cmd->add_option("--out", args.out_dir, "Override the output directory");
    cmd->add_option("--jobs", args.jobs, "Worker threads for independent study cells");
}

RunConfig resolve_config(const CommonArgs& args) {
    json doc = json::object();
    if (!args.config_path.empty()) {
        std::ifstream is(args.config_path);
        if (!is) throw ConfigError("cannot open config file: " + args.config_path);
        try {
            is >> doc;
        } catch (const json::exception& e) {
            throw ConfigError(args.config_path + ": invalid JSON: " + std::string(e.what()));
        }
        if (doc.is_object() && doc.contains("config") && doc.contains("command"))
            doc = doc.at("config");
    }
    for (const std::string& assignment : args.overrides) apply_override(doc, assignment);
    if (args.seed) doc["seed"] = *args.seed;
    if (args.out_dir) doc["out_dir"] = *args.out_dir;
    return parse_run_config(doc);
}

void write_manifest(const RunConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::uint64_t>& seeds_used) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = run_config_to_json(config);
    manifest["outputs"] = outputs;
    manifest["seeds_used"] = seeds_used;
    const std::string path = config.out_dir + "/manifest.json";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write manifest: " + path);
    os << manifest.dump(2) << '\n';
}

StatePanel panel_from_files(const RunConfig& config) {
    std::vector<ContractSeries> series;
    for (const DataFileSpec& f : config.data->files) {
        ContractSeries s = load_csv(f.path, f.symbol);
        s.asset_class = f.asset_class;
        for (const std::string& w : s.warnings) std::cerr << "warning: " << w << '\n';
        series.push_back(std::move(s));
    }
    const AlignedPanel aligned = align_panel(series, config.data->target);
    return build_state_panel(aligned.prices, aligned.target, config.features,
                             &aligned.dates);
}

// The single evaluation path used by simulator-sourced backtests.
StatePanel panel_from_simulator(const RunConfig& config) {
    const SimSource source = sim_source_from_config(*config.simulator);
    Rng rng = Rng::stream(config.seed, kEvalPanelStream);
    const PricePath path = simulate_source(source, config.simulator->n_steps, rng);
    StatePanel panel = build_state_panel({path.prices}, 0, config.features);
    if (panel.rows() < 2)
        throw ConfigError("simulated path too short for the feature warm-up; "
                          "increase simulator.n_steps");
    return panel;
}

int cmd_simulate(const CommonArgs& args) {
    const RunConfig config = resolve_config(args);
    if (!config.simulator)
        throw ConfigError("simulate needs a 'simulator' section");
    const SimSource source = sim_source_from_config(*config.simulator);

    std::filesystem::create_directories(config.out_dir);
    std::vector<std::string> outputs;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < config.simulator->n_paths; ++i) {
        const std::uint64_t seed = Rng::derive_seed(config.seed, kSimulatePathStream + i);
        Rng rng(seed);
        const PricePath path = simulate_source(source, config.simulator->n_steps, rng);
        char name[32];
        std::snprintf(name, sizeof name, "path_%03zu.csv", i);
        const std::string file = config.out_dir + "/" + name;
        write_path_csv(file, path);
        outputs.push_back(file);
        seeds.push_back(seed);
    }
    write_manifest(config, "simulate", outputs, seeds);
    std::cout << "wrote " << outputs.size() << " path file(s) to " << config.out_dir
              << '\n';
    return 0;
}

int cmd_calibrate(const CommonArgs& args, const std::string& input,
                  const std::string& process) {
    const RunConfig config = resolve_config(args);
    if (input.empty()) throw ConfigError("calibrate needs --input <csv>");
    if (process != "gbm" && process != "vg")
        throw ConfigError("calibrate --process must be 'gbm' or 'vg'");

    // Accept either a simulated-path CSV or a date,price contract CSV.
    PricePath path;
    {
        std::ifstream probe(input);
        if (!probe) throw DataError("cannot open file: " + input);
        std::string header;
        std::getline(probe, header);
        if (header.rfind("date_index", 0) == 0) {
            path = read_path_csv(input);
        } else {
            const ContractSeries series = load_csv(input, "input");
            path.prices = series.prices;
        }
    }

    json out;
    out["input"] = input;
    out["process"] = process;
    if (process == "gbm") {
        const GbmParams p = calibrate_gbm(path);
        out["params"] = {{"mu", p.mu}, {"sigma", p.sigma}, {"s0", p.s0}};
    } else {
        const VgParams p = calibrate_vg(path);
        out["params"] = {{"mu", p.mu},
                         {"sigma", p.sigma},
                         {"theta", p.theta},
                         {"nu", p.nu},
                         {"s0", p.s0}};
    }
    std::filesystem::create_directories(config.out_dir);
    const std::string file = config.out_dir + "/calibration.json";
    std::ofstream os(file, std::ios::binary);
    if (!os) throw DataError("cannot write " + file);
    os << out.dump(2) << '\n';
    write_manifest(config, "calibrate", {file}, {});
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_train(const CommonArgs& args) {
    const RunConfig config = resolve_config(args);
    std::filesystem::create_directories(config.out_dir);

    FitResult fit;
    if (config.data) {
        const StatePanel panel = panel_from_files(config);
        if (panel.rows() < config.plan.train_window)
            throw ConfigError("panel shorter than walk_forward.train_window");
        const StatePanel train_panel = slice_panel(panel, 0, config.plan.train_window);
        const TrainConfig seg_config = segment_train_config(config.train, 0);
        DqnAgent agent(MlpSpec{panel.state_dim, config.hidden, 3, 1}, seg_config);
        const StatePanel* panels[] = {&train_panel};
        fit = agent.fit(panels, config.costs);
    } else if (config.simulator) {
        const SimSource source = sim_source_from_config(*config.simulator);
        fit = fit_on_simulated_paths(source, config.simulator->n_paths, config.train,
                                     config.features, config.costs);
    } else {
        throw ConfigError("train needs a 'data' or 'simulator' section");
    }

    const std::string ckpt = config.out_dir + "/checkpoint.bin";
    save_params(fit.params, ckpt);
    const std::string log = config.out_dir + "/training_log.csv";
    write_training_log(log, fit.log);
    write_manifest(config, "train", {ckpt, log}, {config.seed});
    std::cout << "trained " << fit.steps << " steps; checkpoint at " << ckpt << '\n';
    return 0;
}

int cmd_backtest(const CommonArgs& args) {
    const RunConfig config = resolve_config(args);
    std::filesystem::create_directories(config.out_dir);

    ExperimentResult result;
    if (config.data) {
        const StatePanel panel = panel_from_files(config);
        if (config.checkpoint) {
            const NetParams params = load_params(*config.checkpoint);
            result = run_fixed_model(panel, params, config.costs,
                                     config.plan.train_window);
        } else {
            result = run_walk_forward(panel, config.plan, config.train, config.costs);
        }
    } else if (config.simulator) {
        const StatePanel panel = panel_from_simulator(config);
        if (config.checkpoint) {
            const NetParams params = load_params(*config.checkpoint);
            result = run_fixed_model(panel, params, config.costs, 0);
        } else {
            const SimSource source = sim_source_from_config(*config.simulator);
            result = run_simulated_training(source, config.simulator->n_paths,
                                            config.train, config.features,
                                            config.costs, panel);
        }
    } else {
        throw ConfigError("backtest needs a 'data' or 'simulator' section");
    }

    std::vector<std::string> outputs = write_reports(result, config.out_dir);
    if (!result.checkpoints.empty()) {
        const std::string ckpt = config.out_dir + "/checkpoint.bin";
        save_params(result.checkpoints.back().params, ckpt);
        outputs.push_back(ckpt);
    }
    write_manifest(config, "backtest", outputs, {config.seed});
    std::cout << format_metrics_table(
        {"net", "gross", "benchmark"},
        {result.net_metrics, result.gross_metrics, result.benchmark_metrics});
    return 0;
}

int cmd_study(const CommonArgs& args) {
    const RunConfig config = resolve_config(args);
    if (!config.simulator)
        throw ConfigError("study needs a 'simulator' section (its process kind seeds "
                          "the per-regime sources)");
    std::filesystem::create_directories(config.out_dir);

    struct Cell {
        std::string regime;
        std::size_t n_paths;
        HistogramStudyResult result;
        std::string error;
    };
    std::vector<Cell> cells;
    for (const std::string& regime : config.study.regimes)
        for (std::size_t n : config.study.n_paths_grid) cells.push_back({regime, n, {}, {}});

    // Cells are independent; fan out over worker threads deterministically
    // (each cell's randomness depends only on its own derived seeds).
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            Cell& cell = cells[i];
            try {
                SimulatorConfig sim = *config.simulator;
                sim.regime = cell.regime;
                const SimSource source = sim_source_from_config(sim);
                TrainConfig train = config.train;
                train.seed = Rng::derive_seed(config.seed, 0x43454c00ULL + i);
                cell.result = sharpe_histogram_study(
                    source, cell.n_paths, config.study.n_eval, config.study.eval_steps,
                    train, config.features, config.costs, config.seed);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };
    const unsigned n_workers =
        std::max(1u, std::min<unsigned>(args.jobs, unsigned(cells.size())));
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < n_workers; ++w) threads.emplace_back(worker);
    worker();
    for (std::thread& t : threads) t.join();

    for (const Cell& cell : cells)
        if (!cell.error.empty())
            throw std::runtime_error("study cell " + cell.regime + "/" +
                                     std::to_string(cell.n_paths) + " failed: " +
                                     cell.error);

    std::vector<std::string> outputs;
    const std::string summary_path = config.out_dir + "/study_summary.csv";
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) throw DataError("cannot write " + summary_path);
    summary << "regime,n_train_paths,n_eval_paths,agent_mean_sharpe,"
               "benchmark_mean_sharpe\n";
    for (const Cell& cell : cells) {
        const std::string file = config.out_dir + "/study_" + cell.regime + "_" +
                                 std::to_string(cell.n_paths) + ".csv";
        write_histogram_csv(file, cell.result);
        outputs.push_back(file);
        summary << cell.regime << ',' << cell.n_paths << ',' << config.study.n_eval
                << ',' << fmt_num(cell.result.agent_mean) << ','
                << fmt_num(cell.result.benchmark_mean) << '\n';
    }
    summary.close();
    outputs.push_back(summary_path);
    write_manifest(config, "study", outputs, {config.seed});
    std::cout << "study wrote " << outputs.size() << " file(s) to " << config.out_dir
              << '\n';
    return 0;
}

int cmd_report(const CommonArgs& args, const std::string& from_dir) {
    const std::string dir = from_dir.empty()
                                ? resolve_config(args).out_dir
                                : from_dir;
    const std::vector<MetricsCsvRow> rows = read_metrics_csv(dir + "/metrics.csv");
    std::vector<std::string> names;
    std::vector<MetricsReport> reports;
    for (const MetricsCsvRow& row : rows) {
        names.push_back(row.model + "/" + row.variant);
        reports.push_back(row.report);
    }
    std::cout << format_metrics_table(names, reports);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Futures-trading DQN research toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string calibrate_input, calibrate_process = "gbm", report_from;

    CLI::App* simulate = app.add_subcommand("simulate", "Write simulated price paths");
    add_common(simulate, args);
    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Fit process parameters to a price CSV");
    add_common(calibrate, args);
    calibrate->add_option("--input", calibrate_input, "Price CSV to calibrate against");
    calibrate->add_option("--process", calibrate_process, "gbm or vg");
    CLI::App* train = app.add_subcommand("train", "Train one agent and save a checkpoint");
    add_common(train, args);
    CLI::App* backtest = app.add_subcommand("backtest", "Walk-forward or fixed-model run");
    add_common(backtest, args);
    CLI::App* study = app.add_subcommand("study", "Sharpe-histogram study across cells");
    add_common(study, args);
    CLI::App* report = app.add_subcommand("report", "Render metrics.csv as a table");
    add_common(report, args);
    report->add_option("--from", report_from, "Report directory (defaults to out_dir)");

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(args);
        if (calibrate->parsed()) return cmd_calibrate(args, calibrate_input, calibrate_process);
        if (train->parsed()) return cmd_train(args);
        if (backtest->parsed()) return cmd_backtest(args);
        if (study->parsed()) return cmd_study(args);
        if (report->parsed()) return cmd_report(args, report_from);
        return 4;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
