#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qtrade/agent.hpp"
#include "qtrade/backtest.hpp"
#include "qtrade/data_io.hpp"
#include "qtrade/features.hpp"
#include "qtrade/sim.hpp"
#include "qtrade/trade_env.hpp"

namespace qtrade {

struct DataFileSpec {
    std::string path;
    std::string symbol;
    AssetClass asset_class = AssetClass::EquityIndex;
};

struct DataConfig {
    std::vector<DataFileSpec> files;
    std::string target;
};

// Single-regime preset ("up"/"no"/"down", optionally overridden field by
// field) or the 3-state switching model ("switch").
struct SimulatorConfig {
    std::string process = "gbm"; // "gbm" | "vg"
    std::string regime = "no";   // "up" | "no" | "down" | "switch"
    nlohmann::json param_overrides = nlohmann::json::object();
    std::size_t n_steps = 1260;
    std::size_t n_paths = 1;
};

struct StudyConfig {
    std::vector<std::string> regimes{"up", "no", "down"};
    std::vector<std::size_t> n_paths_grid{1, 50, 90};
    std::size_t n_eval = 100;
    std::size_t eval_steps = 1260;
};

// Full resolved run configuration. Exactly one of `data` / `simulator`
// may be present; commands that need a source enforce that.
struct RunConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    std::optional<DataConfig> data;
    std::optional<SimulatorConfig> simulator;
    FeatureConfig features;
    CostModel costs;
    TrainConfig train; // train.seed mirrors the top-level seed
    WalkForwardPlan plan;
    StudyConfig study;
    std::array<std::size_t, 2> hidden{64, 64};
    std::optional<std::string> checkpoint;
};

// Strict parse: unknown keys anywhere are ConfigErrors naming the key path.
RunConfig parse_run_config(const nlohmann::json& j);

// Resolved echo with every default materialized (manifest payload).
nlohmann::json run_config_to_json(const RunConfig& config);

// Reads a config file, or a manifest (unwraps its "config" object).
RunConfig load_run_config_file(const std::string& path);

// The simulator section as a backtest source; validates regime/process.
SimSource sim_source_from_config(const SimulatorConfig& sim);

// Apply `--set section.key=value` (value parsed as JSON when possible,
// else taken as a string) onto a raw config document.
void apply_override(nlohmann::json& doc, const std::string& assignment);

} // namespace qtrade
