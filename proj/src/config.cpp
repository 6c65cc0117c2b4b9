#include "qtrade/config.hpp"

#include <filesystem>
#include <fstream>

#include "qtrade/errors.hpp"

namespace qtrade {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) bad(where, "expected an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) bad(where, "unknown key '" + item.key() + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad(where + "." + key, e.what());
    }
}

double get_number(const json& j, const char* key, double fallback,
                  const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) bad(where + "." + key, "expected a number");
    return j.at(key).get<double>();
}

std::size_t get_size(const json& j, const char* key, std::size_t fallback,
                     const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        bad(where + "." + key, "expected a non-negative integer");
    return v.get<std::size_t>();
}

DataConfig parse_data(const json& j) {
    check_keys(j, "data", {"files", "target"});
    DataConfig out;
    if (!j.contains("files") || !j.at("files").is_array() || j.at("files").empty())
        bad("data.files", "expected a non-empty array");
    for (std::size_t i = 0; i < j.at("files").size(); ++i) {
        const json& f = j.at("files")[i];
        const std::string where = "data.files[" + std::to_string(i) + "]";
        check_keys(f, where, {"path", "symbol", "asset_class"});
        DataFileSpec spec;
        if (!f.contains("path") || !f.contains("symbol"))
            bad(where, "needs 'path' and 'symbol'");
        spec.path = f.at("path").get<std::string>();
        spec.symbol = f.at("symbol").get<std::string>();
        if (f.contains("asset_class"))
            spec.asset_class = asset_class_from_string(f.at("asset_class").get<std::string>());
        if (!std::filesystem::exists(spec.path))
            bad(where + ".path", "file does not exist: " + spec.path);
        out.files.push_back(std::move(spec));
    }
    out.target = get_or<std::string>(j, "target", out.files.front().symbol, "data");
    return out;
}

SimulatorConfig parse_simulator(const json& j) {
    check_keys(j, "simulator", {"process", "regime", "params", "n_steps", "n_paths"});
    SimulatorConfig out;
    out.process = get_or<std::string>(j, "process", out.process, "simulator");
    if (out.process != "gbm" && out.process != "vg")
        bad("simulator.process", "must be 'gbm' or 'vg'");
    out.regime = get_or<std::string>(j, "regime", out.regime, "simulator");
    if (out.regime != "up" && out.regime != "no" && out.regime != "down" &&
        out.regime != "switch")
        bad("simulator.regime", "must be one of up, no, down, switch");
    if (j.contains("params")) {
        check_keys(j.at("params"), "simulator.params", {"mu", "sigma", "theta", "nu", "s0"});
        if (out.regime == "switch")
            bad("simulator.params", "parameter overrides require a single regime");
        out.param_overrides = j.at("params");
    }
    out.n_steps = get_size(j, "n_steps", out.n_steps, "simulator");
    out.n_paths = get_size(j, "n_paths", out.n_paths, "simulator");
    if (out.n_steps < 2) bad("simulator.n_steps", "need at least 2 steps");
    if (out.n_paths == 0) bad("simulator.n_paths", "need at least 1 path");
    return out;
}

FeatureConfig parse_features(const json& j, FeatureConfig out) {
    check_keys(j, "features", {"horizons", "vol_span", "lookback", "vol_floor"});
    if (j.contains("horizons")) {
        out.horizons.clear();
        for (const json& h : j.at("horizons")) {
            if (!h.is_number_integer()) bad("features.horizons", "expected integers");
            out.horizons.push_back(h.get<int>());
        }
    }
    out.vol_span = int(get_size(j, "vol_span", std::size_t(out.vol_span), "features"));
    out.lookback = int(get_size(j, "lookback", std::size_t(out.lookback), "features"));
    out.vol_floor = get_number(j, "vol_floor", out.vol_floor, "features");
    out.validate();
    return out;
}

CostModel parse_costs(const json& j, CostModel out) {
    check_keys(j, "costs", {"proportional", "fixed"});
    out.proportional = get_number(j, "proportional", out.proportional, "costs");
    out.fixed = get_number(j, "fixed", out.fixed, "costs");
    out.validate();
    return out;
}

TrainConfig parse_train(const json& j, TrainConfig out) {
    check_keys(j, "train",
               {"learning_rate", "gamma", "batch_size", "buffer_size",
                "exploration_fraction", "exploration_final_eps", "learning_starts",
                "target_network_update_freq", "prioritized_replay", "priority_alpha",
                "priority_beta0", "priority_eps", "total_timesteps", "train_freq",
                "double_q"});
    out.learning_rate = get_number(j, "learning_rate", out.learning_rate, "train");
    out.gamma = get_number(j, "gamma", out.gamma, "train");
    out.batch_size = get_size(j, "batch_size", out.batch_size, "train");
    out.buffer_size = get_size(j, "buffer_size", out.buffer_size, "train");
    out.exploration_fraction =
        get_number(j, "exploration_fraction", out.exploration_fraction, "train");
    out.exploration_final_eps =
        get_number(j, "exploration_final_eps", out.exploration_final_eps, "train");
    out.learning_starts = get_size(j, "learning_starts", out.learning_starts, "train");
    out.target_network_update_freq = get_size(j, "target_network_update_freq",
                                              out.target_network_update_freq, "train");
    out.prioritized_replay =
        get_or<bool>(j, "prioritized_replay", out.prioritized_replay, "train");
    out.priority_alpha = get_number(j, "priority_alpha", out.priority_alpha, "train");
    out.priority_beta0 = get_number(j, "priority_beta0", out.priority_beta0, "train");
    out.priority_eps = get_number(j, "priority_eps", out.priority_eps, "train");
    if (j.contains("total_timesteps") && !j.at("total_timesteps").is_null())
        out.total_timesteps = get_size(j, "total_timesteps", 0, "train");
    out.train_freq = get_size(j, "train_freq", out.train_freq, "train");
    out.double_q = get_or<bool>(j, "double_q", out.double_q, "train");
    out.validate();
    return out;
}

WalkForwardPlan parse_plan(const json& j, WalkForwardPlan out) {
    check_keys(j, "walk_forward",
               {"mode", "train_window", "test_window", "retrain_every", "warm_start"});
    if (j.contains("mode")) {
        const std::string mode = j.at("mode").get<std::string>();
        if (mode == "rolling_fixed") out.mode = WalkForwardMode::RollingFixed;
        else if (mode == "expanding") out.mode = WalkForwardMode::Expanding;
        else bad("walk_forward.mode", "must be 'rolling_fixed' or 'expanding'");
    }
    out.train_window = get_size(j, "train_window", out.train_window, "walk_forward");
    out.test_window = get_size(j, "test_window", out.test_window, "walk_forward");
    out.retrain_every = get_size(j, "retrain_every", out.retrain_every, "walk_forward");
    out.warm_start = get_or<bool>(j, "warm_start", out.warm_start, "walk_forward");
    out.validate();
    return out;
}

StudyConfig parse_study(const json& j, StudyConfig out) {
    check_keys(j, "study", {"regimes", "n_paths_grid", "n_eval", "eval_steps"});
    if (j.contains("regimes")) {
        out.regimes.clear();
        for (const json& r : j.at("regimes")) {
            const std::string name = r.get<std::string>();
            if (name != "up" && name != "no" && name != "down" && name != "switch")
                bad("study.regimes", "unknown regime '" + name + "'");
            out.regimes.push_back(name);
        }
        if (out.regimes.empty()) bad("study.regimes", "must not be empty");
    }
    if (j.contains("n_paths_grid")) {
        out.n_paths_grid.clear();
        for (const json& n : j.at("n_paths_grid")) {
            if (!n.is_number_integer() || n.get<long long>() <= 0)
                bad("study.n_paths_grid", "expected positive integers");
            out.n_paths_grid.push_back(n.get<std::size_t>());
        }
        if (out.n_paths_grid.empty()) bad("study.n_paths_grid", "must not be empty");
    }
    out.n_eval = get_size(j, "n_eval", out.n_eval, "study");
    out.eval_steps = get_size(j, "eval_steps", out.eval_steps, "study");
    if (out.n_eval == 0) bad("study.n_eval", "need at least 1 evaluation path");
    return out;
}

} // namespace

RunConfig parse_run_config(const json& j) {
    check_keys(j, "config",
               {"seed", "out_dir", "data", "simulator", "features", "costs", "train",
                "walk_forward", "study", "net", "checkpoint"});
    RunConfig out;
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_integer() || s.get<long long>() < 0)
            bad("seed", "expected a non-negative integer");
        out.seed = s.get<std::uint64_t>();
    }
    out.out_dir = get_or<std::string>(j, "out_dir", out.out_dir, "config");
    if (j.contains("data")) out.data = parse_data(j.at("data"));
    if (j.contains("simulator")) out.simulator = parse_simulator(j.at("simulator"));
    if (out.data && out.simulator)
        bad("config", "give either 'data' or 'simulator', not both");
    if (j.contains("features")) out.features = parse_features(j.at("features"), out.features);
    if (j.contains("costs")) out.costs = parse_costs(j.at("costs"), out.costs);
    if (j.contains("train")) out.train = parse_train(j.at("train"), out.train);
    if (j.contains("walk_forward")) out.plan = parse_plan(j.at("walk_forward"), out.plan);
    if (j.contains("study")) out.study = parse_study(j.at("study"), out.study);
    if (j.contains("net")) {
        check_keys(j.at("net"), "net", {"hidden"});
        if (j.at("net").contains("hidden")) {
            const json& h = j.at("net").at("hidden");
            if (!h.is_array() || h.size() != 2)
                bad("net.hidden", "expected an array of two widths");
            out.hidden[0] = h[0].get<std::size_t>();
            out.hidden[1] = h[1].get<std::size_t>();
            if (out.hidden[0] == 0 || out.hidden[1] == 0)
                bad("net.hidden", "widths must be positive");
        }
    }
    if (j.contains("checkpoint")) {
        out.checkpoint = j.at("checkpoint").get<std::string>();
        if (!std::filesystem::exists(*out.checkpoint))
            bad("checkpoint", "file does not exist: " + *out.checkpoint);
    }
    out.train.seed = out.seed;
    out.train.hidden = out.hidden;
    return out;
}

json run_config_to_json(const RunConfig& config) {
    json j;
    j["seed"] = config.seed;
    j["out_dir"] = config.out_dir;
    if (config.data) {
        json files = json::array();
        for (const DataFileSpec& f : config.data->files)
            files.push_back({{"path", f.path},
                             {"symbol", f.symbol},
                             {"asset_class", to_string(f.asset_class)}});
        j["data"] = {{"files", files}, {"target", config.data->target}};
    }
    if (config.simulator) {
        json sim = {{"process", config.simulator->process},
                    {"regime", config.simulator->regime},
                    {"n_steps", config.simulator->n_steps},
                    {"n_paths", config.simulator->n_paths}};
        if (!config.simulator->param_overrides.empty())
            sim["params"] = config.simulator->param_overrides;
        j["simulator"] = sim;
    }
    j["features"] = {{"horizons", config.features.horizons},
                     {"vol_span", config.features.vol_span},
                     {"lookback", config.features.lookback},
                     {"vol_floor", config.features.vol_floor}};
    j["costs"] = {{"proportional", config.costs.proportional},
                  {"fixed", config.costs.fixed}};
    json train = {{"learning_rate", config.train.learning_rate},
                  {"gamma", config.train.gamma},
                  {"batch_size", config.train.batch_size},
                  {"buffer_size", config.train.buffer_size},
                  {"exploration_fraction", config.train.exploration_fraction},
                  {"exploration_final_eps", config.train.exploration_final_eps},
                  {"learning_starts", config.train.learning_starts},
                  {"target_network_update_freq", config.train.target_network_update_freq},
                  {"prioritized_replay", config.train.prioritized_replay},
                  {"priority_alpha", config.train.priority_alpha},
                  {"priority_beta0", config.train.priority_beta0},
                  {"priority_eps", config.train.priority_eps},
                  {"train_freq", config.train.train_freq},
                  {"double_q", config.train.double_q}};
    if (config.train.total_timesteps) train["total_timesteps"] = *config.train.total_timesteps;
    else train["total_timesteps"] = nullptr;
    j["train"] = train;
    j["walk_forward"] = {
        {"mode", config.plan.mode == WalkForwardMode::RollingFixed ? "rolling_fixed"
                                                                   : "expanding"},
        {"train_window", config.plan.train_window},
        {"test_window", config.plan.test_window},
        {"retrain_every", config.plan.retrain_every},
        {"warm_start", config.plan.warm_start}};
    j["study"] = {{"regimes", config.study.regimes},
                  {"n_paths_grid", config.study.n_paths_grid},
                  {"n_eval", config.study.n_eval},
                  {"eval_steps", config.study.eval_steps}};
    j["net"] = {{"hidden", {config.hidden[0], config.hidden[1]}}};
    if (config.checkpoint) j["checkpoint"] = *config.checkpoint;
    return j;
}

RunConfig load_run_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    // A manifest wraps the resolved config under "config".
    if (j.is_object() && j.contains("config") && j.contains("command"))
        return parse_run_config(j.at("config"));
    return parse_run_config(j);
}

SimSource sim_source_from_config(const SimulatorConfig& sim) {
    const bool use_vg = sim.process == "vg";
    SimSource source;
    source.train_steps = sim.n_steps;
    if (sim.regime == "switch") {
        source.model = regime_model_preset(use_vg);
        return source;
    }
    Regime regime = Regime::No;
    if (sim.regime == "up") regime = Regime::Up;
    else if (sim.regime == "down") regime = Regime::Down;

    const nlohmann::json& ov = sim.param_overrides;
    auto num = [&ov](const char* key, double fallback) {
        if (!ov.contains(key)) return fallback;
        if (!ov.at(key).is_number())
            throw ConfigError(std::string("simulator.params.") + key + ": expected a number");
        return ov.at(key).get<double>();
    };
    if (use_vg) {
        VgParams params = vg_preset(regime);
        params.mu = num("mu", params.mu);
        params.sigma = num("sigma", params.sigma);
        params.theta = num("theta", params.theta);
        params.nu = num("nu", params.nu);
        params.s0 = num("s0", params.s0);
        params.validate();
        source.model = ProcessParams(params);
    } else {
        if (ov.contains("theta") || ov.contains("nu"))
            throw ConfigError("simulator.params: theta/nu apply to the vg process only");
        GbmParams params = gbm_preset(regime);
        params.mu = num("mu", params.mu);
        params.sigma = num("sigma", params.sigma);
        params.s0 = num("s0", params.s0);
        params.validate();
        source.model = ProcessParams(params);
    }
    return source;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    const std::string key_path = assignment.substr(0, eq);
    const std::string value_str = assignment.substr(eq + 1);

    json value = json::parse(value_str, nullptr, false);
    if (value.is_discarded()) value = value_str; // plain string

    json* node = &doc;
    std::size_t begin = 0;
    while (true) {
        const std::size_t dot = key_path.find('.', begin);
        const std::string part = key_path.substr(begin, dot - begin);
        if (part.empty())
            throw ConfigError("--set key path has an empty segment: '" + key_path + "'");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        if (!node->is_object() && !node->is_null())
            throw ConfigError("--set cannot descend into non-object '" + part + "'");
        begin = dot + 1;
    }
}

} // namespace qtrade
