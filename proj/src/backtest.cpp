#include "qtrade/backtest.hpp"

#include <algorithm>
#include <cmath>

#include "qtrade/errors.hpp"

namespace qtrade {

namespace {

// Stream-id namespaces (master seed = TrainConfig::seed unless noted).
constexpr std::uint64_t kSegmentSeedStream = 0x73656700ULL;  // per-segment train seeds
constexpr std::uint64_t kTrainPathStream = 0x54500000ULL;    // simulated training paths
constexpr std::uint64_t kEvalPathStream = 0x45500000ULL;     // study evaluation paths

struct EvalAccumulator {
    ExperimentResult* out;
    int position = 0;

    void act(const StatePanel& panel, const QNet& net, std::size_t row,
             const CostModel& costs) {
        const int action = act_greedy(net, panel.state(row));
        const double gross = action * panel.target_returns[row];
        const double turnover = std::abs(action - position);
        const double cost =
            costs.proportional * turnover + (action != position ? costs.fixed : 0.0);
        out->dates.push_back(panel.dates[row]);
        out->gross_returns.push_back(gross);
        out->net_returns.push_back(gross - cost);
        out->benchmark_returns.push_back(panel.target_returns[row]);
        out->positions.push_back(action);
        out->costs.push_back(cost);
        position = action;
    }
};

void finalize_metrics(ExperimentResult& result) {
    result.net_metrics = compute_metrics(result.net_returns);
    result.gross_metrics = compute_metrics(result.gross_returns);
    result.benchmark_metrics = compute_metrics(result.benchmark_returns);
}

MlpSpec spec_for(const StatePanel& panel, const TrainConfig& train) {
    MlpSpec spec;
    spec.input_dim = panel.state_dim;
    spec.hidden = train.hidden;
    return spec;
}

// Sharpe for study aggregation: 0 when the ratio is undefined (flat series).
double sharpe_or_zero(std::span<const double> returns) {
    const MetricsReport rep = compute_metrics(returns);
    return rep.sharpe.value_or(0.0);
}

} // namespace

TrainConfig segment_train_config(const TrainConfig& base, std::size_t segment) {
    TrainConfig out = base;
    out.seed = Rng::derive_seed(base.seed, kSegmentSeedStream + segment);
    return out;
}

void WalkForwardPlan::validate() const {
    if (train_window == 0) throw ConfigError("walk-forward train_window must be positive");
    if (mode == WalkForwardMode::RollingFixed && test_window == 0)
        throw ConfigError("walk-forward test_window must be positive");
    if (mode == WalkForwardMode::Expanding && retrain_every == 0)
        throw ConfigError("walk-forward retrain_every must be positive");
}

std::vector<double> benchmark_long_only(const StatePanel& panel) {
    return panel.target_returns;
}

ExperimentResult run_walk_forward(const StatePanel& panel, const WalkForwardPlan& plan,
                                  const TrainConfig& train, const CostModel& costs) {
    plan.validate();
    train.validate();
    const std::size_t rows = panel.rows();
    if (rows < plan.train_window + 2)
        throw ConfigError("walk-forward: panel has " + std::to_string(rows) +
                          " usable rows; need at least train_window + 2 = " +
                          std::to_string(plan.train_window + 2));

    ExperimentResult result;
    EvalAccumulator eval{&result};

    const std::size_t block = plan.mode == WalkForwardMode::RollingFixed
                                  ? plan.test_window
                                  : plan.retrain_every;
    NetParams carried;
    bool have_carried = false;
    std::size_t segment = 0;
    for (std::size_t cutoff = plan.train_window; cutoff < rows;
         cutoff += block, ++segment) {
        const std::size_t test_end = std::min(rows, cutoff + block);
        const std::size_t train_begin = plan.mode == WalkForwardMode::RollingFixed
                                            ? cutoff - plan.train_window
                                            : 0;
        // Training sees rows [train_begin, cutoff): every reward and state in
        // that slice is built from prices strictly before the first test day's
        // close, so nothing out of sample leaks into the fit.
        StatePanel train_panel = slice_panel(panel, train_begin, cutoff);

        const TrainConfig seg_config = segment_train_config(train, segment);

        const StatePanel* panels[] = {&train_panel};
        FitResult fit;
        if (plan.warm_start && have_carried) {
            DqnAgent agent(carried, seg_config);
            fit = agent.fit(panels, costs);
        } else {
            DqnAgent agent(spec_for(panel, seg_config), seg_config);
            fit = agent.fit(panels, costs);
        }
        carried = fit.params;
        have_carried = true;

        for (std::size_t r = cutoff; r < test_end; ++r)
            eval.act(panel, fit.params.online, r, costs);

        result.checkpoints.push_back(
            {cutoff, train_begin, cutoff, std::move(fit.params)});
    }

    finalize_metrics(result);
    return result;
}

ExperimentResult run_fixed_model(const StatePanel& panel, const NetParams& params,
                                 const CostModel& costs, std::size_t start_row) {
    if (panel.state_dim != params.spec.input_dim)
        throw ConfigError("run_fixed_model: panel state dimension " +
                          std::to_string(panel.state_dim) +
                          " does not match network input " +
                          std::to_string(params.spec.input_dim));
    if (start_row + 2 > panel.rows())
        throw ConfigError("run_fixed_model: fewer than two evaluation rows");
    ExperimentResult result;
    EvalAccumulator eval{&result};
    for (std::size_t r = start_row; r < panel.rows(); ++r)
        eval.act(panel, params.online, r, costs);
    finalize_metrics(result);
    return result;
}

PricePath simulate_source(const SimSource& source, std::size_t n_steps, Rng& rng) {
    return std::visit(
        [&](const auto& model) {
            if constexpr (std::is_same_v<std::decay_t<decltype(model)>, RegimeModel>)
                return regime_path(model, n_steps, source.dt, rng);
            else
                return process_path(model, n_steps, source.dt, rng);
        },
        source.model);
}

FitResult fit_on_simulated_paths(const SimSource& source, std::size_t n_paths,
                                 const TrainConfig& train,
                                 const FeatureConfig& features,
                                 const CostModel& costs) {
    if (n_paths == 0) throw ConfigError("simulated training needs at least one path");
    std::vector<StatePanel> panels;
    panels.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        Rng rng = Rng::stream(train.seed, kTrainPathStream + i);
        const PricePath path = simulate_source(source, source.train_steps, rng);
        StatePanel panel = build_state_panel({path.prices}, 0, features);
        if (panel.rows() < 2)
            throw ConfigError("simulated training paths are too short for the "
                              "feature warm-up; increase train_steps");
        panels.push_back(std::move(panel));
    }
    std::vector<const StatePanel*> ptrs;
    ptrs.reserve(panels.size());
    for (const StatePanel& p : panels) ptrs.push_back(&p);

    DqnAgent agent(spec_for(panels.front(), train), train);
    return agent.fit(ptrs, costs);
}

ExperimentResult run_simulated_training(const SimSource& source, std::size_t n_paths,
                                        const TrainConfig& train,
                                        const FeatureConfig& features,
                                        const CostModel& costs,
                                        const StatePanel& eval_panel) {
    FitResult fit = fit_on_simulated_paths(source, n_paths, train, features, costs);
    ExperimentResult result = run_fixed_model(eval_panel, fit.params, costs, 0);
    result.checkpoints.push_back({0, 0, 0, std::move(fit.params)});
    return result;
}

HistogramStudyResult sharpe_histogram_study(const SimSource& source, std::size_t n_paths,
                                            std::size_t n_eval, std::size_t eval_steps,
                                            const TrainConfig& train,
                                            const FeatureConfig& features,
                                            const CostModel& costs,
                                            std::uint64_t eval_seed_base) {
    if (n_eval == 0) throw ConfigError("study needs at least one evaluation path");
    FitResult fit = fit_on_simulated_paths(source, n_paths, train, features, costs);

    HistogramStudyResult out;
    out.n_train_paths = n_paths;
    out.n_eval_paths = n_eval;
    out.agent_sharpes.reserve(n_eval);
    out.benchmark_sharpes.reserve(n_eval);
    for (std::size_t k = 0; k < n_eval; ++k) {
        Rng rng = Rng::stream(eval_seed_base, kEvalPathStream + k);
        const PricePath path = simulate_source(source, eval_steps, rng);
        const StatePanel panel = build_state_panel({path.prices}, 0, features);
        if (panel.rows() < 2)
            throw ConfigError("evaluation paths are too short for the feature "
                              "warm-up; increase eval_steps");
        const ExperimentResult res = run_fixed_model(panel, fit.params, costs, 0);
        out.agent_sharpes.push_back(sharpe_or_zero(res.net_returns));
        out.benchmark_sharpes.push_back(sharpe_or_zero(res.benchmark_returns));
    }
    double sa = 0.0, sb = 0.0;
    for (std::size_t k = 0; k < n_eval; ++k) {
        sa += out.agent_sharpes[k];
        sb += out.benchmark_sharpes[k];
    }
    out.agent_mean = sa / double(n_eval);
    out.benchmark_mean = sb / double(n_eval);
    return out;
}

} // namespace qtrade
