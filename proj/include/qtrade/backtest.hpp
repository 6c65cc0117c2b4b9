#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qtrade/agent.hpp"
#include "qtrade/features.hpp"
#include "qtrade/metrics.hpp"
#include "qtrade/net.hpp"
#include "qtrade/sim.hpp"
#include "qtrade/trade_env.hpp"

namespace qtrade {

enum class WalkForwardMode { RollingFixed, Expanding };

// Rolling scheme: train on a fixed trailing window, hold parameters for a
// fixed test block. Expanding scheme: retrain every `retrain_every` days on
// all history (train_window only sets the first cutoff).
struct WalkForwardPlan {
    WalkForwardMode mode = WalkForwardMode::RollingFixed;
    std::size_t train_window = 1260;
    std::size_t test_window = 1260;
    std::size_t retrain_every = 63;
    bool warm_start = false; // expanding: reuse previous segment's weights

    void validate() const;
};

struct SegmentCheckpoint {
    std::size_t first_test_row = 0;
    std::size_t train_begin_row = 0;
    std::size_t train_end_row = 0; // exclusive
    NetParams params;
};

// Concatenated out-of-sample record: one entry per evaluated day.
struct ExperimentResult {
    std::vector<std::string> dates;
    std::vector<double> net_returns;
    std::vector<double> gross_returns;
    std::vector<double> benchmark_returns;
    std::vector<int> positions;
    std::vector<double> costs;
    MetricsReport net_metrics;
    MetricsReport gross_metrics;
    MetricsReport benchmark_metrics;
    std::vector<SegmentCheckpoint> checkpoints;
};

// Always-long zero-cost daily returns: the target asset's own returns.
std::vector<double> benchmark_long_only(const StatePanel& panel);

// Per-segment training config: same hyperparameters, segment-specific
// derived seed. Segment 0 is also what a standalone training run uses, so
// a saved checkpoint replays the first walk-forward segment exactly.
TrainConfig segment_train_config(const TrainConfig& base, std::size_t segment);

// Train/evaluate per plan; greedy (eps 0) out of sample, position carried
// across segment boundaries, per-segment seeds derived from train.seed.
ExperimentResult run_walk_forward(const StatePanel& panel, const WalkForwardPlan& plan,
                                  const TrainConfig& train, const CostModel& costs);

// Greedy evaluation of fixed parameters over rows [start_row, rows()).
ExperimentResult run_fixed_model(const StatePanel& panel, const NetParams& params,
                                 const CostModel& costs, std::size_t start_row = 0);

// Training-data generator: a single-regime process or the 3-state
// regime-switching model, with a fixed path length in trading days.
struct SimSource {
    std::variant<ProcessParams, RegimeModel> model;
    std::size_t train_steps = 1260; // five simulated years
    double dt = 1.0 / 252.0;
};

PricePath simulate_source(const SimSource& source, std::size_t n_steps, Rng& rng);

// Fit one agent on n_paths simulated paths (stream ids derived from
// train.seed and the path index), episodes cycled round-robin.
FitResult fit_on_simulated_paths(const SimSource& source, std::size_t n_paths,
                                 const TrainConfig& train,
                                 const FeatureConfig& features,
                                 const CostModel& costs);

// Fit one agent on n_paths independently seeded paths (episodes cycled
// round-robin), then evaluate greedily on eval_panel.
ExperimentResult run_simulated_training(const SimSource& source, std::size_t n_paths,
                                        const TrainConfig& train,
                                        const FeatureConfig& features,
                                        const CostModel& costs,
                                        const StatePanel& eval_panel);

struct HistogramStudyResult {
    std::vector<double> agent_sharpes;     // one per evaluation path
    std::vector<double> benchmark_sharpes; // same order
    double agent_mean = 0.0;
    double benchmark_mean = 0.0;
    std::size_t n_train_paths = 0;
    std::size_t n_eval_paths = 0;
};

// Train one agent per cell, evaluate on n_eval fresh paths, record the
// annualized Sharpe of the net strategy and of the always-long benchmark
// per path (0 recorded when a path's return variance is zero, e.g. an
// always-flat policy). Evaluation paths are seeded from eval_seed_base
// and the path index only, so every cell of a study grid sees the same
// evaluation randomness for a given source model.
HistogramStudyResult sharpe_histogram_study(const SimSource& source, std::size_t n_paths,
                                            std::size_t n_eval, std::size_t eval_steps,
                                            const TrainConfig& train,
                                            const FeatureConfig& features,
                                            const CostModel& costs,
                                            std::uint64_t eval_seed_base);

} // namespace qtrade
