#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qtrade/net.hpp"
#include "qtrade/replay.hpp"
#include "qtrade/rng.hpp"
#include "qtrade/trade_env.hpp"

namespace qtrade {

// Training hyperparameters. Defaults follow the reference configuration;
// total_timesteps left unset means "20 epochs over the training source".
struct TrainConfig {
    double learning_rate = 0.001;
    double gamma = 0.94;
    std::size_t batch_size = 128;
    std::size_t buffer_size = 30000;
    double exploration_fraction = 0.25;
    double exploration_final_eps = 0.02;
    std::size_t learning_starts = 100;
    std::size_t target_network_update_freq = 500;
    bool prioritized_replay = true;
    double priority_alpha = 0.6;
    double priority_beta0 = 0.4; // annealed linearly to 1.0 over the run
    double priority_eps = 1e-6;
    std::optional<std::size_t> total_timesteps; // unset => 20 epochs
    std::size_t train_freq = 1;
    bool double_q = false;
    std::uint64_t seed = 0;
    // Hidden widths of both network towers (orchestration plumbing; the
    // input width always comes from the state panel).
    std::array<std::size_t, 2> hidden{64, 64};

    void validate() const;
};

// Encoded action (0/1/2) <-> position (-1/0/+1).
inline int decode_action(int encoded) { return encoded - 1; }
inline int encode_action(int position) { return position + 1; }

// eps-greedy over 3 actions; argmax ties break to the lowest index.
int select_action(const std::array<double, 3>& q, double eps, Rng& rng);

// Linear anneal 1.0 -> final_eps over exploration_fraction * total, then flat.
double epsilon_at(std::size_t step, std::size_t total_timesteps,
                  double exploration_fraction, double final_eps);

// Linear anneal beta0 -> 1.0 over the whole run.
double beta_at(std::size_t step, std::size_t total_timesteps, double beta0);

// done -> r; double_q -> r + gamma * Q_target[argmax Q_online];
// else r + gamma * max Q_target.
double td_target(double reward, const std::array<double, 3>& next_q_target,
                 const std::array<double, 3>& next_q_online, bool done,
                 double gamma, bool double_q);

// Greedy position for one observation: argmax q mapped to {-1, 0, +1}.
int act_greedy(const QNet& net, std::span<const double> obs);

struct TrainLogRow {
    std::size_t step = 0; // 1-based env step count
    double eps = 0.0;
    std::optional<double> loss;           // present when a gradient step ran
    std::optional<double> episode_return; // present when an episode ended here
};

struct FitResult {
    NetParams params;
    std::vector<TrainLogRow> log;
    std::vector<double> episode_returns;
    std::size_t steps = 0;
};

// One DQN training run over one or more state panels. Episodes cycle
// round-robin across panels; all randomness comes from the config seed, so
// a rerun with the same inputs is bit-identical.
class DqnAgent {
public:
    DqnAgent(const MlpSpec& spec, const TrainConfig& config);
    // Resume/evaluate from existing parameters instead of a fresh init.
    DqnAgent(NetParams params, const TrainConfig& config);

    FitResult fit(std::span<const StatePanel* const> panels, const CostModel& costs);

    const NetParams& params() const { return params_; }
    const TrainConfig& config() const { return config_; }

private:
    double train_step(double beta);

    TrainConfig config_;
    NetParams params_;
    AdamState adam_;
    ReplayBuffer buffer_;
    Rng rng_;
};

} // namespace qtrade
