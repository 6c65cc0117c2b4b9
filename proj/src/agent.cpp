#include "qtrade/agent.hpp"

#include <algorithm>
#include <cmath>

#include "qtrade/errors.hpp"

namespace qtrade {

namespace {

constexpr std::uint64_t kAgentStream = 0x6167656e74ULL; // "agent"

int argmax3(const std::array<double, 3>& q) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0,1]");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (buffer_size == 0) throw ConfigError("buffer_size must be positive");
    if (batch_size > buffer_size)
        throw ConfigError("batch_size must not exceed buffer_size");
    if (!(exploration_fraction > 0.0 && exploration_fraction <= 1.0))
        throw ConfigError("exploration_fraction must lie in (0,1]");
    if (!(exploration_final_eps >= 0.0 && exploration_final_eps <= 1.0))
        throw ConfigError("exploration_final_eps must lie in [0,1]");
    if (target_network_update_freq == 0)
        throw ConfigError("target_network_update_freq must be positive");
    if (!(priority_alpha >= 0.0)) throw ConfigError("priority_alpha must be non-negative");
    if (!(priority_beta0 > 0.0 && priority_beta0 <= 1.0))
        throw ConfigError("priority_beta0 must lie in (0,1]");
    if (!(priority_eps > 0.0)) throw ConfigError("priority_eps must be positive");
    if (train_freq == 0) throw ConfigError("train_freq must be positive");
    if (hidden[0] == 0 || hidden[1] == 0)
        throw ConfigError("network hidden widths must be positive");
}

int select_action(const std::array<double, 3>& q, double eps, Rng& rng) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in [0,1]");
    if (eps > 0.0 && rng.uniform01() < eps) {
        return std::min(2, int(rng.uniform01() * 3.0));
    }
    return argmax3(q);
}

double epsilon_at(std::size_t step, std::size_t total_timesteps,
                  double exploration_fraction, double final_eps) {
    const double anneal = exploration_fraction * double(total_timesteps);
    if (anneal <= 0.0) return final_eps;
    const double frac = std::min(1.0, double(step) / anneal);
    return (1.0 - frac) * 1.0 + frac * final_eps; // hits both endpoints exactly
}

double beta_at(std::size_t step, std::size_t total_timesteps, double beta0) {
    if (total_timesteps == 0) return 1.0;
    const double frac = std::min(1.0, double(step) / double(total_timesteps));
    return (1.0 - frac) * beta0 + frac * 1.0;
}

double td_target(double reward, const std::array<double, 3>& next_q_target,
                 const std::array<double, 3>& next_q_online, bool done,
                 double gamma, bool double_q) {
    if (done) return reward;
    if (double_q) return reward + gamma * next_q_target[argmax3(next_q_online)];
    return reward + gamma * *std::max_element(next_q_target.begin(), next_q_target.end());
}

int act_greedy(const QNet& net, std::span<const double> obs) {
    return decode_action(argmax3(forward_q(net, obs)));
}

DqnAgent::DqnAgent(const MlpSpec& spec, const TrainConfig& config)
    : config_(config),
      params_{},
      adam_(init_adam(spec)),
      buffer_(config.buffer_size, config.priority_alpha, config.priority_eps,
              config.prioritized_replay),
      rng_(Rng::stream(config.seed, kAgentStream)) {
    config_.validate();
    params_ = init_params(spec, rng_);
}

DqnAgent::DqnAgent(NetParams params, const TrainConfig& config)
    : config_(config),
      params_(std::move(params)),
      adam_(init_adam(params_.spec)),
      buffer_(config.buffer_size, config.priority_alpha, config.priority_eps,
              config.prioritized_replay),
      rng_(Rng::stream(config.seed, kAgentStream)) {
    config_.validate();
}

double DqnAgent::train_step(double beta) {
    ReplayBuffer::Batch batch = buffer_.sample(config_.batch_size, beta, rng_);
    const std::size_t n = batch.items.size();

    QNet grads = zero_grads(params_.spec);
    std::vector<double> deltas(n);
    double loss = 0.0;
    ForwardCache cache;
    for (std::size_t i = 0; i < n; ++i) {
        const Transition& tr = *batch.items[i];
        const std::array<double, 3> q = forward_q(params_.online, tr.state, &cache);

        std::array<double, 3> next_q_target{};
        std::array<double, 3> next_q_online{};
        if (!tr.done) {
            next_q_target = forward_q(params_.target, tr.next_state);
            if (config_.double_q)
                next_q_online = forward_q(params_.online, tr.next_state);
        }
        const double target = td_target(tr.reward, next_q_target, next_q_online,
                                        tr.done, config_.gamma, config_.double_q);
        const double delta = q[std::size_t(tr.action)] - target;
        deltas[i] = delta;
        const double w = batch.weights[i];
        loss += w * delta * delta;

        // d(mean w_j d_j^2)/dq[a_i] = 2 w_i d_i / n, other entries zero.
        std::array<double, 3> dq{0.0, 0.0, 0.0};
        dq[std::size_t(tr.action)] = 2.0 * w * delta / double(n);
        backward(params_.online, cache, dq, grads);
    }
    loss /= double(n);

    adam_step(params_.online, grads, adam_, config_.learning_rate);
    if (config_.prioritized_replay) buffer_.update_priorities(batch.indices, deltas);
    return loss;
}

FitResult DqnAgent::fit(std::span<const StatePanel* const> panels,
                        const CostModel& costs) {
    if (panels.empty()) throw ConfigError("fit: no training panels given");
    std::size_t steps_per_epoch = 0;
    for (const StatePanel* p : panels) {
        if (p == nullptr || p->rows() < 2)
            throw ConfigError("fit: every training panel needs at least two rows");
        if (p->state_dim != params_.spec.input_dim)
            throw ConfigError("fit: panel state dimension does not match the network input");
        steps_per_epoch += p->rows() - 1;
    }
    const std::size_t total = config_.total_timesteps
                                  ? *config_.total_timesteps
                                  : 20 * steps_per_epoch;

    FitResult result;
    if (total == 0) {
        result.params = params_;
        return result;
    }

    std::vector<TradingEnv> envs;
    envs.reserve(panels.size());
    for (const StatePanel* p : panels) envs.emplace_back(*p, costs);

    result.log.reserve(total);

    std::size_t panel_idx = 0;
    std::vector<double> obs;
    {
        const auto s = envs[panel_idx].reset(0);
        obs.assign(s.begin(), s.end());
    }
    double ep_growth = 1.0;

    for (std::size_t t = 1; t <= total; ++t) {
        const double eps = epsilon_at(t - 1, total, config_.exploration_fraction,
                                      config_.exploration_final_eps);
        const std::array<double, 3> q = forward_q(params_.online, obs);
        const int a_enc = select_action(q, eps, rng_);
        const StepResult sr = envs[panel_idx].step(decode_action(a_enc));

        Transition tr;
        tr.state = obs;
        tr.action = a_enc;
        tr.reward = sr.reward;
        tr.next_state.assign(sr.next_state.begin(), sr.next_state.end());
        tr.done = sr.done;
        buffer_.push(std::move(tr));

        ep_growth *= 1.0 + sr.reward;

        TrainLogRow row;
        row.step = t;
        row.eps = eps;

        if (t >= config_.learning_starts && t % config_.train_freq == 0 &&
            buffer_.ready(config_.batch_size)) {
            row.loss = train_step(beta_at(t, total, config_.priority_beta0));
        }
        if (t % config_.target_network_update_freq == 0) hard_update_target(params_);

        if (sr.done) {
            const double ep_ret = ep_growth - 1.0;
            row.episode_return = ep_ret;
            result.episode_returns.push_back(ep_ret);
            ep_growth = 1.0;
            panel_idx = (panel_idx + 1) % envs.size();
            const auto s = envs[panel_idx].reset(0);
            obs.assign(s.begin(), s.end());
        } else {
            obs.assign(sr.next_state.begin(), sr.next_state.end());
        }
        result.log.push_back(std::move(row));
    }

    result.steps = total;
    result.params = params_;
    return result;
}

} // namespace qtrade
