#include "qtrade/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qtrade/errors.hpp"

namespace qtrade {

SumTree::SumTree(std::size_t capacity) : cap_(capacity) {
    if (capacity == 0) throw std::invalid_argument("SumTree capacity must be positive");
    nodes_.assign(2 * cap_, 0.0);
}

void SumTree::set(std::size_t leaf_index, double priority) {
    if (leaf_index >= cap_) throw std::out_of_range("SumTree leaf index out of range");
    if (!(priority >= 0.0) || !std::isfinite(priority))
        throw std::invalid_argument("SumTree priority must be finite and non-negative");
    std::size_t i = cap_ + leaf_index;
    nodes_[i] = priority;
    while (i > 1) {
        i /= 2;
        nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
    }
}

std::size_t SumTree::find_prefix(double mass) const {
    std::size_t i = 1;
    while (i < cap_) {
        const std::size_t left = 2 * i;
        // Prefer the left child when the right subtree is empty so rounding
        // at the top of the range can never select a zero-priority leaf.
        if (mass < nodes_[left] || nodes_[left + 1] <= 0.0) {
            i = left;
        } else {
            mass -= nodes_[left];
            i = left + 1;
        }
    }
    return i - cap_;
}

double SumTree::max_node_error() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < cap_; ++i)
        worst = std::max(worst, std::abs(nodes_[i] - nodes_[2 * i] - nodes_[2 * i + 1]));
    return worst;
}

namespace {
std::size_t checked_replay_capacity(std::size_t capacity) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
    return capacity;
}
} // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, double alpha, double priority_eps,
                           bool prioritized)
    : cap_(checked_replay_capacity(capacity)),
      alpha_(alpha),
      priority_eps_(priority_eps),
      prioritized_(prioritized),
      items_(capacity),
      tree_(capacity) {
    if (alpha < 0.0) throw ConfigError("replay alpha must be non-negative");
    if (priority_eps <= 0.0) throw ConfigError("replay priority_eps must be positive");
}

void ReplayBuffer::push(Transition t) {
    items_[cursor_] = std::move(t);
    tree_.set(cursor_, std::pow(max_raw_priority_, alpha_));
    cursor_ = (cursor_ + 1) % cap_;
    size_ = std::min(size_ + 1, cap_);
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch_size, double beta,
                                         Rng& rng) const {
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (!ready(batch_size))
        throw ContractError("replay buffer has fewer stored transitions than batch_size");

    Batch batch;
    batch.indices.resize(batch_size);
    batch.weights.resize(batch_size);
    batch.items.resize(batch_size);

    if (!prioritized_) {
        for (std::size_t k = 0; k < batch_size; ++k) {
            const std::size_t idx =
                std::min<std::size_t>(std::size_t(rng.uniform01() * double(size_)), size_ - 1);
            batch.indices[k] = idx;
            batch.weights[k] = 1.0;
            batch.items[k] = &items_[idx];
        }
        return batch;
    }

    const double total = tree_.total();
    if (!(total > 0.0)) throw ContractError("replay buffer has zero total priority");
    const double seg = total / double(batch_size);
    const double n = double(size_);
    double max_w = 0.0;
    for (std::size_t k = 0; k < batch_size; ++k) {
        const double mass = (double(k) + rng.uniform01()) * seg;
        std::size_t idx = tree_.find_prefix(mass);
        if (idx >= size_) idx = size_ - 1; // numeric edge guard
        const double p = tree_.leaf(idx) / total;
        const double w = std::pow(n * p, -beta);
        batch.indices[k] = idx;
        batch.weights[k] = w;
        batch.items[k] = &items_[idx];
        max_w = std::max(max_w, w);
    }
    for (double& w : batch.weights) w /= max_w;
    return batch;
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> indices,
                                     std::span<const double> td_errors) {
    if (indices.size() != td_errors.size())
        throw std::invalid_argument("update_priorities: size mismatch");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const double raw = std::abs(td_errors[k]) + priority_eps_;
        max_raw_priority_ = std::max(max_raw_priority_, raw);
        tree_.set(indices[k], std::pow(raw, alpha_));
    }
}

} // namespace qtrade
