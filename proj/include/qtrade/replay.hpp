#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qtrade/rng.hpp"

namespace qtrade {

// One environment step. Actions are stored encoded: 0/1/2 <-> short/flat/long.
struct Transition {
    std::vector<double> state;
    int action = 1;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

// Array-backed binary sum tree with `capacity` leaves. Parents are
// recomputed (not delta-adjusted) on every set() so internal nodes stay
// consistent with their children to ~1e-9 over arbitrarily long runs.
class SumTree {
public:
    explicit SumTree(std::size_t capacity);

    std::size_t capacity() const { return cap_; }
    double total() const { return nodes_[1]; }
    double leaf(std::size_t i) const { return nodes_[cap_ + i]; }

    void set(std::size_t leaf_index, double priority);

    // Largest-prefix descent: returns the leaf l with
    // sum(leaves < l) <= mass < sum(leaves <= l). mass in [0, total).
    std::size_t find_prefix(double mass) const;

    // Max |node - left - right| over all internal nodes (test hook).
    double max_node_error() const;

private:
    std::size_t cap_;
    std::vector<double> nodes_; // 1-indexed heap layout, leaves at [cap_, 2*cap_)
};

// Ring buffer over transitions with proportional prioritization:
// leaves hold priority^alpha, new entries get the running max raw priority
// (1.0 until any TD update), and importance weights are (N*P)^-beta
// normalized by the batch max. With prioritized=false sampling is uniform
// and every weight is 1.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, double alpha, double priority_eps,
                 bool prioritized);

    void push(Transition t);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return cap_; }
    bool ready(std::size_t batch_size) const { return size_ >= batch_size; }

    struct Batch {
        std::vector<std::size_t> indices;
        std::vector<double> weights;
        std::vector<const Transition*> items;
    };

    Batch sample(std::size_t batch_size, double beta, Rng& rng) const;

    // priority_i <- (|td_error_i| + priority_eps)^alpha
    void update_priorities(std::span<const std::size_t> indices,
                           std::span<const double> td_errors);

    const Transition& item(std::size_t slot) const { return items_[slot]; }
    double leaf_priority(std::size_t slot) const { return tree_.leaf(slot); }
    double total_priority() const { return tree_.total(); }
    const SumTree& tree() const { return tree_; }

private:
    std::size_t cap_;
    double alpha_;
    double priority_eps_;
    bool prioritized_;
    std::vector<Transition> items_;
    SumTree tree_;
    std::size_t cursor_ = 0;
    std::size_t size_ = 0;
    double max_raw_priority_ = 1.0;
};

} // namespace qtrade
