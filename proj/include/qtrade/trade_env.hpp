#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qtrade/features.hpp"

namespace qtrade {

struct CostModel {
    double proportional = 1e-4; // cost per unit of turnover, fraction of notional
    double fixed = 0.0;         // flat cost per position change, fraction of notional

    void validate() const;
};

struct StepInfo {
    double gross = 0.0;
    double cost = 0.0;
    int position = 0; // position held over the step
};

struct StepResult {
    std::span<const double> next_state;
    double reward = 0.0; // gross - cost
    bool done = false;
    StepInfo info;
};

struct TraceRow {
    std::string date;
    int action = 0;
    double gross = 0.0;
    double cost = 0.0;
    double net = 0.0;
};

// Episodic long/flat/short trading MDP over a StatePanel. The action is
// the target position held over [t, t+1); reward = position * next-day
// return minus transaction costs, charged on position changes with
// turnover |action - previous|.
class TradingEnv {
public:
    TradingEnv(const StatePanel& panel, CostModel costs);

    // Start an episode at a panel row (flat position). The row must have
    // a successor.
    std::span<const double> reset(std::size_t start_row);

    StepResult step(int action); // action in {-1, 0, 1}

    std::size_t row() const { return row_; }
    int position() const { return position_; }
    bool done() const { return done_; }
    const StatePanel& panel() const { return *panel_; }

    void set_tracing(bool on) { tracing_ = on; }
    const std::vector<TraceRow>& trace() const { return trace_; }

private:
    const StatePanel* panel_;
    CostModel costs_;
    std::size_t row_ = 0;
    int position_ = 0;
    bool done_ = true;
    bool tracing_ = false;
    std::vector<TraceRow> trace_;
};

// Cumulative compounded return of a reward sequence.
double episode_return(std::span<const double> rewards);

} // namespace qtrade
