#include "qtrade/trade_env.hpp"

#include <cmath>
#include <stdexcept>

#include "qtrade/errors.hpp"

namespace qtrade {

void CostModel::validate() const {
    if (!(proportional >= 0.0) || !(fixed >= 0.0)) {
        throw std::invalid_argument("CostModel: costs must be >= 0");
    }
}

TradingEnv::TradingEnv(const StatePanel& panel, CostModel costs)
    : panel_(&panel), costs_(costs) {
    costs_.validate();
}

std::span<const double> TradingEnv::reset(std::size_t start_row) {
    if (panel_->rows() < 2 || start_row + 1 >= panel_->rows()) {
        throw std::out_of_range("TradingEnv::reset: start row has no successor");
    }
    row_ = start_row;
    position_ = 0;
    done_ = false;
    trace_.clear();
    return panel_->state(row_);
}

StepResult TradingEnv::step(int action) {
    if (done_) throw ContractError("TradingEnv::step: episode is done");
    if (action < -1 || action > 1) {
        throw std::domain_error("TradingEnv::step: action must be -1, 0 or 1");
    }

    const double gross = action * panel_->target_returns[row_];
    const double turnover = std::abs(action - position_);
    const double cost =
        costs_.proportional * turnover + (action != position_ ? costs_.fixed : 0.0);

    StepResult result;
    result.info.gross = gross;
    result.info.cost = cost;
    result.info.position = action;
    result.reward = gross - cost;

    if (tracing_) {
        trace_.push_back({panel_->dates[row_], action, gross, cost, result.reward});
    }

    position_ = action;
    ++row_;
    done_ = (row_ + 1 >= panel_->rows());
    result.done = done_;
    result.next_state = panel_->state(row_);
    return result;
}

double episode_return(std::span<const double> rewards) {
    double acc = 1.0;
    for (double r : rewards) acc *= 1.0 + r;
    return acc - 1.0;
}

} // namespace qtrade
