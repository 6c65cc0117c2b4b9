#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qtrade {

struct FeatureConfig {
    // Return lookbacks in trading days: 1 day, 1/2/3/6 months, 1 year.
    std::vector<int> horizons{1, 21, 42, 63, 126, 252};
    int vol_span = 63;        // EW std span, days
    int lookback = 30;        // observations per state
    double vol_floor = 1e-8;  // minimum daily volatility

    void validate() const;
};

// Exponentially weighted volatility of a daily return series.
// alpha = 2/(span+1); recursion m_t = (1-a) m_{t-1} + a r_t,
// q_t = (1-a) q_{t-1} + a r_t^2, sigma_t = sqrt(q_t - m_t^2)
// (population weighting, no bias adjustment). sigma[i] is aligned with
// returns[i]; the first `warmup` values are warm-up.
struct EwVol {
    std::vector<double> sigma;
    int warmup = 0;
};
EwVol ewm_volatility(const std::vector<double>& returns, int span);

// Simple k-day return p_t / p_{t-k} - 1; throws when t < k.
double horizon_return(const std::vector<double>& prices, std::size_t t, int k);

// Per-date observation rows. Each row holds the last `lookback` days of
// volatility-normalized horizon returns for every asset, flattened in
// (day, horizon, asset) order with days oldest first, plus the next-day
// simple return of the traded asset.
struct StatePanel {
    std::vector<std::string> dates;     // one label per row
    std::vector<std::size_t> source_index; // row's index into the input series
    std::size_t state_dim = 0;
    std::vector<double> states;         // rows() x state_dim, row-major
    std::vector<double> target_returns; // next-day return of the target asset

    std::size_t rows() const { return target_returns.size(); }
    std::span<const double> state(std::size_t row) const {
        return {states.data() + row * state_dim, state_dim};
    }
};

// Build the state panel from aligned price series (one per asset).
// feature(t, k, asset) = (p_t/p_{t-k} - 1) / (max(sigma_t, vol_floor) * sqrt(k)),
// clamped to [-10, 10]. The first state sits at day offset
// max(max_horizon, vol_span + 1) + lookback - 1, and the last one leaves
// room for a next-day target return. `dates`, when given, labels each
// input day; otherwise day indices are used.
StatePanel build_state_panel(const std::vector<std::vector<double>>& prices,
                             std::size_t target_asset,
                             const FeatureConfig& config,
                             const std::vector<std::string>* dates = nullptr);

// Copy rows [begin_row, end_row) into a standalone panel. Because features
// are causal, slicing equals rebuilding on the truncated price history.
StatePanel slice_panel(const StatePanel& panel, std::size_t begin_row,
                       std::size_t end_row);

// One CSV row per panel date: date,target_return,f0,f1,...
void dump_state_panel_csv(const StatePanel& panel, const std::string& path);

} // namespace qtrade
