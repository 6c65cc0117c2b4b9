#include "qtrade/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qtrade/errors.hpp"
#include "qtrade/io_format.hpp"

namespace qtrade {

void FeatureConfig::validate() const {
    if (horizons.empty()) throw std::invalid_argument("FeatureConfig: horizons must be non-empty");
    int prev = 0;
    for (int k : horizons) {
        if (k < 1) throw std::invalid_argument("FeatureConfig: horizons must be >= 1");
        if (k <= prev) throw std::invalid_argument("FeatureConfig: horizons must be strictly increasing");
        prev = k;
    }
    if (lookback < 1) throw std::invalid_argument("FeatureConfig: lookback must be >= 1");
    if (vol_span < 2) throw std::invalid_argument("FeatureConfig: vol_span must be >= 2");
    if (!(vol_floor > 0.0)) throw std::invalid_argument("FeatureConfig: vol_floor must be positive");
}

EwVol ewm_volatility(const std::vector<double>& returns, int span) {
    if (span < 2) throw std::invalid_argument("ewm_volatility: span must be >= 2");
    EwVol out;
    out.warmup = span;
    if (returns.empty()) return out;

    const double alpha = 2.0 / (span + 1.0);
    out.sigma.reserve(returns.size());
    double m = returns[0];
    double q = returns[0] * returns[0];
    out.sigma.push_back(0.0);
    for (std::size_t i = 1; i < returns.size(); ++i) {
        m = (1.0 - alpha) * m + alpha * returns[i];
        q = (1.0 - alpha) * q + alpha * returns[i] * returns[i];
        out.sigma.push_back(std::sqrt(std::max(q - m * m, 0.0)));
    }
    return out;
}

double horizon_return(const std::vector<double>& prices, std::size_t t, int k) {
    if (t >= prices.size()) throw std::out_of_range("horizon_return: t beyond series");
    if (t < static_cast<std::size_t>(k)) {
        throw std::out_of_range("horizon_return: not enough history for horizon");
    }
    return prices[t] / prices[t - static_cast<std::size_t>(k)] - 1.0;
}

StatePanel build_state_panel(const std::vector<std::vector<double>>& prices,
                             std::size_t target_asset,
                             const FeatureConfig& config,
                             const std::vector<std::string>* dates) {
    config.validate();
    if (prices.empty()) throw std::invalid_argument("build_state_panel: no price series");
    if (target_asset >= prices.size()) {
        throw std::invalid_argument("build_state_panel: target asset out of range");
    }
    const std::size_t n_days = prices[0].size();
    for (std::size_t a = 0; a < prices.size(); ++a) {
        if (prices[a].size() != n_days) {
            throw std::invalid_argument("build_state_panel: series lengths differ, align first");
        }
        for (std::size_t t = 0; t < prices[a].size(); ++t) {
            if (!std::isfinite(prices[a][t]) || prices[a][t] <= 0.0) {
                std::ostringstream os;
                os << "build_state_panel: bad price for asset " << a << " at day " << t;
                throw DataError(os.str());
            }
        }
    }
    if (dates && dates->size() != n_days) {
        throw std::invalid_argument("build_state_panel: date labels do not match series length");
    }

    const std::size_t n_assets = prices.size();
    const std::size_t n_horizons = config.horizons.size();
    const int max_horizon = config.horizons.back();

    StatePanel panel;
    panel.state_dim = static_cast<std::size_t>(config.lookback) * n_horizons * n_assets;

    // First day with full horizon history and a post-warm-up volatility,
    // then `lookback` observed days to fill a state.
    const std::size_t feature_start =
        static_cast<std::size_t>(std::max(max_horizon, config.vol_span + 1));
    const std::size_t first_row_day = feature_start + static_cast<std::size_t>(config.lookback) - 1;
    if (first_row_day + 1 >= n_days) return panel; // too short: empty panel, no error

    // Per-asset daily volatilities, aligned to price index (sigma at day t
    // uses returns up to t).
    std::vector<std::vector<double>> vol(n_assets);
    for (std::size_t a = 0; a < n_assets; ++a) {
        std::vector<double> rets(n_days - 1);
        for (std::size_t t = 1; t < n_days; ++t) rets[t - 1] = prices[a][t] / prices[a][t - 1] - 1.0;
        vol[a] = ewm_volatility(rets, config.vol_span).sigma;
    }

    // feature table per day, (horizon, asset) order within a day
    const std::size_t day_stride = n_horizons * n_assets;
    std::vector<double> feats((n_days - feature_start) * day_stride);
    for (std::size_t t = feature_start; t < n_days; ++t) {
        double* row = feats.data() + (t - feature_start) * day_stride;
        for (std::size_t h = 0; h < n_horizons; ++h) {
            const int k = config.horizons[h];
            for (std::size_t a = 0; a < n_assets; ++a) {
                const double sigma = std::max(vol[a][t - 1], config.vol_floor);
                const double r = horizon_return(prices[a], t, k);
                const double f = r / (sigma * std::sqrt(static_cast<double>(k)));
                row[h * n_assets + a] = std::clamp(f, -10.0, 10.0);
            }
        }
    }

    const std::size_t n_rows = (n_days - 1) - first_row_day; // last row keeps a next-day target
    panel.states.resize(n_rows * panel.state_dim);
    panel.dates.reserve(n_rows);
    panel.source_index.reserve(n_rows);
    panel.target_returns.reserve(n_rows);
    for (std::size_t row = 0; row < n_rows; ++row) {
        const std::size_t t = first_row_day + row;
        double* dst = panel.states.data() + row * panel.state_dim;
        for (int d = 0; d < config.lookback; ++d) {
            const std::size_t day = t - static_cast<std::size_t>(config.lookback - 1 - d);
            const double* src = feats.data() + (day - feature_start) * day_stride;
            std::copy(src, src + day_stride, dst + static_cast<std::size_t>(d) * day_stride);
        }
        panel.source_index.push_back(t);
        panel.dates.push_back(dates ? (*dates)[t] : std::to_string(t));
        panel.target_returns.push_back(prices[target_asset][t + 1] / prices[target_asset][t] - 1.0);
    }
    return panel;
}

StatePanel slice_panel(const StatePanel& panel, std::size_t begin_row,
                       std::size_t end_row) {
    if (begin_row > end_row || end_row > panel.rows())
        throw std::out_of_range("slice_panel: row range out of bounds");
    StatePanel out;
    out.state_dim = panel.state_dim;
    out.dates.assign(panel.dates.begin() + std::ptrdiff_t(begin_row),
                     panel.dates.begin() + std::ptrdiff_t(end_row));
    out.source_index.assign(panel.source_index.begin() + std::ptrdiff_t(begin_row),
                            panel.source_index.begin() + std::ptrdiff_t(end_row));
    out.target_returns.assign(panel.target_returns.begin() + std::ptrdiff_t(begin_row),
                              panel.target_returns.begin() + std::ptrdiff_t(end_row));
    out.states.assign(panel.states.begin() + std::ptrdiff_t(begin_row * panel.state_dim),
                      panel.states.begin() + std::ptrdiff_t(end_row * panel.state_dim));
    return out;
}

void dump_state_panel_csv(const StatePanel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("dump_state_panel_csv: cannot open " + path);
    out << "date,target_return";
    for (std::size_t j = 0; j < panel.state_dim; ++j) out << ",f" << j;
    out << "\n";
    for (std::size_t i = 0; i < panel.rows(); ++i) {
        out << panel.dates[i] << ',' << fmt_num(panel.target_returns[i]);
        const auto s = panel.state(i);
        for (double x : s) out << ',' << fmt_num(x);
        out << "\n";
    }
}

} // namespace qtrade
