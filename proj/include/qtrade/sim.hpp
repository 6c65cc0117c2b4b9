#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "qtrade/rng.hpp"

namespace qtrade {

enum class Regime { Up = 0, No = 1, Down = 2 };

const char* regime_name(Regime r);   // "up" / "no" / "down"
char regime_tag(Regime r);           // 'U' / 'N' / 'D'

struct GbmParams {
    double mu = 0.0;    // annualized drift
    double sigma = 0.0; // annualized volatility
    double s0 = 1.0;    // initial price

    void validate() const;
};

struct VgParams {
    double mu = 0.0;    // annualized drift
    double sigma = 0.0; // annualized volatility of the time-changed Brownian part
    double theta = 0.0; // annualized skew parameter
    double nu = 1e-8;   // variance rate of the gamma clock, in years
    double s0 = 1.0;

    // Drift correction (1/nu) * ln(1 - theta*nu - sigma^2*nu/2); the log
    // argument must be positive for the process mean growth to be mu.
    double omega() const;
    void validate() const;
};

using ProcessParams = std::variant<GbmParams, VgParams>;

// Three trend regimes with daily self-transition probabilities. Implied
// transition rows: up -> {up: p_uu, no: 1-p_uu}; down -> {down: p_dd,
// no: 1-p_dd}; no -> {no: p_nn, up: (1-p_nn)/2, down: (1-p_nn)/2}.
struct RegimeModel {
    std::array<ProcessParams, 3> regimes; // indexed by Regime
    std::array<double, 3> self_probs{0.95, 0.90, 0.95};
    Regime initial = Regime::No;

    void validate() const;
    // Row of the implied 3x3 daily transition matrix.
    std::array<double, 3> transition_row(Regime from) const;
};

struct PricePath {
    std::vector<double> prices;        // strictly positive, length >= 2
    std::vector<Regime> regime_labels; // empty when unlabeled, else per price
    double dt = 1.0 / 252.0;           // day length in years

    std::size_t n_steps() const { return prices.empty() ? 0 : prices.size() - 1; }
    void validate() const;
};

// One Gamma(shape, scale) variate. Over many draws the sample mean
// converges to shape*scale and the variance to shape*scale^2.
double sample_gamma(double shape, double scale, Rng& rng);

// Day-by-day lognormal increments: log S_{t+1}/S_t = (mu - sigma^2/2) dt
// + sigma sqrt(dt) z. Path length n_steps + 1.
PricePath gbm_path(const GbmParams& params, std::size_t n_steps, double dt, Rng& rng);

// Per step: g ~ Gamma(dt/nu, nu); log-increment = (mu + omega) dt
// + theta g + sigma sqrt(g) z.
PricePath vg_path(const VgParams& params, std::size_t n_steps, double dt, Rng& rng);

// Each day: sample the next regime from the current regime's transition
// row, then draw one increment from that regime's process. Labels cover
// every price; label[0] is the initial regime.
PricePath regime_path(const RegimeModel& model, std::size_t n_steps, double dt, Rng& rng);

// Dispatch on the parameter variant (single-regime path, no labels).
PricePath process_path(const ProcessParams& params, std::size_t n_steps, double dt, Rng& rng);

// Moment-matched estimates from daily log returns. sigma_hat is the
// population stdev scaled by sqrt(1/dt); mu_hat adds back sigma^2/2.
// Requires at least 30 prices.
GbmParams calibrate_gbm(const PricePath& prices);

// Method of moments on daily log returns, theta treated as small in the
// kurtosis equation:
//   excess kurtosis ~= 3 nu / dt          -> nu
//   skewness        ~= 3 theta nu / (sigma sqrt(dt)) -> theta
//   variance         = (sigma^2 + theta^2 nu) dt     -> sigma
//   mean             = (mu + omega + theta) dt       -> mu
// Sample excess kurtosis within sampling noise of zero degenerates to the
// Brownian limit (nu pinned at a tiny floor, theta 0); kurtosis more than
// 3 standard errors below zero is incompatible with the process and fails.
// Requires at least 250 prices.
VgParams calibrate_vg(const PricePath& prices);

// Estimated parameters per trend regime and the default 3-state model
// (p = 0.95/0.90/0.95, initial regime "no").
GbmParams gbm_preset(Regime r);
VgParams vg_preset(Regime r);
RegimeModel regime_model_preset(bool use_vg);

} // namespace qtrade
