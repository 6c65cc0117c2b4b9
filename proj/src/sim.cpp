#include "qtrade/sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qtrade/errors.hpp"

namespace qtrade {

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Population central moments 2..4.
struct CentralMoments {
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

CentralMoments central_moments(const std::vector<double>& v) {
    CentralMoments cm;
    cm.m1 = mean_of(v);
    for (double x : v) {
        const double d = x - cm.m1;
        const double d2 = d * d;
        cm.m2 += d2;
        cm.m3 += d2 * d;
        cm.m4 += d2 * d2;
    }
    const double n = static_cast<double>(v.size());
    cm.m2 /= n;
    cm.m3 /= n;
    cm.m4 /= n;
    return cm;
}

std::vector<double> log_returns(const PricePath& path) {
    path.validate();
    std::vector<double> r;
    r.reserve(path.prices.size() - 1);
    for (std::size_t i = 1; i < path.prices.size(); ++i) {
        r.push_back(std::log(path.prices[i] / path.prices[i - 1]));
    }
    return r;
}

double gbm_log_increment(const GbmParams& p, double dt, Rng& rng) {
    return (p.mu - 0.5 * p.sigma * p.sigma) * dt + p.sigma * std::sqrt(dt) * rng.normal();
}

double vg_log_increment(const VgParams& p, double omega, double dt, Rng& rng) {
    const double g = sample_gamma(dt / p.nu, p.nu, rng);
    return (p.mu + omega) * dt + p.theta * g + p.sigma * std::sqrt(g) * rng.normal();
}

PricePath path_from_increments(double s0, double dt, const std::vector<double>& log_incs) {
    PricePath path;
    path.dt = dt;
    path.prices.reserve(log_incs.size() + 1);
    path.prices.push_back(s0);
    double log_s = std::log(s0);
    for (double inc : log_incs) {
        log_s += inc;
        path.prices.push_back(std::exp(log_s));
    }
    return path;
}

void check_steps(std::size_t n_steps, double dt) {
    if (n_steps < 1) throw std::invalid_argument("path generation: n_steps must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("path generation: dt must be positive");
}

} // namespace

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Up: return "up";
        case Regime::No: return "no";
        case Regime::Down: return "down";
    }
    return "?";
}

char regime_tag(Regime r) {
    switch (r) {
        case Regime::Up: return 'U';
        case Regime::No: return 'N';
        case Regime::Down: return 'D';
    }
    return '-';
}

void GbmParams::validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("GbmParams: sigma must be >= 0");
    if (!(s0 > 0.0)) throw std::invalid_argument("GbmParams: s0 must be positive");
    if (!std::isfinite(mu)) throw std::invalid_argument("GbmParams: mu must be finite");
}

double VgParams::omega() const {
    const double arg = 1.0 - theta * nu - 0.5 * sigma * sigma * nu;
    if (!(arg > 0.0)) {
        std::ostringstream os;
        os << "VgParams: omega undefined, 1 - theta*nu - sigma^2*nu/2 = " << arg;
        throw std::domain_error(os.str());
    }
    return std::log(arg) / nu;
}

void VgParams::validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("VgParams: sigma must be >= 0");
    if (!(nu > 0.0)) throw std::invalid_argument("VgParams: nu must be positive");
    if (!(s0 > 0.0)) throw std::invalid_argument("VgParams: s0 must be positive");
    if (!std::isfinite(mu) || !std::isfinite(theta)) {
        throw std::invalid_argument("VgParams: mu and theta must be finite");
    }
    (void)omega(); // throws when the log argument is non-positive
}

void RegimeModel::validate() const {
    for (double p : self_probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("RegimeModel: self probabilities must lie in [0,1]");
        }
    }
    for (const auto& params : regimes) {
        std::visit([](const auto& p) { p.validate(); }, params);
    }
}

std::array<double, 3> RegimeModel::transition_row(Regime from) const {
    const double p = self_probs[static_cast<std::size_t>(from)];
    switch (from) {
        case Regime::Up: return {p, 1.0 - p, 0.0};
        case Regime::No: return {(1.0 - p) / 2.0, p, (1.0 - p) / 2.0};
        case Regime::Down: return {0.0, 1.0 - p, p};
    }
    return {0.0, 1.0, 0.0};
}

void PricePath::validate() const {
    if (prices.size() < 2) throw std::invalid_argument("PricePath: need at least 2 prices");
    if (!(dt > 0.0)) throw std::invalid_argument("PricePath: dt must be positive");
    for (double p : prices) {
        if (!(p > 0.0)) throw std::invalid_argument("PricePath: prices must be strictly positive");
    }
    if (!regime_labels.empty() && regime_labels.size() != prices.size()) {
        throw std::invalid_argument("PricePath: regime labels must cover every price");
    }
}

double sample_gamma(double shape, double scale, Rng& rng) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("sample_gamma: shape and scale must be positive");
    }
    return rng.gamma(shape, scale);
}

PricePath gbm_path(const GbmParams& params, std::size_t n_steps, double dt, Rng& rng) {
    params.validate();
    check_steps(n_steps, dt);
    std::vector<double> incs(n_steps);
    for (auto& inc : incs) inc = gbm_log_increment(params, dt, rng);
    return path_from_increments(params.s0, dt, incs);
}

PricePath vg_path(const VgParams& params, std::size_t n_steps, double dt, Rng& rng) {
    params.validate();
    check_steps(n_steps, dt);
    const double omega = params.omega();
    std::vector<double> incs(n_steps);
    for (auto& inc : incs) inc = vg_log_increment(params, omega, dt, rng);
    return path_from_increments(params.s0, dt, incs);
}

PricePath regime_path(const RegimeModel& model, std::size_t n_steps, double dt, Rng& rng) {
    model.validate();
    check_steps(n_steps, dt);

    // omegas precomputed so per-step work is a draw, not a log
    std::array<double, 3> omegas{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i) {
        if (const auto* vg = std::get_if<VgParams>(&model.regimes[i])) omegas[i] = vg->omega();
    }

    const double s0 = std::visit([](const auto& p) { return p.s0; }, model.regimes[static_cast<std::size_t>(model.initial)]);

    PricePath path;
    path.dt = dt;
    path.prices.reserve(n_steps + 1);
    path.regime_labels.reserve(n_steps + 1);
    path.prices.push_back(s0);
    path.regime_labels.push_back(model.initial);

    Regime current = model.initial;
    double log_s = std::log(s0);
    for (std::size_t step = 0; step < n_steps; ++step) {
        const auto row = model.transition_row(current);
        const double u = rng.uniform01();
        Regime next = Regime::Down;
        if (u < row[0]) {
            next = Regime::Up;
        } else if (u < row[0] + row[1]) {
            next = Regime::No;
        }
        const auto& params = model.regimes[static_cast<std::size_t>(next)];
        double inc = 0.0;
        if (const auto* gbm = std::get_if<GbmParams>(&params)) {
            inc = gbm_log_increment(*gbm, dt, rng);
        } else {
            inc = vg_log_increment(std::get<VgParams>(params), omegas[static_cast<std::size_t>(next)], dt, rng);
        }
        log_s += inc;
        path.prices.push_back(std::exp(log_s));
        path.regime_labels.push_back(next);
        current = next;
    }
    return path;
}

PricePath process_path(const ProcessParams& params, std::size_t n_steps, double dt, Rng& rng) {
    if (const auto* gbm = std::get_if<GbmParams>(&params)) return gbm_path(*gbm, n_steps, dt, rng);
    return vg_path(std::get<VgParams>(params), n_steps, dt, rng);
}

GbmParams calibrate_gbm(const PricePath& prices) {
    if (prices.prices.size() < 30) {
        throw DataError("calibrate_gbm: need at least 30 prices");
    }
    const auto r = log_returns(prices);
    const auto cm = central_moments(r);
    GbmParams out;
    out.sigma = std::sqrt(cm.m2 / prices.dt);
    out.mu = cm.m1 / prices.dt + 0.5 * out.sigma * out.sigma;
    out.s0 = prices.prices.front();
    return out;
}

VgParams calibrate_vg(const PricePath& prices) {
    if (prices.prices.size() < 250) {
        throw DataError("calibrate_vg: need at least 250 prices");
    }
    const double dt = prices.dt;
    const auto r = log_returns(prices);
    const auto cm = central_moments(r);
    const double n = static_cast<double>(r.size());

    if (!(cm.m2 > 0.0)) {
        throw DataError("calibrate_vg: zero return variance, process degenerate");
    }
    const double skew = cm.m3 / std::pow(cm.m2, 1.5);
    const double ekurt = cm.m4 / (cm.m2 * cm.m2) - 3.0;

    auto moment_string = [&] {
        std::ostringstream os;
        os << "mean=" << cm.m1 << " var=" << cm.m2 << " skew=" << skew << " ekurt=" << ekurt;
        return os.str();
    };

    // Gamma-clock variance from excess kurtosis. A clearly platykurtic
    // sample (more than 3 standard errors below Gaussian) has no VG fit.
    const double se_ekurt = std::sqrt(24.0 / n);
    if (ekurt < -3.0 * se_ekurt) {
        throw DataError("calibrate_vg: negative implied nu (" + moment_string() + ")");
    }

    constexpr double kNuFloor = 1e-12;
    VgParams out;
    out.s0 = prices.prices.front();
    out.nu = std::max(ekurt, 0.0) * dt / 3.0;
    if (out.nu < kNuFloor) {
        // Brownian limit
        out.nu = kNuFloor;
        out.theta = 0.0;
        out.sigma = std::sqrt(cm.m2 / dt);
        out.mu = cm.m1 / dt - out.theta - out.omega();
        return out;
    }

    const double sigma0 = std::sqrt(cm.m2 / dt);
    out.theta = skew * sigma0 * std::sqrt(dt) / (3.0 * out.nu);
    const double sigma_sq = cm.m2 / dt - out.theta * out.theta * out.nu;
    if (!(sigma_sq > 0.0)) {
        throw DataError("calibrate_vg: implied sigma^2 <= 0 (" + moment_string() + ")");
    }
    out.sigma = std::sqrt(sigma_sq);

    const double omega_arg = 1.0 - out.theta * out.nu - 0.5 * out.sigma * out.sigma * out.nu;
    if (!(omega_arg > 0.0)) {
        throw DataError("calibrate_vg: infeasible omega argument (" + moment_string() + ")");
    }
    out.mu = cm.m1 / dt - out.theta - out.omega();
    return out;
}

GbmParams gbm_preset(Regime r) {
    switch (r) {
        case Regime::Up: return {0.254, 0.109, 1051.344};
        case Regime::No: return {0.016, 0.158, 1051.344};
        case Regime::Down: return {-0.440, 0.441, 1051.344};
    }
    return {};
}

VgParams vg_preset(Regime r) {
    switch (r) {
        case Regime::Up: return {0.254, 0.109, -0.742, 3.93e-4, 1051.344};
        case Regime::No: return {0.016, 0.158, -0.287, 2.44e-4, 1051.344};
        case Regime::Down: return {-0.440, 0.441, -0.410, 2.74e-4, 1051.344};
    }
    return {};
}

RegimeModel regime_model_preset(bool use_vg) {
    RegimeModel model;
    for (auto r : {Regime::Up, Regime::No, Regime::Down}) {
        const auto i = static_cast<std::size_t>(r);
        if (use_vg) {
            model.regimes[i] = vg_preset(r);
        } else {
            model.regimes[i] = gbm_preset(r);
        }
    }
    model.self_probs = {0.95, 0.90, 0.95};
    model.initial = Regime::No;
    return model;
}

} // namespace qtrade
