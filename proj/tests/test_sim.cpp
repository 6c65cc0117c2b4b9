#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qtrade/errors.hpp"
#include "qtrade/rng.hpp"
#include "qtrade/sim.hpp"

using namespace qtrade;

namespace {
constexpr double kDay = 1.0 / 252.0;

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size());
}

std::vector<double> log_increments(const PricePath& p) {
    std::vector<double> r;
    for (std::size_t i = 1; i < p.prices.size(); ++i) {
        r.push_back(std::log(p.prices[i] / p.prices[i - 1]));
    }
    return r;
}
} // namespace

TEST_CASE("gamma sampler mean matches shape*scale at the preset clock parameters") {
    // shape = dt/nu with nu = 2.44e-4: mean of g must be dt = 5/252 when
    // aggregated over 5-day units; equivalently one draw has mean dt.
    Rng rng(3);
    const double nu = 2.44e-4;
    const double shape = 5.0 / 252.0 / nu; // about 81.3
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_gamma(shape, nu, rng);
    const double true_mean = shape * nu;
    const double se = std::sqrt(shape * nu * nu / n);
    CHECK(std::fabs(sum / n - true_mean) < 4.0 * se);
    CHECK(true_mean == doctest::Approx(5.0 / 252.0));
}

TEST_CASE("zero-volatility gbm is the exact exponential trend") {
    GbmParams p{0.254, 0.0, 1051.344};
    Rng rng(1);
    const auto path = gbm_path(p, 252, kDay, rng);
    REQUIRE(path.prices.size() == 253);
    CHECK(path.prices[0] == 1051.344);
    for (std::size_t t = 0; t < path.prices.size(); ++t) {
        const double expect = 1051.344 * std::exp(0.254 * kDay * double(t));
        CHECK(path.prices[t] == doctest::Approx(expect).epsilon(1e-9));
    }
    CHECK(path.prices.back() == doctest::Approx(1051.344 * std::exp(0.254)).epsilon(1e-9));
    CHECK(path.regime_labels.empty());
    CHECK(path.dt == kDay);
}

TEST_CASE("gbm log returns have the lognormal mean and variance") {
    // no-trend parameters; one-year paths
    GbmParams p{0.016, 0.158, 100.0};
    const int n_paths = 3000;
    std::vector<double> total_log(n_paths);
    for (int i = 0; i < n_paths; ++i) {
        Rng rng = Rng::stream(77, std::uint64_t(i));
        const auto path = gbm_path(p, 252, kDay, rng);
        total_log[i] = std::log(path.prices.back() / path.prices.front());
    }
    const double true_mean = (p.mu - 0.5 * p.sigma * p.sigma) * 1.0;
    const double true_var = p.sigma * p.sigma * 1.0;
    const double se_mean = std::sqrt(true_var / n_paths);
    const double se_var = true_var * std::sqrt(2.0 / n_paths);
    CHECK(std::fabs(mean_of(total_log) - true_mean) < 3.0 * se_mean);
    CHECK(std::fabs(var_of(total_log) - true_var) < 4.0 * se_var);
}

TEST_CASE("gbm paths are reproducible per seed and distinct across seeds") {
    GbmParams p{0.1, 0.2, 50.0};
    Rng a(5), b(5), c(6);
    const auto pa = gbm_path(p, 100, kDay, a);
    const auto pb = gbm_path(p, 100, kDay, b);
    const auto pc = gbm_path(p, 100, kDay, c);
    CHECK(pa.prices == pb.prices);
    CHECK(pa.prices != pc.prices);
}

TEST_CASE("vg omega matches the closed form") {
    VgParams p{0.0, 0.3, -0.2, 0.1, 1.0};
    // (1/0.1) * ln(1 + 0.02 - 0.0045), evaluated independently to 17 digits
    CHECK(p.omega() == doctest::Approx(0.15381102038302323).epsilon(1e-14));
}

TEST_CASE("vg omega throws when the log argument is non-positive") {
    VgParams p{0.0, 1.0, 0.9, 1.2, 1.0}; // 1 - 1.08 - 0.6 < 0
    CHECK_THROWS_AS(p.omega(), std::domain_error);
    CHECK_THROWS(p.validate());
}

TEST_CASE("degenerate vg with sigma=0 theta=0 grows at exactly mu") {
    VgParams p{0.07, 0.0, 0.0, 1e-4, 200.0};
    CHECK(p.omega() == 0.0);
    Rng rng(9);
    const auto path = vg_path(p, 504, kDay, rng);
    for (std::size_t t = 0; t < path.prices.size(); ++t) {
        const double expect = 200.0 * std::exp(0.07 * kDay * double(t));
        CHECK(path.prices[t] == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("vg increments match the analytic mean and variance") {
    // mean per step = (mu + omega + theta) dt; variance = (sigma^2 + theta^2 nu) dt
    VgParams p{0.016, 0.158, -0.287, 2.44e-4, 1051.344};
    Rng rng(21);
    const auto path = vg_path(p, 40000, kDay, rng);
    const auto r = log_increments(path);
    const double true_mean = (p.mu + p.omega() + p.theta) * kDay;
    const double true_var = (p.sigma * p.sigma + p.theta * p.theta * p.nu) * kDay;
    const double n = double(r.size());
    const double se_mean = std::sqrt(true_var / n);
    // fourth-moment-based se for the sample variance: excess kurtosis 3 nu/dt
    const double ekurt = 3.0 * p.nu / kDay;
    const double se_var = true_var * std::sqrt((2.0 + ekurt) / n);
    CHECK(std::fabs(mean_of(r) - true_mean) < 3.0 * se_mean);
    CHECK(std::fabs(var_of(r) - true_var) < 4.0 * se_var);
}

TEST_CASE("vg daily returns are leptokurtic in line with the gamma clock") {
    VgParams p{-0.440, 0.441, -0.410, 2.74e-4, 1051.344};
    Rng rng(23);
    const auto path = vg_path(p, 200000, kDay, rng);
    const auto r = log_increments(path);
    const double m = mean_of(r);
    double m2 = 0.0, m4 = 0.0;
    for (double x : r) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = double(r.size());
    m2 /= n;
    m4 /= n;
    const double ekurt = m4 / (m2 * m2) - 3.0;
    const double expect = 3.0 * p.nu / kDay; // about 0.207
    // kurtosis estimator noise: se ~ sqrt(24/n) for near-Gaussian laws
    const double se = std::sqrt(24.0 / n);
    CHECK(ekurt > 0.0);
    CHECK(std::fabs(ekurt - expect) < 5.0 * se);
}

TEST_CASE("transition rows follow the self-probability layout") {
    RegimeModel m = regime_model_preset(false);
    const auto up = m.transition_row(Regime::Up);
    const auto no = m.transition_row(Regime::No);
    const auto down = m.transition_row(Regime::Down);
    CHECK(up[0] == doctest::Approx(0.95));
    CHECK(up[1] == doctest::Approx(0.05));
    CHECK(up[2] == 0.0);
    CHECK(no[0] == doctest::Approx(0.05));
    CHECK(no[1] == doctest::Approx(0.90));
    CHECK(no[2] == doctest::Approx(0.05));
    CHECK(down[0] == 0.0);
    CHECK(down[1] == doctest::Approx(0.05));
    CHECK(down[2] == doctest::Approx(0.95));
    for (const auto& row : {up, no, down}) {
        CHECK(row[0] + row[1] + row[2] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("regime paths are fully labeled and never jump across the middle state") {
    RegimeModel m = regime_model_preset(false);
    Rng rng(31);
    const auto path = regime_path(m, 5000, kDay, rng);
    REQUIRE(path.prices.size() == 5001);
    REQUIRE(path.regime_labels.size() == path.prices.size());
    CHECK(path.regime_labels[0] == Regime::No);
    for (std::size_t t = 1; t < path.regime_labels.size(); ++t) {
        const Regime a = path.regime_labels[t - 1];
        const Regime b = path.regime_labels[t];
        const bool direct_jump = (a == Regime::Up && b == Regime::Down) ||
                                 (a == Regime::Down && b == Regime::Up);
        CHECK_FALSE(direct_jump);
    }
}

TEST_CASE("regime occupancy is roughly balanced at the preset probabilities") {
    // the stationary law of the preset chain is uniform; a coarse check
    // here, the precise one runs in the acceptance gate
    RegimeModel m = regime_model_preset(false);
    Rng rng(33);
    const auto path = regime_path(m, 20000, kDay, rng);
    std::array<int, 3> counts{0, 0, 0};
    for (Regime r : path.regime_labels) counts[std::size_t(r)]++;
    for (int c : counts) {
        CHECK(double(c) / double(path.regime_labels.size()) > 1.0 / 3.0 - 0.12);
        CHECK(double(c) / double(path.regime_labels.size()) < 1.0 / 3.0 + 0.12);
    }
}

TEST_CASE("pinned self-probabilities freeze the regime") {
    RegimeModel m = regime_model_preset(false);
    m.self_probs = {1.0, 1.0, 1.0};
    m.initial = Regime::Down;
    Rng rng(35);
    const auto path = regime_path(m, 300, kDay, rng);
    for (Regime r : path.regime_labels) CHECK(r == Regime::Down);
}

TEST_CASE("process_path dispatches on the parameter variant") {
    Rng a(41), b(41);
    GbmParams gp{0.1, 0.2, 75.0};
    const auto direct = gbm_path(gp, 50, kDay, a);
    const auto via_variant = process_path(ProcessParams{gp}, 50, kDay, b);
    CHECK(direct.prices == via_variant.prices);
}

TEST_CASE("gbm calibration recovers hand-computed moments exactly") {
    // 61 prices whose log returns alternate 0.011 / -0.009: population
    // mean 0.001 and stdev 0.01, so sigma = 0.01*sqrt(252) and
    // mu = 0.252 + sigma^2/2, worked out by hand
    PricePath path;
    path.dt = kDay;
    double log_p = std::log(100.0);
    path.prices.push_back(100.0);
    for (int i = 0; i < 60; ++i) {
        log_p += (i % 2 == 0) ? 0.011 : -0.009;
        path.prices.push_back(std::exp(log_p));
    }
    const GbmParams fit = calibrate_gbm(path);
    CHECK(fit.sigma == doctest::Approx(0.15874507866387547).epsilon(1e-10));
    CHECK(fit.mu == doctest::Approx(0.2646).epsilon(1e-10));
    CHECK(fit.s0 == 100.0);
}

TEST_CASE("gbm calibration round-trips simulated up-trend parameters") {
    const GbmParams truth = gbm_preset(Regime::Up);
    Rng rng(47);
    const auto path = gbm_path(truth, 2520, kDay, rng); // ten years
    const GbmParams fit = calibrate_gbm(path);
    CHECK(std::fabs(fit.sigma - truth.sigma) / truth.sigma < 0.05);
    // standard error of the annualized drift estimate over T years
    const double se_mu = truth.sigma / std::sqrt(10.0);
    CHECK(std::fabs(fit.mu - truth.mu) < 2.0 * se_mu);
    CHECK(fit.s0 == path.prices.front());
}

TEST_CASE("gbm calibration error shrinks with sample size") {
    const GbmParams truth{0.05, 0.2, 100.0};
    double err_short = 0.0, err_long = 0.0;
    const int trials = 20;
    for (int i = 0; i < trials; ++i) {
        Rng r1 = Rng::stream(53, std::uint64_t(i));
        Rng r2 = Rng::stream(54, std::uint64_t(i));
        err_short += std::fabs(calibrate_gbm(gbm_path(truth, 252, kDay, r1)).sigma - truth.sigma);
        err_long += std::fabs(calibrate_gbm(gbm_path(truth, 252 * 16, kDay, r2)).sigma - truth.sigma);
    }
    CHECK(err_long < err_short); // 16x data should clearly beat 1x on average
}

TEST_CASE("gbm calibration requires thirty prices") {
    PricePath path;
    path.dt = kDay;
    for (int i = 0; i < 29; ++i) path.prices.push_back(100.0 + i);
    CHECK_THROWS_AS(calibrate_gbm(path), DataError);
    path.prices.push_back(130.0);
    CHECK_NOTHROW(calibrate_gbm(path));
}

TEST_CASE("vg calibration round-trips simulated no-trend parameters") {
    // nu is a fourth-moment quantity: one 20-year path carries ~37%
    // relative noise, so check the typical (median) error of five paths
    // against the 50% band and every path against a 3-sigma outer band.
    const VgParams truth = vg_preset(Regime::No);
    std::vector<double> nu_errs;
    for (int i = 0; i < 5; ++i) {
        Rng rng = Rng::stream(59, std::uint64_t(i));
        const auto path = vg_path(truth, 5040, kDay, rng); // twenty years
        const VgParams fit = calibrate_vg(path);
        CHECK(std::fabs(fit.sigma - truth.sigma) / truth.sigma < 0.10);
        CHECK(fit.nu > 0.0);
        const double rel = std::fabs(fit.nu - truth.nu) / truth.nu;
        CHECK(rel < 1.2); // ~3 se outer bound
        nu_errs.push_back(rel);
    }
    std::sort(nu_errs.begin(), nu_errs.end());
    CHECK(nu_errs[2] < 0.50);
}

TEST_CASE("vg calibration pins down a strongly leptokurtic sample") {
    const VgParams truth{0.1, 0.15, -0.1, 0.002, 100.0};
    Rng rng(61);
    const auto path = vg_path(truth, 20000, kDay, rng);
    const VgParams fit = calibrate_vg(path);
    // per-step excess kurtosis 3 nu / dt = 1.512 is far above estimator noise
    CHECK(std::fabs(fit.nu - truth.nu) / truth.nu < 0.25);
    CHECK(std::fabs(fit.sigma - truth.sigma) / truth.sigma < 0.05);
    CHECK(std::fabs(fit.theta - truth.theta) < 0.1);
}

TEST_CASE("vg calibration of a gaussian sample degenerates to the brownian limit") {
    const GbmParams gauss{0.05, 0.2, 100.0};
    Rng rng(67);
    const auto path = gbm_path(gauss, 5000, kDay, rng);
    const VgParams fit = calibrate_vg(path);
    // nu collapses to (at most within kurtosis noise of) zero and sigma
    // matches the Gaussian volatility
    CHECK(fit.nu < 3.0 * std::sqrt(24.0 / 5000.0) * (1.0 / 252.0) / 3.0 + 1e-12);
    CHECK(std::fabs(fit.sigma - gauss.sigma) / gauss.sigma < 0.05);
    CHECK_NOTHROW(fit.validate());
}

TEST_CASE("vg calibration rejects clearly platykurtic input") {
    // log returns cycling { -c, 0, +c } have excess kurtosis -1.5, far
    // below anything a gamma time change can produce
    PricePath path;
    path.dt = kDay;
    double log_p = std::log(100.0);
    path.prices.push_back(100.0);
    const double c = 0.01;
    for (int i = 0; i < 300; ++i) {
        const int phase = i % 3;
        log_p += (phase == 0) ? -c : (phase == 1) ? 0.0 : c;
        path.prices.push_back(std::exp(log_p));
    }
    CHECK_THROWS_AS(calibrate_vg(path), DataError);
}

TEST_CASE("vg calibration requires 250 prices") {
    PricePath path;
    path.dt = kDay;
    for (int i = 0; i < 249; ++i) path.prices.push_back(100.0 + 0.1 * i);
    CHECK_THROWS_AS(calibrate_vg(path), DataError);
}

TEST_CASE("presets carry the published per-regime parameters") {
    CHECK(gbm_preset(Regime::Up).mu == 0.254);
    CHECK(gbm_preset(Regime::Up).sigma == 0.109);
    CHECK(gbm_preset(Regime::No).mu == 0.016);
    CHECK(gbm_preset(Regime::No).sigma == 0.158);
    CHECK(gbm_preset(Regime::Down).mu == -0.440);
    CHECK(gbm_preset(Regime::Down).sigma == 0.441);

    CHECK(vg_preset(Regime::Up).theta == -0.742);
    CHECK(vg_preset(Regime::Up).nu == 3.93e-4);
    CHECK(vg_preset(Regime::No).theta == -0.287);
    CHECK(vg_preset(Regime::No).nu == 2.44e-4);
    CHECK(vg_preset(Regime::Down).theta == -0.410);
    CHECK(vg_preset(Regime::Down).nu == 2.74e-4);

    for (Regime r : {Regime::Up, Regime::No, Regime::Down}) {
        CHECK(gbm_preset(r).s0 == 1051.344);
        CHECK(vg_preset(r).s0 == 1051.344);
        CHECK_NOTHROW(gbm_preset(r).validate());
        CHECK_NOTHROW(vg_preset(r).validate());
    }

    const RegimeModel m = regime_model_preset(true);
    CHECK(m.self_probs[0] == 0.95);
    CHECK(m.self_probs[1] == 0.90);
    CHECK(m.self_probs[2] == 0.95);
    CHECK(m.initial == Regime::No);
    CHECK(std::holds_alternative<VgParams>(m.regimes[0]));
    CHECK(std::holds_alternative<GbmParams>(regime_model_preset(false).regimes[0]));
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("validation rejects out-of-domain parameters") {
    CHECK_THROWS(GbmParams{0.1, -0.1, 1.0}.validate());
    CHECK_THROWS(GbmParams{0.1, 0.1, 0.0}.validate());
    CHECK_THROWS(VgParams{0.1, 0.1, 0.0, 0.0, 1.0}.validate());  // nu = 0
    CHECK_THROWS(VgParams{0.1, 0.1, 0.0, -1e-4, 1.0}.validate()); // nu < 0
    Rng rng(1);
    GbmParams ok{0.1, 0.1, 1.0};
    CHECK_THROWS(gbm_path(ok, 0, kDay, rng));
    CHECK_THROWS(gbm_path(ok, 10, 0.0, rng));
    RegimeModel bad = regime_model_preset(false);
    bad.self_probs[1] = 1.5;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("path validation catches corrupt series") {
    PricePath p;
    p.dt = kDay;
    CHECK_THROWS(p.validate()); // empty
    p.prices = {100.0};
    CHECK_THROWS(p.validate()); // single price
    p.prices = {100.0, -5.0};
    CHECK_THROWS(p.validate()); // non-positive
    p.prices = {100.0, 101.0};
    CHECK_NOTHROW(p.validate());
    p.regime_labels = {Regime::No};
    CHECK_THROWS(p.validate()); // label length mismatch
}
