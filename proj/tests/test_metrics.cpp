#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qtrade/errors.hpp"
#include "qtrade/metrics.hpp"
#include "qtrade/rng.hpp"

using namespace qtrade;

namespace {
// Brute-force oracle: every statistic recomputed with straight loops and
// an O(n^2) drawdown scan over all (peak, trough) pairs.
struct Oracle {
    double e_r, std_r, dd, mdd, pct_pos;
};

Oracle brute_force(const std::vector<double>& r) {
    const double n = double(r.size());
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var /= n;

    std::vector<double> neg;
    int pos = 0;
    for (double x : r) {
        if (x < 0.0) neg.push_back(x);
        if (x > 0.0) ++pos;
    }
    double dvar = 0.0;
    if (!neg.empty()) {
        double dmean = 0.0;
        for (double x : neg) dmean += x;
        dmean /= double(neg.size());
        for (double x : neg) dvar += (x - dmean) * (x - dmean);
        dvar /= double(neg.size());
    }

    // equity curve with the seed point, then all pairs s <= t
    std::vector<double> eq{1.0};
    for (double x : r) eq.push_back(eq.back() * (1.0 + x));
    double mdd = 0.0;
    for (std::size_t s = 0; s < eq.size(); ++s) {
        for (std::size_t t = s; t < eq.size(); ++t) {
            mdd = std::max(mdd, 1.0 - eq[t] / eq[s]);
        }
    }

    Oracle o;
    o.e_r = 252.0 * mean;
    o.std_r = std::sqrt(252.0 * var);
    o.dd = neg.empty() ? 0.0 : std::sqrt(252.0 * dvar);
    o.mdd = mdd;
    o.pct_pos = pos / n;
    return o;
}
} // namespace

TEST_CASE("equity curve compounds from one") {
    const std::vector<double> r{0.10, -0.50};
    const auto eq = equity_curve(r);
    REQUIRE(eq.size() == 3);
    CHECK(eq[0] == 1.0);
    CHECK(eq[1] == doctest::Approx(1.10).epsilon(1e-15));
    CHECK(eq[2] == doctest::Approx(0.55).epsilon(1e-15));
}

TEST_CASE("equity curve rejects total-loss and corrupt returns") {
    CHECK_THROWS_AS(equity_curve(std::vector<double>{0.1, -1.0}), DataError);
    CHECK_THROWS_AS(equity_curve(std::vector<double>{0.1, -1.5}), DataError);
    const double nan = std::nan("");
    CHECK_THROWS_AS(equity_curve(std::vector<double>{0.1, nan}), DataError);
}

TEST_CASE("a crash after a rally is half the peak") {
    const MetricsReport m = compute_metrics(std::vector<double>{0.10, -0.50});
    CHECK(m.mdd == doctest::Approx(0.5).epsilon(1e-15)); // 1 - 0.55/1.10
    CHECK(m.pct_positive == 0.5);
    REQUIRE(m.avg_p_over_avg_l.has_value());
    CHECK(*m.avg_p_over_avg_l == doctest::Approx(0.2).epsilon(1e-15));
    REQUIRE(m.win_count_over_loss_count.has_value());
    CHECK(*m.win_count_over_loss_count == 1.0);
}

TEST_CASE("three-day example matches hand arithmetic") {
    // mean 0.02/3, population stdev via numpy: std_r = 0.3261901286060019
    const MetricsReport m = compute_metrics(std::vector<double>{0.01, -0.02, 0.03});
    CHECK(m.e_r == doctest::Approx(1.68).epsilon(1e-12));
    CHECK(m.std_r == doctest::Approx(0.3261901286060019).epsilon(1e-12));
    CHECK(m.pct_positive == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    REQUIRE(m.avg_p_over_avg_l.has_value());
    CHECK(*m.avg_p_over_avg_l == doctest::Approx(1.0).epsilon(1e-12)); // mean(0.01,0.03)/0.02
    // single negative return: downside deviation of one point is 0
    CHECK(m.dd == 0.0);
    CHECK_FALSE(m.sortino.has_value());
    REQUIRE(m.sharpe.has_value());
    CHECK(*m.sharpe == doctest::Approx(1.68 / 0.3261901286060019).epsilon(1e-12));
    CHECK(m.mdd == doctest::Approx(0.02).epsilon(1e-12));
    REQUIRE(m.calmar.has_value());
    CHECK(*m.calmar == doctest::Approx(1.68 / 0.019999999999999962).epsilon(1e-9));
}

TEST_CASE("all-positive series have zero drawdown and absent loss ratios") {
    const MetricsReport m = compute_metrics(std::vector<double>{0.01, 0.02, 0.005});
    CHECK(m.mdd == 0.0);
    CHECK(m.dd == 0.0);
    CHECK(m.pct_positive == 1.0);
    CHECK_FALSE(m.sortino.has_value());
    CHECK_FALSE(m.calmar.has_value());
    CHECK_FALSE(m.avg_p_over_avg_l.has_value());
    CHECK_FALSE(m.win_count_over_loss_count.has_value());
    CHECK(m.sharpe.has_value());
}

TEST_CASE("constant zero returns leave every ratio absent") {
    const MetricsReport m = compute_metrics(std::vector<double>{0.0, 0.0, 0.0});
    CHECK(m.e_r == 0.0);
    CHECK(m.std_r == 0.0);
    CHECK(m.pct_positive == 0.0);
    CHECK_FALSE(m.sharpe.has_value());
    CHECK_FALSE(m.sortino.has_value());
    CHECK_FALSE(m.calmar.has_value());
}

TEST_CASE("two-point case pins the annualization constants") {
    // returns {1, -something small}: mean and population std known exactly
    const MetricsReport m = compute_metrics(std::vector<double>{0.03, 0.01});
    CHECK(m.e_r == doctest::Approx(252.0 * 0.02).epsilon(1e-14));
    CHECK(m.std_r == doctest::Approx(std::sqrt(252.0) * 0.01).epsilon(1e-12));
}

TEST_CASE("metrics agree with the brute-force oracle on random series") {
    std::mt19937_64 gen(12345); // independent generator, not the project rng
    std::normal_distribution<double> dist(0.0005, 0.02);
    std::uniform_int_distribution<int> len(2, 500);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> r(std::size_t(len(gen)));
        for (double& x : r) x = std::max(dist(gen), -0.9);
        const Oracle o = brute_force(r);
        const MetricsReport m = compute_metrics(r);
        CAPTURE(trial);
        CHECK(m.e_r == doctest::Approx(o.e_r).epsilon(1e-12));
        CHECK(m.std_r == doctest::Approx(o.std_r).epsilon(1e-12));
        CHECK(m.dd == doctest::Approx(o.dd).epsilon(1e-12));
        CHECK(m.mdd == doctest::Approx(o.mdd).epsilon(1e-12));
        CHECK(m.pct_positive == doctest::Approx(o.pct_pos).epsilon(1e-12));
        if (m.sharpe) CHECK(*m.sharpe == doctest::Approx(o.e_r / o.std_r).epsilon(1e-12));
        if (m.sortino) CHECK(*m.sortino == doctest::Approx(o.e_r / o.dd).epsilon(1e-12));
        if (m.calmar) CHECK(*m.calmar == doctest::Approx(o.e_r / o.mdd).epsilon(1e-12));
    }
}

TEST_CASE("scaling returns by a power of two scales location metrics exactly") {
    const std::vector<double> r{0.012, -0.007, 0.004, -0.001, 0.02};
    std::vector<double> scaled = r;
    for (double& x : scaled) x *= 0.25;
    const MetricsReport a = compute_metrics(r);
    const MetricsReport b = compute_metrics(scaled);
    CHECK(b.e_r == 0.25 * a.e_r);
    CHECK(b.std_r == doctest::Approx(0.25 * a.std_r).epsilon(1e-14));
    CHECK(b.dd == doctest::Approx(0.25 * a.dd).epsilon(1e-14));
    CHECK(b.pct_positive == a.pct_positive);
    // sharpe is scale-free
    CHECK(*b.sharpe == doctest::Approx(*a.sharpe).epsilon(1e-12));
}

TEST_CASE("moment metrics ignore ordering but drawdown does not") {
    const std::vector<double> r{0.03, 0.01, -0.02, -0.04, 0.05};
    std::vector<double> rev(r.rbegin(), r.rend());
    const MetricsReport a = compute_metrics(r);
    const MetricsReport b = compute_metrics(rev);
    CHECK(a.e_r == doctest::Approx(b.e_r).epsilon(1e-14));
    CHECK(a.std_r == doctest::Approx(b.std_r).epsilon(1e-14));
    CHECK(a.dd == doctest::Approx(b.dd).epsilon(1e-14));
    CHECK(*a.sharpe == doctest::Approx(*b.sharpe).epsilon(1e-12));

    // losses-first suffers the deeper drawdown: {-0.02,-0.04,...} vs
    // drawdown interrupted by gains
    const std::vector<double> losses_first{-0.02, -0.04, 0.03, 0.01, 0.05};
    const std::vector<double> interleaved{-0.02, 0.03, -0.04, 0.01, 0.05};
    const double mdd_lf = compute_metrics(losses_first).mdd;
    const double mdd_il = compute_metrics(interleaved).mdd;
    CHECK(mdd_lf == doctest::Approx(1.0 - 0.98 * 0.96).epsilon(1e-12));
    CHECK(mdd_il < mdd_lf);
}

TEST_CASE("drawdown sees a first-day loss because the curve is seeded at one") {
    const MetricsReport m = compute_metrics(std::vector<double>{-0.10, 0.001});
    CHECK(m.mdd == doctest::Approx(0.10).epsilon(1e-12));
}

TEST_CASE("metrics validate their input") {
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{}), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{0.01}), DataError);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{0.01, inf}), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{0.01, -1.0}), DataError);
}

TEST_CASE("negative-mean series keep ratio signs") {
    const MetricsReport m = compute_metrics(std::vector<double>{-0.02, -0.01, 0.005});
    CHECK(m.e_r < 0.0);
    REQUIRE(m.sharpe.has_value());
    CHECK(*m.sharpe < 0.0);
    REQUIRE(m.sortino.has_value());
    CHECK(*m.sortino < 0.0);
    REQUIRE(m.calmar.has_value());
    CHECK(*m.calmar < 0.0);
    REQUIRE(m.win_count_over_loss_count.has_value());
    CHECK(*m.win_count_over_loss_count == 0.5);
}

TEST_CASE("the text table lists nine metrics and dashes for absent ratios") {
    const MetricsReport a = compute_metrics(std::vector<double>{0.01, -0.02, 0.03});
    const MetricsReport b = compute_metrics(std::vector<double>{0.01, 0.02, 0.03});
    const std::string table = format_metrics_table({"net", "benchmark"}, {a, b});
    CHECK(table.find("E(R)") != std::string::npos);
    CHECK(table.find("Std(R)") != std::string::npos);
    CHECK(table.find("DD") != std::string::npos);
    CHECK(table.find("Sharpe") != std::string::npos);
    CHECK(table.find("Sortino") != std::string::npos);
    CHECK(table.find("MDD") != std::string::npos);
    CHECK(table.find("Calmar") != std::string::npos);
    CHECK(table.find("% +ve") != std::string::npos);
    CHECK(table.find("AveP/AveL") != std::string::npos);
    CHECK(table.find("net") != std::string::npos);
    CHECK(table.find("benchmark") != std::string::npos);
    CHECK(table.find('-') != std::string::npos); // absent sortino prints as a dash
    CHECK_THROWS(format_metrics_table({"one"}, {a, b}));                 // length mismatch
}
