#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qtrade {

// Nine performance statistics of a daily strategy-return series, annualized
// with a 252-day year and a zero risk-free rate. Ratios whose denominator
// is zero are reported absent rather than as infinities.
struct MetricsReport {
    double e_r = 0.0;   // 252 * mean daily return
    double std_r = 0.0; // sqrt(252) * population std
    double dd = 0.0;    // sqrt(252) * population std of negative returns, 0 if none
    std::optional<double> sharpe;  // e_r / std_r when std_r > 0
    std::optional<double> sortino; // e_r / dd when dd > 0
    double mdd = 0.0;   // max peak-to-trough drawdown of the compounded curve
    std::optional<double> calmar;  // e_r / mdd when mdd > 0
    double pct_positive = 0.0;     // fraction of strictly positive days
    // Headline profit/loss ratio: mean positive return / |mean negative return|.
    std::optional<double> avg_p_over_avg_l;
    // Companion count ratio (#positive days / #negative days), reported
    // alongside because the name is used both ways in practice.
    std::optional<double> win_count_over_loss_count;
};

// E_0 = 1, E_t = E_{t-1} * (1 + r_t). Throws DataError when any return
// is <= -1 (equity cannot fall through zero at unit leverage).
std::vector<double> equity_curve(std::span<const double> daily_returns);

// Throws DataError on fewer than 2 returns or any non-finite value.
MetricsReport compute_metrics(std::span<const double> daily_returns);

// Aligned plain-text rendering, one metric per line (test/report output).
std::string format_metrics_table(const std::vector<std::string>& row_names,
                                 const std::vector<MetricsReport>& rows);

} // namespace qtrade
