#include "qtrade/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qtrade/errors.hpp"
#include "qtrade/io_format.hpp"

namespace qtrade {

namespace {

constexpr double kTradingDays = 252.0;

double population_std(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double var = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        var += d * d;
    }
    return std::sqrt(var / double(xs.size()));
}

} // namespace

std::vector<double> equity_curve(std::span<const double> daily_returns) {
    std::vector<double> equity;
    equity.reserve(daily_returns.size() + 1);
    equity.push_back(1.0);
    for (std::size_t i = 0; i < daily_returns.size(); ++i) {
        const double r = daily_returns[i];
        if (!std::isfinite(r)) throw DataError("equity_curve: non-finite return");
        if (r <= -1.0)
            throw DataError("equity_curve: return <= -100% at day " + std::to_string(i) +
                            " wipes out the position");
        equity.push_back(equity.back() * (1.0 + r));
    }
    return equity;
}

MetricsReport compute_metrics(std::span<const double> daily_returns) {
    const std::size_t n = daily_returns.size();
    if (n < 2) throw DataError("compute_metrics: need at least 2 daily returns");
    for (double r : daily_returns)
        if (!std::isfinite(r)) throw DataError("compute_metrics: non-finite return");

    MetricsReport rep;

    double mean = 0.0;
    for (double r : daily_returns) mean += r;
    mean /= double(n);
    rep.e_r = kTradingDays * mean;
    rep.std_r = std::sqrt(kTradingDays) * population_std(daily_returns);

    std::vector<double> negatives, positives;
    for (double r : daily_returns) {
        if (r < 0.0) negatives.push_back(r);
        else if (r > 0.0) positives.push_back(r);
    }
    rep.dd = negatives.empty() ? 0.0 : std::sqrt(kTradingDays) * population_std(negatives);

    const std::vector<double> equity = equity_curve(daily_returns);
    double peak = 0.0;
    double mdd = 0.0;
    for (double e : equity) {
        peak = std::max(peak, e);
        mdd = std::max(mdd, 1.0 - e / peak);
    }
    rep.mdd = mdd;

    if (rep.std_r > 0.0) rep.sharpe = rep.e_r / rep.std_r;
    if (rep.dd > 0.0) rep.sortino = rep.e_r / rep.dd;
    if (rep.mdd > 0.0) rep.calmar = rep.e_r / rep.mdd;

    rep.pct_positive = double(positives.size()) / double(n);

    if (!negatives.empty()) {
        double mean_neg = 0.0;
        for (double r : negatives) mean_neg += r;
        mean_neg /= double(negatives.size());
        double mean_pos = 0.0;
        if (!positives.empty()) {
            for (double r : positives) mean_pos += r;
            mean_pos /= double(positives.size());
        }
        rep.avg_p_over_avg_l = mean_pos / std::abs(mean_neg);
        rep.win_count_over_loss_count =
            double(positives.size()) / double(negatives.size());
    }
    return rep;
}

std::string format_metrics_table(const std::vector<std::string>& row_names,
                                 const std::vector<MetricsReport>& rows) {
    if (row_names.size() != rows.size())
        throw std::invalid_argument("format_metrics_table: name/report count mismatch");
    static const char* kCols[] = {"E(R)",   "Std(R)", "DD",      "Sharpe",
                                  "Sortino", "MDD",    "Calmar",  "% +ve",
                                  "AveP/AveL", "Win/Loss #"};
    auto cell = [](const std::optional<double>& v) {
        return v ? fmt_num(*v) : std::string("-");
    };
    std::vector<std::vector<std::string>> table;
    table.push_back({""});
    for (const char* c : kCols) table.back().push_back(c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const MetricsReport& r = rows[i];
        table.push_back({row_names[i], fmt_num(r.e_r), fmt_num(r.std_r), fmt_num(r.dd),
                         cell(r.sharpe), cell(r.sortino), fmt_num(r.mdd), cell(r.calmar),
                         fmt_num(r.pct_positive), cell(r.avg_p_over_avg_l),
                         cell(r.win_count_over_loss_count)});
    }
    std::vector<std::size_t> widths(table[0].size(), 0);
    for (const auto& row : table)
        for (std::size_t j = 0; j < row.size(); ++j)
            widths[j] = std::max(widths[j], row[j].size());
    std::ostringstream os;
    for (const auto& row : table) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << "  ";
            os << row[j] << std::string(widths[j] - row[j].size(), ' ');
        }
        os << '\n';
    }
    return os.str();
}

} // namespace qtrade
