#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qtrade/agent.hpp"
#include "qtrade/backtest.hpp"
#include "qtrade/sim.hpp"

namespace qtrade {

enum class AssetClass { EquityIndex, FixedIncome, Forex, Commodity };

AssetClass asset_class_from_string(const std::string& s);
const char* to_string(AssetClass c);

// One continuous-futures close series, dates strictly increasing.
struct ContractSeries {
    std::string symbol;
    AssetClass asset_class = AssetClass::EquityIndex;
    std::vector<std::string> dates; // ISO-8601
    std::vector<double> prices;
    std::vector<std::string> warnings; // e.g. duplicate-date rows superseded
};

// Panel of per-symbol price columns on the target symbol's calendar.
struct AlignedPanel {
    std::vector<std::string> dates;
    std::vector<std::string> symbols;
    std::vector<std::vector<double>> prices; // prices[symbol][day]
    std::size_t target = 0;                  // index into symbols
};

// Accepts `date,price` or `date,open,high,low,close` (close used).
// Rows are sorted by date; duplicate dates keep the last row in file
// order and add a warning. Malformed rows fail with their line number.
ContractSeries load_csv(const std::string& path, const std::string& symbol);

// Target's calendar; other symbols forward-filled from their most recent
// observation at or before each target date. Target dates older than any
// symbol's first observation are dropped.
AlignedPanel align_panel(const std::vector<ContractSeries>& series,
                         const std::string& target_symbol);

// Simulated-path CSV: date_index,price,regime with regime in {U,N,D,-}.
void write_path_csv(const std::string& path, const PricePath& price_path);
PricePath read_path_csv(const std::string& path);

// Writes metrics.csv, equity.csv, positions.csv and equity.svg into
// out_dir; returns the created paths in write order.
std::vector<std::string> write_reports(const ExperimentResult& result,
                                       const std::string& out_dir);

// step,eps,loss,episode_return; absent values are empty cells.
void write_training_log(const std::string& path, const std::vector<TrainLogRow>& log);

// path_index,agent_sharpe,benchmark_sharpe per evaluation path.
void write_histogram_csv(const std::string& path, const HistogramStudyResult& result);

// Parse back one metrics.csv produced by write_reports (round-trip tests
// and the report subcommand).
struct MetricsCsvRow {
    std::string model, variant;
    MetricsReport report;
};
std::vector<MetricsCsvRow> read_metrics_csv(const std::string& path);

} // namespace qtrade
