#include "qtrade/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qtrade/errors.hpp"
#include "qtrade/io_format.hpp"

namespace qtrade {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

[[noreturn]] void row_error(const std::string& path, std::size_t line_no,
                            const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& cell, const std::string& path,
                    std::size_t line_no, const char* what) {
    const std::string t = trim(cell);
    if (t.empty()) row_error(path, line_no, std::string("empty ") + what);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
        row_error(path, line_no, std::string("unparseable ") + what + " '" + t + "'");
    return v;
}

long parse_long(const std::string& cell, const std::string& path,
                std::size_t line_no, const char* what) {
    const std::string t = trim(cell);
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        row_error(path, line_no, std::string("unparseable ") + what + " '" + t + "'");
    return v;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string lower(std::string s) {
    for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open file for writing: " + path);
    return os;
}

std::string opt_cell(const std::optional<double>& v) {
    return v ? fmt_num(*v) : std::string();
}

} // namespace

AssetClass asset_class_from_string(const std::string& s) {
    const std::string t = lower(trim(s));
    if (t == "equity_index") return AssetClass::EquityIndex;
    if (t == "fixed_income") return AssetClass::FixedIncome;
    if (t == "forex") return AssetClass::Forex;
    if (t == "commodity") return AssetClass::Commodity;
    throw ConfigError("unknown asset class '" + s + "'");
}

const char* to_string(AssetClass c) {
    switch (c) {
        case AssetClass::EquityIndex: return "equity_index";
        case AssetClass::FixedIncome: return "fixed_income";
        case AssetClass::Forex: return "forex";
        case AssetClass::Commodity: return "commodity";
    }
    return "unknown";
}

ContractSeries load_csv(const std::string& path, const std::string& symbol) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw DataError(path + ": empty file");

    const std::vector<std::string> header = split_csv(lower(lines[0]));
    std::size_t price_col = 0;
    bool ohlc = false;
    if (header.size() == 2 && trim(header[0]) == "date" && trim(header[1]) == "price") {
        price_col = 1;
    } else if (header.size() == 5 && trim(header[0]) == "date" &&
               trim(header[1]) == "open" && trim(header[2]) == "high" &&
               trim(header[3]) == "low" && trim(header[4]) == "close") {
        price_col = 4;
        ohlc = true;
    } else {
        throw DataError(path + ":1: expected header 'date,price' or "
                               "'date,open,high,low,close', got '" + lines[0] + "'");
    }

    struct Row {
        std::string date;
        double price;
        std::size_t file_order;
    };
    std::vector<Row> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> cells = split_csv(lines[i]);
        if (cells.size() != (ohlc ? 5u : 2u))
            row_error(path, i + 1, "expected " + std::to_string(ohlc ? 5 : 2) +
                                       " columns, got " + std::to_string(cells.size()));
        const std::string date = trim(cells[0]);
        if (!is_iso_date(date))
            row_error(path, i + 1, "date '" + date + "' is not ISO-8601 (YYYY-MM-DD)");
        const double price = parse_double(cells[price_col], path, i + 1,
                                          ohlc ? "close" : "price");
        if (!(price > 0.0))
            row_error(path, i + 1, "non-positive price " + fmt_num(price));
        rows.push_back({date, price, i + 1});
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });

    ContractSeries series;
    series.symbol = symbol;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        // With a stable sort, equal dates keep file order: last one wins.
        if (i + 1 < rows.size() && rows[i + 1].date == rows[i].date) {
            series.warnings.push_back(path + ":" + std::to_string(rows[i].file_order) +
                                      ": duplicate date " + rows[i].date +
                                      " superseded by a later row");
            continue;
        }
        series.dates.push_back(rows[i].date);
        series.prices.push_back(rows[i].price);
    }
    return series;
}

AlignedPanel align_panel(const std::vector<ContractSeries>& series,
                         const std::string& target_symbol) {
    if (series.empty()) throw ConfigError("align_panel: no input series");
    std::size_t target = series.size();
    for (std::size_t i = 0; i < series.size(); ++i)
        if (series[i].symbol == target_symbol) target = i;
    if (target == series.size())
        throw ConfigError("align_panel: target symbol '" + target_symbol +
                          "' not among the loaded series");
    for (const ContractSeries& s : series)
        if (s.dates.empty())
            throw DataError("align_panel: series '" + s.symbol + "' is empty");

    const ContractSeries& tgt = series[target];
    // last_at[k] = index of series k's most recent observation <= current date.
    std::vector<std::ptrdiff_t> last_at(series.size(), -1);

    AlignedPanel panel;
    panel.target = target;
    for (const ContractSeries& s : series) panel.symbols.push_back(s.symbol);
    panel.prices.resize(series.size());

    for (std::size_t d = 0; d < tgt.dates.size(); ++d) {
        const std::string& date = tgt.dates[d];
        bool covered = true;
        for (std::size_t k = 0; k < series.size(); ++k) {
            const auto& dates = series[k].dates;
            while (last_at[k] + 1 < std::ptrdiff_t(dates.size()) &&
                   dates[std::size_t(last_at[k] + 1)] <= date)
                ++last_at[k];
            if (last_at[k] < 0) covered = false;
        }
        if (!covered) continue; // before some symbol's first observation
        panel.dates.push_back(date);
        for (std::size_t k = 0; k < series.size(); ++k)
            panel.prices[k].push_back(series[k].prices[std::size_t(last_at[k])]);
    }
    if (panel.dates.empty())
        throw DataError("align_panel: no target date is covered by every symbol");
    return panel;
}

void write_path_csv(const std::string& path, const PricePath& price_path) {
    price_path.validate();
    std::ofstream os = open_out(path);
    os << "date_index,price,regime\n";
    for (std::size_t i = 0; i < price_path.prices.size(); ++i) {
        const char tag = price_path.regime_labels.empty()
                             ? '-'
                             : regime_tag(price_path.regime_labels[i]);
        os << i << ',' << fmt_num(price_path.prices[i]) << ',' << tag << '\n';
    }
    if (!os) throw DataError("failed writing " + path);
}

PricePath read_path_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw DataError(path + ": empty file");
    if (trim(lower(lines[0])) != "date_index,price,regime")
        throw DataError(path + ":1: expected header 'date_index,price,regime'");

    PricePath out;
    long prev_index = -1;
    bool any_label = false, any_blank = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> cells = split_csv(lines[i]);
        if (cells.size() != 3)
            row_error(path, i + 1, "expected 3 columns, got " + std::to_string(cells.size()));
        const long idx = parse_long(cells[0], path, i + 1, "date_index");
        if (idx <= prev_index)
            row_error(path, i + 1, "date_index not strictly increasing");
        prev_index = idx;
        const double price = parse_double(cells[1], path, i + 1, "price");
        if (!(price > 0.0)) row_error(path, i + 1, "non-positive price " + fmt_num(price));
        out.prices.push_back(price);
        const std::string tag = trim(cells[2]);
        if (tag == "-") {
            any_blank = true;
            out.regime_labels.push_back(Regime::No);
        } else if (tag == "U") {
            any_label = true;
            out.regime_labels.push_back(Regime::Up);
        } else if (tag == "N") {
            any_label = true;
            out.regime_labels.push_back(Regime::No);
        } else if (tag == "D") {
            any_label = true;
            out.regime_labels.push_back(Regime::Down);
        } else {
            row_error(path, i + 1, "regime must be one of U, N, D, -");
        }
    }
    if (any_label && any_blank)
        throw DataError(path + ": mixes labeled and unlabeled regime rows");
    if (!any_label) out.regime_labels.clear();
    out.validate();
    return out;
}

namespace {

void write_metrics_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream os = open_out(path);
    os << "model,variant,E_R,std_R,DD,Sharpe,Sortino,MDD,Calmar,pct_pos,avgP_avgL\n";
    auto row = [&os](const char* model, const char* variant, const MetricsReport& r) {
        os << model << ',' << variant << ',' << fmt_num(r.e_r) << ',' << fmt_num(r.std_r)
           << ',' << fmt_num(r.dd) << ',' << opt_cell(r.sharpe) << ','
           << opt_cell(r.sortino) << ',' << fmt_num(r.mdd) << ',' << opt_cell(r.calmar)
           << ',' << fmt_num(r.pct_positive) << ',' << opt_cell(r.avg_p_over_avg_l)
           << '\n';
    };
    row("strategy", "net", result.net_metrics);
    row("strategy", "gross", result.gross_metrics);
    row("benchmark", "long_only", result.benchmark_metrics);
    if (!os) throw DataError("failed writing " + path);
}

void write_equity_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream os = open_out(path);
    os << "date,net,gross,benchmark\n";
    const std::vector<double> net = equity_curve(result.net_returns);
    const std::vector<double> gross = equity_curve(result.gross_returns);
    const std::vector<double> bench = equity_curve(result.benchmark_returns);
    for (std::size_t i = 0; i < result.dates.size(); ++i) {
        os << result.dates[i] << ',' << fmt_num(net[i + 1]) << ',' << fmt_num(gross[i + 1])
           << ',' << fmt_num(bench[i + 1]) << '\n';
    }
    if (!os) throw DataError("failed writing " + path);
}

void write_positions_csv(const std::string& path, const ExperimentResult& result) {
    std::ofstream os = open_out(path);
    os << "date,action,cost\n";
    for (std::size_t i = 0; i < result.dates.size(); ++i)
        os << result.dates[i] << ',' << result.positions[i] << ','
           << fmt_num(result.costs[i]) << '\n';
    if (!os) throw DataError("failed writing " + path);
}

void write_equity_svg(const std::string& path, const ExperimentResult& result) {
    const std::vector<double> net = equity_curve(result.net_returns);
    const std::vector<double> gross = equity_curve(result.gross_returns);
    const std::vector<double> bench = equity_curve(result.benchmark_returns);

    double lo = 1.0, hi = 1.0;
    for (const auto* curve : {&net, &gross, &bench})
        for (double v : *curve) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi <= lo) hi = lo + 1.0;

    const double x0 = 70.0, x1 = 960.0, y0 = 560.0, y1 = 30.0; // y grows downward
    const std::size_t n = net.size(); // includes the unit seed point
    auto x_of = [&](std::size_t i) {
        return n <= 1 ? x0 : x0 + (x1 - x0) * double(i) / double(n - 1);
    };
    auto y_of = [&](double v) { return y0 + (y1 - y0) * (v - lo) / (hi - lo); };

    std::ofstream os = open_out(path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"620\" "
          "viewBox=\"0 0 1000 620\">\n";
    os << "<rect width=\"1000\" height=\"620\" fill=\"white\"/>\n";
    // axes
    os << "<line x1=\"" << fmt_num(x0) << "\" y1=\"" << fmt_num(y0) << "\" x2=\""
       << fmt_num(x1) << "\" y2=\"" << fmt_num(y0)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<line x1=\"" << fmt_num(x0) << "\" y1=\"" << fmt_num(y0) << "\" x2=\""
       << fmt_num(x0) << "\" y2=\"" << fmt_num(y1)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    // axis labels and extremal ticks
    os << "<text x=\"515\" y=\"605\" text-anchor=\"middle\" font-size=\"16\">"
          "trading day</text>\n";
    os << "<text x=\"18\" y=\"295\" text-anchor=\"middle\" font-size=\"16\" "
          "transform=\"rotate(-90 18 295)\">equity (start = 1)</text>\n";
    os << "<text x=\"" << fmt_num(x0) << "\" y=\"578\" text-anchor=\"middle\" "
          "font-size=\"12\">0</text>\n";
    os << "<text x=\"" << fmt_num(x1) << "\" y=\"578\" text-anchor=\"middle\" "
          "font-size=\"12\">" << (n - 1) << "</text>\n";
    os << "<text x=\"" << fmt_num(x0 - 6.0) << "\" y=\"" << fmt_num(y_of(lo) + 4.0)
       << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_num(lo) << "</text>\n";
    os << "<text x=\"" << fmt_num(x0 - 6.0) << "\" y=\"" << fmt_num(y_of(hi) + 4.0)
       << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_num(hi) << "</text>\n";

    struct SeriesDef {
        const std::vector<double>* curve;
        const char* color;
        const char* name;
    };
    const SeriesDef defs[] = {{&bench, "#888888", "benchmark"},
                              {&gross, "#2ca02c", "gross"},
                              {&net, "#1f77b4", "net"}};
    for (const SeriesDef& def : defs) {
        os << "<polyline fill=\"none\" stroke=\"" << def.color
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < def.curve->size(); ++i) {
            if (i) os << ' ';
            os << fmt_num(x_of(i)) << ',' << fmt_num(y_of((*def.curve)[i]));
        }
        os << "\"/>\n";
    }
    // legend
    double ly = 40.0;
    for (const SeriesDef& def : defs) {
        os << "<rect x=\"85\" y=\"" << fmt_num(ly - 9.0)
           << "\" width=\"18\" height=\"4\" fill=\"" << def.color << "\"/>\n";
        os << "<text x=\"110\" y=\"" << fmt_num(ly) << "\" font-size=\"14\">" << def.name
           << "</text>\n";
        ly += 20.0;
    }
    os << "</svg>\n";
    if (!os) throw DataError("failed writing " + path);
}

} // namespace

std::vector<std::string> write_reports(const ExperimentResult& result,
                                       const std::string& out_dir) {
    if (result.dates.empty())
        throw DataError("write_reports: experiment result is empty");
    if (result.net_returns.size() != result.dates.size() ||
        result.gross_returns.size() != result.dates.size() ||
        result.benchmark_returns.size() != result.dates.size() ||
        result.positions.size() != result.dates.size() ||
        result.costs.size() != result.dates.size())
        throw ContractError("write_reports: result series lengths differ");

    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir.empty() ? std::string(".") : out_dir;
    std::vector<std::string> written;
    const std::string metrics = base + "/metrics.csv";
    write_metrics_csv(metrics, result);
    written.push_back(metrics);
    const std::string equity = base + "/equity.csv";
    write_equity_csv(equity, result);
    written.push_back(equity);
    const std::string positions = base + "/positions.csv";
    write_positions_csv(positions, result);
    written.push_back(positions);
    const std::string svg = base + "/equity.svg";
    write_equity_svg(svg, result);
    written.push_back(svg);
    return written;
}

void write_training_log(const std::string& path, const std::vector<TrainLogRow>& log) {
    std::ofstream os = open_out(path);
    os << "step,eps,loss,episode_return\n";
    for (const TrainLogRow& row : log) {
        os << row.step << ',' << fmt_num(row.eps) << ',' << opt_cell(row.loss) << ','
           << opt_cell(row.episode_return) << '\n';
    }
    if (!os) throw DataError("failed writing " + path);
}

void write_histogram_csv(const std::string& path, const HistogramStudyResult& result) {
    std::ofstream os = open_out(path);
    os << "path_index,agent_sharpe,benchmark_sharpe\n";
    for (std::size_t i = 0; i < result.agent_sharpes.size(); ++i)
        os << i << ',' << fmt_num(result.agent_sharpes[i]) << ','
           << fmt_num(result.benchmark_sharpes[i]) << '\n';
    if (!os) throw DataError("failed writing " + path);
}

std::vector<MetricsCsvRow> read_metrics_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw DataError(path + ": empty file");
    if (trim(lines[0]) !=
        "model,variant,E_R,std_R,DD,Sharpe,Sortino,MDD,Calmar,pct_pos,avgP_avgL")
        throw DataError(path + ":1: unexpected metrics header");
    std::vector<MetricsCsvRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> cells = split_csv(lines[i]);
        if (cells.size() != 11)
            row_error(path, i + 1, "expected 11 columns, got " + std::to_string(cells.size()));
        MetricsCsvRow row;
        row.model = cells[0];
        row.variant = cells[1];
        auto opt = [&](const std::string& cell) -> std::optional<double> {
            if (trim(cell).empty()) return std::nullopt;
            return parse_double(cell, path, i + 1, "metric");
        };
        row.report.e_r = parse_double(cells[2], path, i + 1, "E_R");
        row.report.std_r = parse_double(cells[3], path, i + 1, "std_R");
        row.report.dd = parse_double(cells[4], path, i + 1, "DD");
        row.report.sharpe = opt(cells[5]);
        row.report.sortino = opt(cells[6]);
        row.report.mdd = parse_double(cells[7], path, i + 1, "MDD");
        row.report.calmar = opt(cells[8]);
        row.report.pct_positive = parse_double(cells[9], path, i + 1, "pct_pos");
        row.report.avg_p_over_avg_l = opt(cells[10]);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace qtrade
