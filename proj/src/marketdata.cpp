#include "hjm/marketdata.hpp"

#include "hjm/curve.hpp"
#include "hjm/errors.hpp"
#include "hjm/io.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

namespace hjm {

std::string to_string(Granularity g) {
    switch (g) {
        case Granularity::month: return "month";
        case Granularity::quarter: return "quarter";
        case Granularity::year: return "year";
    }
    return "?";
}

QuotedSwap make_quote(std::string market, Date trading_date, Date delivery_start,
                      Date delivery_end, double price) {
    if (market.empty()) {
        throw ValidationError("empty market identifier");
    }
    if (!(price > 0.0)) {
        throw ValidationError("price must be positive");
    }
    if (delivery_end < delivery_start) {
        throw ValidationError("delivery_end before delivery_start");
    }
    if (trading_date > delivery_end) {
        throw ValidationError("trading date after end of delivery");
    }
    if (delivery_start.day() != std::chrono::day{1} ||
        add_days(delivery_end, 1).day() != std::chrono::day{1}) {
        throw ValidationError("delivery window is not month aligned");
    }
    QuotedSwap q{std::move(market), trading_date, delivery_start, delivery_end, price, Granularity::month};
    const int months = q.month_count();
    const int first = q.first_month();
    if (months == 1) {
        q.granularity = Granularity::month;
    } else if (months == 3 && first % 3 == 0) {
        q.granularity = Granularity::quarter;
    } else if (months == 12 && first % 12 == 0) {
        q.granularity = Granularity::year;
    } else {
        throw ValidationError("delivery window is not a calendar month, quarter or year");
    }
    return q;
}

ParseResult parse_quotes(std::istream& in) {
    std::string line;
    if (!io::read_line(in, line)) {
        throw ValidationError("quotes file is empty");
    }
    const auto header = io::split_csv_line(line);
    const std::vector<std::string> expected{"trading_date", "market", "delivery_start", "delivery_end", "price"};
    if (header != expected) {
        throw ValidationError("quotes header must be 'trading_date,market,delivery_start,delivery_end,price'");
    }
    ParseResult result;
    std::size_t row = 0;
    while (io::read_line(in, line)) {
        ++row;
        const auto fields = io::split_csv_line(line);
        try {
            if (fields.size() != 5) {
                throw ValidationError("expected 5 fields, got " + std::to_string(fields.size()));
            }
            result.quotes.push_back(make_quote(fields[1], parse_date(fields[0]), parse_date(fields[2]),
                                               parse_date(fields[3]), io::parse_number(fields[4])));
        } catch (const ValidationError& e) {
            result.errors.push_back({row, e.what()});
        }
    }
    return result;
}

std::string Tenor::label() const {
    const char prefix = kind == Granularity::month ? 'M' : kind == Granularity::quarter ? 'Q' : 'Y';
    return prefix + std::to_string(offset);
}

Tenor Tenor::from_label(const std::string& label) {
    if (label.size() < 2) {
        throw ValidationError("bad tenor label '" + label + "'");
    }
    Tenor t;
    switch (label[0]) {
        case 'M': t.kind = Granularity::month; break;
        case 'Q': t.kind = Granularity::quarter; break;
        case 'Y': t.kind = Granularity::year; break;
        default: throw ValidationError("bad tenor label '" + label + "'");
    }
    t.offset = static_cast<int>(io::parse_number(std::string_view(label).substr(1)));
    if (t.offset < 0) {
        throw ValidationError("bad tenor label '" + label + "'");
    }
    return t;
}

int Tenor::period_of(const Date& d) const {
    switch (kind) {
        case Granularity::month: return month_index(d);
        case Granularity::quarter: return quarter_index(d);
        case Granularity::year: return year_index(d);
    }
    return 0;
}

std::vector<Tenor> default_tenors(int months, int quarters, int years) {
    std::vector<Tenor> out;
    for (int h = 0; h < months; ++h) out.push_back({Granularity::month, h});
    for (int h = 1; h <= quarters; ++h) out.push_back({Granularity::quarter, h});
    for (int h = 1; h <= years; ++h) out.push_back({Granularity::year, h});
    return out;
}

RelativePanel build_relative_panel(const std::string& market, std::span<const StepwiseCurve> curves,
                                   std::vector<Tenor> tenors) {
    std::vector<const StepwiseCurve*> sorted;
    for (const auto& c : curves) {
        if (c.market != market) continue;
        sorted.push_back(&c);
    }
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->as_of < b->as_of; });

    RelativePanel panel;
    panel.market = market;
    panel.tenors = std::move(tenors);
    panel.prices = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(sorted.size()),
                                             static_cast<Eigen::Index>(panel.tenors.size()), kMissing);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const StepwiseCurve& c = *sorted[i];
        if (!panel.dates.empty() && panel.dates.back() == c.as_of) {
            throw ValidationError("two curves for " + market + " on " + format_date(c.as_of));
        }
        panel.dates.push_back(c.as_of);
        for (std::size_t j = 0; j < panel.tenors.size(); ++j) {
            const Tenor& t = panel.tenors[j];
            std::optional<double> v;
            switch (t.kind) {
                case Granularity::month: v = c.average(month_index(c.as_of) + t.offset, 1); break;
                case Granularity::quarter: v = c.average((quarter_index(c.as_of) + t.offset) * 3, 3); break;
                case Granularity::year: v = c.average((year_index(c.as_of) + t.offset) * 12, 12); break;
            }
            if (v) panel.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
        }
    }
    return panel;
}

void write_panel_csv(std::ostream& out, const RelativePanel& panel) {
    out << "trading_date";
    for (const auto& t : panel.tenors) out << ',' << t.label();
    out << '\n';
    for (Eigen::Index i = 0; i < panel.prices.rows(); ++i) {
        out << format_date(panel.dates[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < panel.prices.cols(); ++j) {
            out << ',' << io::format_number(panel.prices(i, j));
        }
        out << '\n';
    }
}

RelativePanel read_panel_csv(std::istream& in, const std::string& market) {
    std::string line;
    if (!io::read_line(in, line)) {
        throw ValidationError("panel file is empty");
    }
    const auto header = io::split_csv_line(line);
    if (header.empty() || header[0] != "trading_date") {
        throw ValidationError("panel header must start with 'trading_date'");
    }
    RelativePanel panel;
    panel.market = market;
    for (std::size_t j = 1; j < header.size(); ++j) panel.tenors.push_back(Tenor::from_label(header[j]));
    std::vector<std::vector<double>> rows;
    std::size_t row = 0;
    while (io::read_line(in, line)) {
        ++row;
        const auto fields = io::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ValidationError("panel row " + std::to_string(row) + ": wrong field count");
        }
        panel.dates.push_back(parse_date(fields[0]));
        std::vector<double> values;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            values.push_back(fields[j].empty() ? kMissing : io::parse_number(fields[j]));
        }
        rows.push_back(std::move(values));
    }
    panel.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(panel.tenors.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            panel.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return panel;
}

LogReturnMatrix log_returns(const RelativePanel& panel, double dt) {
    if (!(dt > 0.0)) {
        throw ValidationError("dt must be positive");
    }
    const Eigen::Index n = panel.prices.rows();
    if (n < 2) {
        throw ValidationError("log returns need at least two dates");
    }
    LogReturnMatrix out;
    out.dt = dt;
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    std::vector<Eigen::VectorXd> kept;
    for (Eigen::Index j = 0; j < panel.prices.cols(); ++j) {
        const Tenor& tenor = panel.tenors[static_cast<std::size_t>(j)];
        Eigen::VectorXd col = Eigen::VectorXd::Constant(n - 1, kMissing);
        int valid = 0;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            const double a = panel.prices(i, j);
            const double b = panel.prices(i + 1, j);
            if (is_missing(a) || is_missing(b)) continue;
            const auto& d0 = panel.dates[static_cast<std::size_t>(i)];
            const auto& d1 = panel.dates[static_cast<std::size_t>(i + 1)];
            if (tenor.period_of(d0) != tenor.period_of(d1)) continue;  // rolled
            col(i) = std::log(b / a);
            ++valid;
        }
        if (valid == 0) {
            out.warnings.push_back("column " + panel.market + ":" + tenor.label() +
                                   " dropped: fewer than 2 consecutive prices");
            continue;
        }
        out.column_keys.push_back({panel.market, tenor.label()});
        kept.push_back(std::move(col));
    }
    out.values.resize(n - 1, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) out.values.col(static_cast<Eigen::Index>(j)) = kept[j];
    return out;
}

LogReturnMatrix merge_returns(std::span<const LogReturnMatrix> parts) {
    if (parts.empty()) {
        throw ValidationError("nothing to merge");
    }
    std::vector<Date> dates;
    for (const auto& p : parts) dates.insert(dates.end(), p.dates.begin(), p.dates.end());
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

    LogReturnMatrix out;
    out.dt = parts.front().dt;
    out.dates = dates;
    Eigen::Index total = 0;
    for (const auto& p : parts) {
        if (p.dt != out.dt) throw ValidationError("cannot merge returns with different dt");
        total += p.cols();
    }
    out.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(dates.size()), total, kMissing);
    Eigen::Index offset = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p.dates.size(); ++i) {
            const auto row = std::lower_bound(dates.begin(), dates.end(), p.dates[i]) - dates.begin();
            out.values.block(row, offset, 1, p.cols()) = p.values.row(static_cast<Eigen::Index>(i));
        }
        out.column_keys.insert(out.column_keys.end(), p.column_keys.begin(), p.column_keys.end());
        out.warnings.insert(out.warnings.end(), p.warnings.begin(), p.warnings.end());
        offset += p.cols();
    }
    return out;
}

LogReturnMatrix select_columns(const LogReturnMatrix& x, std::span<const ColumnKey> keys) {
    LogReturnMatrix out;
    out.dt = x.dt;
    out.dates = x.dates;
    out.warnings = x.warnings;
    out.values.resize(x.rows(), static_cast<Eigen::Index>(keys.size()));
    for (std::size_t j = 0; j < keys.size(); ++j) {
        const auto it = std::find(x.column_keys.begin(), x.column_keys.end(), keys[j]);
        if (it == x.column_keys.end()) {
            throw ValidationError("column " + keys[j].str() + " not present in returns");
        }
        out.values.col(static_cast<Eigen::Index>(j)) = x.values.col(it - x.column_keys.begin());
        out.column_keys.push_back(keys[j]);
    }
    return out;
}

std::vector<double> present_values(const LogReturnMatrix& x, Eigen::Index j) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (!is_missing(x.values(i, j))) out.push_back(x.values(i, j));
    }
    return out;
}

OutlierFilterResult filter_outliers(const LogReturnMatrix& x, double k) {
    if (!(k >= 1.0)) {
        throw ValidationError("outlier threshold k must be >= 1");
    }
    OutlierFilterResult result{x, std::vector<int>(static_cast<std::size_t>(x.cols()), 0)};
    auto& values = result.filtered.values;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        while (true) {
            double sum = 0.0;
            int n = 0;
            for (Eigen::Index i = 0; i < values.rows(); ++i) {
                if (!is_missing(values(i, j))) { sum += values(i, j); ++n; }
            }
            if (n < 2) break;
            const double mean = sum / n;
            double ss = 0.0;
            for (Eigen::Index i = 0; i < values.rows(); ++i) {
                if (!is_missing(values(i, j))) ss += (values(i, j) - mean) * (values(i, j) - mean);
            }
            const double sd = std::sqrt(ss / (n - 1));
            if (!(sd > 0.0)) break;
            int removed = 0;
            for (Eigen::Index i = 0; i < values.rows(); ++i) {
                if (!is_missing(values(i, j)) && std::abs(values(i, j) - mean) > k * sd) {
                    values(i, j) = kMissing;
                    ++removed;
                }
            }
            if (removed == 0) break;
            result.removed[static_cast<std::size_t>(j)] += removed;
        }
    }
    return result;
}

std::vector<double> acf(std::span<const double> series, int max_lag) {
    const auto n = static_cast<int>(series.size());
    if (max_lag < 1 || n <= max_lag) {
        throw ValidationError("acf needs 1 <= max_lag < series length");
    }
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
    double var = 0.0;
    for (double x : series) var += (x - mean) * (x - mean);
    var /= n;
    if (!(var > 0.0)) {
        throw ValidationError("acf of a constant series");
    }
    std::vector<double> out;
    for (int k = 1; k <= max_lag; ++k) {
        double s = 0.0;
        for (int i = 0; i + k < n; ++i) s += (series[i] - mean) * (series[i + k] - mean);
        out.push_back(s / ((n - k) * var));
    }
    return out;
}

Moments normality_diagnostics(std::span<const double> column) {
    const auto n = static_cast<double>(column.size());
    if (column.size() < 3) {
        throw ValidationError("moments need at least 3 observations");
    }
    Moments m;
    m.mean = std::accumulate(column.begin(), column.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : column) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    if (!(m2 > 0.0)) {
        throw ValidationError("moments of a constant sample");
    }
    m.std_dev = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return m;
}

}  // namespace hjm
