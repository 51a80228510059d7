#include "hjm/curve.hpp"

#include "hjm/errors.hpp"
#include "hjm/io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace hjm {

const MonthBucket* StepwiseCurve::find(int month) const {
    const auto it = std::lower_bound(buckets.begin(), buckets.end(), month,
                                     [](const MonthBucket& b, int m) { return b.month < m; });
    if (it == buckets.end() || it->month != month) return nullptr;
    return &*it;
}

std::optional<double> StepwiseCurve::average(int first_month, int count) const {
    double num = 0.0;
    double den = 0.0;
    for (int m = first_month; m < first_month + count; ++m) {
        const MonthBucket* b = find(m);
        if (b == nullptr) return std::nullopt;
        num += b->weight * b->value;
        den += b->weight;
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

namespace {

std::string describe(const QuotedSwap& q) {
    return q.market + " " + format_date(q.trading_date) + " [" + format_date(q.delivery_start) + ", " +
           format_date(q.delivery_end) + "] @ " + io::format_number(q.price);
}

bool same_window(const QuotedSwap& a, const QuotedSwap& b) {
    return a.first_month() == b.first_month() && a.month_count() == b.month_count();
}

}  // namespace

BootstrapReport bootstrap_monthly_curve(std::span<const QuotedSwap> quotes, int horizon_months) {
    if (quotes.empty()) {
        throw ValidationError("bootstrap needs at least one quote");
    }
    if (horizon_months < 1) {
        throw ValidationError("horizon_months must be >= 1");
    }
    const QuotedSwap& head = quotes.front();
    for (const auto& q : quotes) {
        if (q.market != head.market || q.trading_date != head.trading_date) {
            throw ValidationError("bootstrap quotes must share market and trading date");
        }
    }

    // Finest first; ties by start month so the processing order is deterministic.
    std::vector<QuotedSwap> products;
    for (const auto& q : quotes) {
        const auto dup = std::find_if(products.begin(), products.end(),
                                      [&](const QuotedSwap& p) { return same_window(p, q); });
        if (dup == products.end()) {
            products.push_back(q);
        } else if (std::abs(dup->price - q.price) > 1e-12 * q.price) {
            throw NumericalError("infeasible quotes on the same window: " + describe(*dup) + " vs " + describe(q));
        }
    }
    std::sort(products.begin(), products.end(), [](const QuotedSwap& a, const QuotedSwap& b) {
        if (a.month_count() != b.month_count()) return a.month_count() < b.month_count();
        return a.first_month() < b.first_month();
    });
    for (std::size_t i = 0; i < products.size(); ++i) {
        for (std::size_t j = i + 1; j < products.size(); ++j) {
            const auto& a = products[i];
            const auto& b = products[j];
            const int a0 = a.first_month(), a1 = a0 + a.month_count();
            const int b0 = b.first_month(), b1 = b0 + b.month_count();
            const bool overlap = a0 < b1 && b0 < a1;
            const bool nested = (b0 <= a0 && a1 <= b1) || (a0 <= b0 && b1 <= a1);
            if (overlap && !nested) {
                throw NumericalError("partially overlapping quotes: " + describe(a) + " vs " + describe(b));
            }
        }
    }

    BootstrapReport report;
    std::map<int, double> pinned;
    std::vector<QuotedSwap> retained;
    for (const auto& p : products) {
        const int first = p.first_month();
        const int count = p.month_count();
        double pinned_weighted = 0.0;
        double total_weight = 0.0;
        double free_weight = 0.0;
        std::vector<int> free_months;
        for (int m = first; m < first + count; ++m) {
            const double w = days_in_month(m);
            total_weight += w;
            if (const auto it = pinned.find(m); it != pinned.end()) {
                pinned_weighted += w * it->second;
            } else {
                free_weight += w;
                free_months.push_back(m);
            }
        }
        if (free_months.empty()) {
            report.removed_products.push_back(p);
            continue;
        }
        const double fill = free_weight == total_weight ? p.price
                                                        : (p.price * total_weight - pinned_weighted) / free_weight;
        if (!(fill > 0.0)) {
            throw NumericalError("non-positive implied month value " + io::format_number(fill) + " from " +
                                 describe(p) + " (arbitrage in inputs)");
        }
        for (int m : free_months) pinned[m] = fill;
        if (free_months.size() > 1) report.fill_groups.push_back(free_months);
        retained.push_back(p);
    }

    report.curve.market = head.market;
    report.curve.as_of = head.trading_date;
    const int first_month = month_index(head.trading_date);
    for (const auto& [m, v] : pinned) {
        if (m - first_month >= horizon_months) break;
        report.curve.buckets.push_back({m, v, static_cast<double>(days_in_month(m))});
    }
    // Residuals are measured on the untruncated fit so coarse products crossing the horizon are still checked.
    StepwiseCurve full{head.market, head.trading_date, {}};
    for (const auto& [m, v] : pinned) full.buckets.push_back({m, v, static_cast<double>(days_in_month(m))});
    for (const auto& p : retained) {
        const double avg = *full.average(p.first_month(), p.month_count());
        report.residuals.push_back({p, std::abs(avg - p.price) / p.price});
    }
    return report;
}

std::vector<BootstrapReport> bootstrap_all(std::span<const QuotedSwap> quotes, int horizon_months) {
    std::map<std::pair<std::string, int>, std::vector<QuotedSwap>> groups;
    for (const auto& q : quotes) {
        const int day = static_cast<int>(std::chrono::sys_days{q.trading_date}.time_since_epoch().count());
        groups[{q.market, day}].push_back(q);
    }
    std::vector<BootstrapReport> out;
    out.reserve(groups.size());
    for (const auto& [key, group] : groups) out.push_back(bootstrap_monthly_curve(group, horizon_months));
    return out;
}

double extract_fixed_delivery(const StepwiseCurve& curve, int h) {
    if (h < 0) {
        throw ValidationError("month offset must be >= 0");
    }
    const MonthBucket* b = curve.find(month_index(curve.as_of) + h);
    if (b == nullptr) {
        throw ValidationError("month offset " + std::to_string(h) + " is outside the curve horizon");
    }
    return b->value;
}

ArbitrageCheck verify_no_arbitrage(const StepwiseCurve& curve, std::span<const QuotedSwap> quotes) {
    ArbitrageCheck check;
    for (const auto& q : quotes) {
        const auto avg = curve.average(q.first_month(), q.month_count());
        if (!avg) {
            check.uncheckable.push_back(q);
            continue;
        }
        check.max_residual = std::max(check.max_residual, std::abs(*avg - q.price) / q.price);
    }
    return check;
}

void write_curves_csv(std::ostream& out, std::span<const StepwiseCurve> curves) {
    out << "as_of,market,bucket_start,bucket_end,value,weight\n";
    for (const auto& c : curves) {
        for (const auto& b : c.buckets) {
            out << format_date(c.as_of) << ',' << c.market << ',' << format_date(b.start()) << ','
                << format_date(add_days(b.end(), -1)) << ',' << io::format_number(b.value) << ','
                << io::format_number(b.weight) << '\n';
        }
    }
}

std::vector<StepwiseCurve> read_curves_csv(std::istream& in) {
    std::string line;
    if (!io::read_line(in, line) || line != "as_of,market,bucket_start,bucket_end,value,weight") {
        throw ValidationError("curve header must be 'as_of,market,bucket_start,bucket_end,value,weight'");
    }
    std::vector<StepwiseCurve> curves;
    std::size_t row = 0;
    while (io::read_line(in, line)) {
        ++row;
        const auto f = io::split_csv_line(line);
        if (f.size() != 6) {
            throw ValidationError("curve row " + std::to_string(row) + ": expected 6 fields");
        }
        const Date as_of = parse_date(f[0]);
        if (curves.empty() || curves.back().as_of != as_of || curves.back().market != f[1]) {
            curves.push_back({f[1], as_of, {}});
        }
        const int m = month_index(parse_date(f[2]));
        if (!curves.back().buckets.empty() && curves.back().buckets.back().month >= m) {
            throw ValidationError("curve row " + std::to_string(row) + ": buckets out of order");
        }
        curves.back().buckets.push_back({m, io::parse_number(f[4]), io::parse_number(f[5])});
    }
    return curves;
}

std::vector<double> daily_forward(const StepwiseCurve& curve, std::span<const Date> dates) {
    std::vector<double> out;
    out.reserve(dates.size());
    for (const auto& d : dates) {
        const MonthBucket* b = curve.find(month_index(d));
        out.push_back(b ? b->value : kMissing);
    }
    return out;
}

}  // namespace hjm
