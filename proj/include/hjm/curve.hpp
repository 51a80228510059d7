#pragma once

#include "hjm/date.hpp"
#include "hjm/marketdata.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hjm {

/// One calendar month of a flat forward curve.
struct MonthBucket {
    int month = 0;  // month_index of the delivery month
    double value = 0.0;
    double weight = 0.0;  // calendar days

    Date start() const { return month_start(month); }
    Date end() const { return month_end_exclusive(month); }
};

/// Step-wise monthly forward curve for one market and trading date.
/// Buckets are sorted by month; months no quote covers are absent.
struct StepwiseCurve {
    std::string market;
    Date as_of;
    std::vector<MonthBucket> buckets;

    const MonthBucket* find(int month) const;
    /// Day-weighted average over [first_month, first_month + count); nullopt if any month is absent.
    std::optional<double> average(int first_month, int count) const;
};

struct ProductResidual {
    QuotedSwap quote;
    double residual = 0.0;  // |avg - price| / price
};

struct BootstrapReport {
    StepwiseCurve curve;
    std::vector<QuotedSwap> removed_products;
    std::vector<ProductResidual> residuals;
    /// Months that share one flat-filled value, one group per filling product.
    std::vector<std::vector<int>> fill_groups;
};

/// Flat monthly curve reproducing every retained quote's day-weighted average.
///
/// Products are processed from the finest window to the coarsest. A product whose
/// window is already fully pinned by finer quotes is removed; otherwise its
/// unpinned months receive the single value that makes the window average match
/// the quote. Only months less than `horizon_months` after the trading month are kept.
///
/// Throws NumericalError for conflicting quotes on the same window, partially
/// overlapping windows, or a non-positive implied month value; ValidationError
/// for empty input or mixed dates/markets.
BootstrapReport bootstrap_monthly_curve(std::span<const QuotedSwap> quotes, int horizon_months);

/// Bootstraps every (market, trading date) group, ordered by market then date.
std::vector<BootstrapReport> bootstrap_all(std::span<const QuotedSwap> quotes, int horizon_months);

/// F_{M_h}(t, T): value of the month h months after the trading month.
double extract_fixed_delivery(const StepwiseCurve& curve, int h);

struct ArbitrageCheck {
    double max_residual = 0.0;
    std::vector<QuotedSwap> uncheckable;
};

ArbitrageCheck verify_no_arbitrage(const StepwiseCurve& curve, std::span<const QuotedSwap> quotes);

/// `as_of,market,bucket_start,bucket_end,value,weight`; bucket_end is the last delivery day.
void write_curves_csv(std::ostream& out, std::span<const StepwiseCurve> curves);
std::vector<StepwiseCurve> read_curves_csv(std::istream& in);

/// Daily forward F(t0, d) for each date, read off the month containing d.
/// Dates outside the curve give kMissing.
std::vector<double> daily_forward(const StepwiseCurve& curve, std::span<const Date> dates);

}  // namespace hjm
