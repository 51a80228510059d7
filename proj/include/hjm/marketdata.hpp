#pragma once

#include "hjm/date.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hjm {

struct StepwiseCurve;

enum class Granularity { month, quarter, year };

std::string to_string(Granularity g);

/// Gap marker used in panels and return matrices.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double x) { return std::isnan(x); }

/// One market quotation F(t, start, end) for base-load delivery.
struct QuotedSwap {
    std::string market;
    Date trading_date;
    Date delivery_start;
    Date delivery_end;  // inclusive
    double price = 0.0;
    Granularity granularity = Granularity::month;

    int first_month() const { return month_index(delivery_start); }
    /// Number of calendar months in the delivery window.
    int month_count() const { return month_index(delivery_end) - month_index(delivery_start) + 1; }
};

/// Builds a validated quote; granularity is inferred from the delivery window.
/// Throws ValidationError when the window is not a calendar month, quarter or year,
/// when the price is not positive, or when the quote is past its delivery.
QuotedSwap make_quote(std::string market, Date trading_date, Date delivery_start,
                      Date delivery_end, double price);

struct RowError {
    std::size_t row = 0;  // 1-based data row, header excluded
    std::string message;
};

struct ParseResult {
    std::vector<QuotedSwap> quotes;
    std::vector<RowError> errors;
};

/// Reads `trading_date,market,delivery_start,delivery_end,price`. Bad rows are
/// reported in `errors` and skipped. Throws ValidationError on a missing or wrong header.
ParseResult parse_quotes(std::istream& in);

/// Relative delivery: M_h, Q_h or Y_h counted from the period of the trading date.
struct Tenor {
    Granularity kind = Granularity::month;
    int offset = 0;

    std::string label() const;
    static Tenor from_label(const std::string& label);
    /// Calendar period index (month, quarter or year number) of the trading date.
    int period_of(const Date& d) const;
    bool operator==(const Tenor&) const = default;
};

/// M0..M{months-1}, Q1..Q{quarters}, Y1..Y{years}.
std::vector<Tenor> default_tenors(int months = 24, int quarters = 7, int years = 2);

struct RelativePanel {
    std::string market;
    std::vector<Tenor> tenors;
    std::vector<Date> dates;
    Eigen::MatrixXd prices;  // dates x tenors, kMissing for gaps
};

/// Maps each curve (one per trading date, same market) onto relative tenors.
/// Quarter/year columns are day-weighted averages of their months; a tenor that
/// reaches past the curve gives a gap.
RelativePanel build_relative_panel(const std::string& market, std::span<const StepwiseCurve> curves,
                                   std::vector<Tenor> tenors = default_tenors());

void write_panel_csv(std::ostream& out, const RelativePanel& panel);
RelativePanel read_panel_csv(std::istream& in, const std::string& market);

struct ColumnKey {
    std::string market;
    std::string tenor;

    std::string str() const { return market + ":" + tenor; }
    bool operator==(const ColumnKey&) const = default;
};

struct LogReturnMatrix {
    Eigen::MatrixXd values;  // returns x columns, kMissing where undefined
    std::vector<ColumnKey> column_keys;
    std::vector<Date> dates;  // date at the end of each return
    double dt = 1.0 / 252.0;
    std::vector<std::string> warnings;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// ln(P[i+1]/P[i]) per column, masking gaps and returns that straddle a roll.
LogReturnMatrix log_returns(const RelativePanel& panel, double dt);

/// Joins several return matrices on their dates (union, gaps as missing).
LogReturnMatrix merge_returns(std::span<const LogReturnMatrix> parts);

/// Keeps only the named columns, in the given order.
LogReturnMatrix select_columns(const LogReturnMatrix& x, std::span<const ColumnKey> keys);

struct OutlierFilterResult {
    LogReturnMatrix filtered;
    std::vector<int> removed;  // per column
};

/// Iterated k-sigma removal per column until no present entry exceeds k standard deviations.
OutlierFilterResult filter_outliers(const LogReturnMatrix& x, double k = 3.0);

/// ACF(1..max_lag) with normalisation (n-k)*v, v the full-sample (1/n) variance.
std::vector<double> acf(std::span<const double> series, int max_lag);

struct Moments {
    double mean = 0.0;
    double std_dev = 0.0;  // n-1 normalisation
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

Moments normality_diagnostics(std::span<const double> column);

/// Present entries of column j, in row order.
std::vector<double> present_values(const LogReturnMatrix& x, Eigen::Index j);

}  // namespace hjm
