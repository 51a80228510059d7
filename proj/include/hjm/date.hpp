#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace hjm {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws ValidationError on malformed or invalid dates.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

/// Months since year 0; handy for bucket arithmetic.
int month_index(const Date& d);
Date month_start(int month_idx);
/// First day of the month after `month_idx`.
Date month_end_exclusive(int month_idx);
int days_in_month(int month_idx);

int days_between(const Date& from, const Date& to);
Date add_days(const Date& d, int days);
bool is_weekday(const Date& d);

inline int quarter_index(const Date& d) { return month_index(d) / 3; }
inline int year_index(const Date& d) { return static_cast<int>(d.year()); }

}  // namespace hjm
