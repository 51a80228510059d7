#include "hjm/date.hpp"

#include "hjm/errors.hpp"

#include <charconv>
#include <cstdio>

namespace hjm {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ValidationError("malformed date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ValidationError("malformed date '" + std::string(text) + "'");
    }
    const int y = parse_int(text.substr(0, 4), text);
    const int m = parse_int(text.substr(5, 2), text);
    const int d = parse_int(text.substr(8, 2), text);
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw ValidationError("invalid calendar date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

int month_index(const Date& d) {
    return static_cast<int>(d.year()) * 12 + static_cast<int>(static_cast<unsigned>(d.month())) - 1;
}

Date month_start(int month_idx) {
    const int y = month_idx / 12;
    const unsigned m = static_cast<unsigned>(month_idx % 12) + 1;
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{1}};
}

Date month_end_exclusive(int month_idx) { return month_start(month_idx + 1); }

int days_in_month(int month_idx) {
    return days_between(month_start(month_idx), month_end_exclusive(month_idx));
}

int days_between(const Date& from, const Date& to) {
    return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

Date add_days(const Date& d, int days) {
    return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

bool is_weekday(const Date& d) {
    const std::chrono::weekday wd{std::chrono::sys_days{d}};
    return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

}  // namespace hjm
