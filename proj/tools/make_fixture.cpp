// Writes the bundled synthetic quote history to stdout.
//
// Two markets (DE power, TTF gas) quote 26 calendar months every weekday of 2022.
// Each delivery month follows a driftless lognormal with a three-factor volatility
// that depends on the months left to delivery, so the calibration has a known answer.

#include "hjm/date.hpp"
#include "hjm/random.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace {

using hjm::Date;

constexpr int kMonthsQuoted = 26;
constexpr double kDt = 1.0 / 252.0;
constexpr std::uint64_t kSeed = 20220103;

struct Market {
    const char* name;
    double base;
    double seasonal;
    std::array<double, 3> loadings;  // weights on the level, slope and idiosyncratic shapes
};

const std::array<Market, 2> kMarkets{{
    {"DE", 95.0, 15.0, {1.0, 1.0, 0.06}},
    {"TTF", 40.0, 6.0, {0.85, 0.4, -0.06}},
}};

// Volatility of a contract h months from delivery, one entry per factor.
std::array<double, 3> vol_row(const Market& m, int h) {
    const double decay = std::exp(-h / 6.0);
    return {m.loadings[0] * (0.35 * decay + 0.25), m.loadings[1] * (0.12 * decay - 0.04), m.loadings[2]};
}

double initial_price(const Market& m, int month) {
    const int moy = month % 12;  // 0 = January
    return m.base + m.seasonal * std::cos(2.0 * std::numbers::pi * moy / 12.0);
}

}  // namespace

int main() {
    const Date first{std::chrono::year{2022}, std::chrono::month{1}, std::chrono::day{3}};
    const Date last{std::chrono::year{2022}, std::chrono::month{12}, std::chrono::day{30}};

    // log F for every delivery month that is ever quoted, per market
    const int m_lo = hjm::month_index(first);
    const int m_hi = hjm::month_index(last) + kMonthsQuoted;
    std::vector<std::map<int, double>> logf(kMarkets.size());
    for (std::size_t k = 0; k < kMarkets.size(); ++k) {
        for (int m = m_lo; m < m_hi; ++m) logf[k][m] = std::log(initial_price(kMarkets[k], m));
    }

    hjm::NormalStream rng(kSeed, 0);
    std::printf("trading_date,market,delivery_start,delivery_end,price\n");
    bool first_day = true;
    for (Date d = first; d <= last; d = hjm::add_days(d, 1)) {
        if (!hjm::is_weekday(d)) continue;
        const int today = hjm::month_index(d);
        if (!first_day) {
            const std::array<double, 3> dw{rng.next(), rng.next(), rng.next()};
            for (std::size_t k = 0; k < kMarkets.size(); ++k) {
                for (auto& [m, lf] : logf[k]) {
                    if (m < today) continue;
                    const auto row = vol_row(kMarkets[k], m - today);
                    double shock = 0.0;
                    double var = 0.0;
                    for (int f = 0; f < 3; ++f) {
                        shock += row[f] * dw[f];
                        var += row[f] * row[f];
                    }
                    lf += std::sqrt(kDt) * shock - 0.5 * var * kDt;
                }
            }
        }
        first_day = false;
        for (std::size_t k = 0; k < kMarkets.size(); ++k) {
            for (int m = today; m < today + kMonthsQuoted; ++m) {
                const Date start = hjm::month_start(m);
                const Date end = hjm::add_days(hjm::month_end_exclusive(m), -1);
                std::printf("%s,%s,%s,%s,%.2f\n", hjm::format_date(d).c_str(), kMarkets[k].name,
                            hjm::format_date(start).c_str(), hjm::format_date(end).c_str(),
                            std::exp(logf[k].at(m)));
            }
        }
    }
    return 0;
}
