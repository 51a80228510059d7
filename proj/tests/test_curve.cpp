#include "doctest.h"

#include "hjm/curve.hpp"
#include "hjm/errors.hpp"

#include <fstream>
#include <random>
#include <sstream>

using namespace hjm;

namespace {

QuotedSwap quote(const char* trade, const char* start, const char* end, double price, const char* market = "DE") {
    return make_quote(market, parse_date(trade), parse_date(start), parse_date(end), price);
}

std::vector<QuotedSwap> sample_quotes() {
    std::ifstream in(HJM_DATA_DIR "/sample_quotes.csv");
    return parse_quotes(in).quotes;
}

QuotedSwap window_quote(const Date& trade, int first_month, int count, double price) {
    return make_quote("DE", trade, month_start(first_month), add_days(month_start(first_month + count), -1), price);
}

}  // namespace

TEST_CASE("single month quote is reproduced exactly") {
    const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-02-01", "2020-02-29", 39.76)};
    const auto r = bootstrap_monthly_curve(q, 24);
    REQUIRE(r.curve.buckets.size() == 1);
    CHECK(r.curve.buckets[0].value == 39.76);
    CHECK(r.curve.buckets[0].weight == 29.0);
    CHECK(r.removed_products.empty());
}

TEST_CASE("flat fill of a quarter around a pinned month") {
    // Oct-20 (31 days) pinned at 33; Nov (30) and Dec (31) share x with (31*33 + 61x)/92 = 30.
    const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-10-01", "2020-12-31", 30.0),
                                    quote("2020-01-02", "2020-10-01", "2020-10-31", 33.0)};
    const auto r = bootstrap_monthly_curve(q, 24);
    const double expected = (30.0 * 92.0 - 33.0 * 31.0) / 61.0;
    REQUIRE(r.curve.buckets.size() == 3);
    CHECK(r.curve.buckets[0].value == 33.0);
    CHECK(r.curve.buckets[1].value == doctest::Approx(expected).epsilon(1e-14));
    CHECK(r.curve.buckets[2].value == doctest::Approx(expected).epsilon(1e-14));
    REQUIRE(r.fill_groups.size() == 1);
    CHECK(r.fill_groups[0].size() == 2);
    // With equal weights the same equation gives (3*30 - 33)/2 = 28.5.
    CHECK((3.0 * 30.0 - 33.0) / 2.0 == 28.5);
}

TEST_CASE("sample curve: months pinned, coarse products flat-filled") {
    const auto quotes = sample_quotes();
    const auto r = bootstrap_monthly_curve(quotes, 36);
    const auto& c = r.curve;
    REQUIRE(c.buckets.size() == 36);
    const int jan20 = month_index(parse_date("2020-01-01"));
    CHECK(c.find(jan20)->value == 36.05);
    CHECK(c.find(jan20 + 1)->value == 39.76);
    CHECK(c.find(jan20 + 2)->value == 37.15);
    for (int m = jan20 + 3; m < jan20 + 6; ++m) CHECK(c.find(m)->value == doctest::Approx(35.50).epsilon(1e-14));
    for (int m = jan20 + 12; m < jan20 + 24; ++m) CHECK(c.find(m)->value == doctest::Approx(43.85).epsilon(1e-14));
    for (int m = jan20 + 24; m < jan20 + 36; ++m) CHECK(c.find(m)->value == doctest::Approx(46.55).epsilon(1e-14));
    CHECK(verify_no_arbitrage(c, quotes).max_residual <= 1e-9);
    for (const auto& res : r.residuals) CHECK(res.residual <= 1e-9);
    CHECK(extract_fixed_delivery(c, 1) == 39.76);
    CHECK(extract_fixed_delivery(c, 0) == 36.05);
    CHECK_THROWS_AS(extract_fixed_delivery(c, 36), ValidationError);
    CHECK_THROWS_AS(extract_fixed_delivery(c, -1), ValidationError);
}

TEST_CASE("fully covered coarse products are removed") {
    const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-04-01", "2020-06-30", 35.0),
                                    quote("2020-01-02", "2020-04-01", "2020-04-30", 34.0),
                                    quote("2020-01-02", "2020-05-01", "2020-05-31", 35.0),
                                    quote("2020-01-02", "2020-06-01", "2020-06-30", 36.0)};
    const auto r = bootstrap_monthly_curve(q, 24);
    REQUIRE(r.removed_products.size() == 1);
    CHECK(r.removed_products[0].granularity == Granularity::quarter);
    CHECK(r.curve.buckets.size() == 3);
}

TEST_CASE("bootstrap errors") {
    SUBCASE("conflicting quotes on one window") {
        const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-04-01", "2020-06-30", 35.0),
                                        quote("2020-01-02", "2020-04-01", "2020-06-30", 36.0)};
        CHECK_THROWS_AS(bootstrap_monthly_curve(q, 24), NumericalError);
    }
    SUBCASE("identical duplicate is accepted") {
        const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-04-01", "2020-06-30", 35.0),
                                        quote("2020-01-02", "2020-04-01", "2020-06-30", 35.0)};
        CHECK(bootstrap_monthly_curve(q, 24).curve.buckets.size() == 3);
    }
    SUBCASE("negative implied month") {
        const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-04-01", "2020-06-30", 10.0),
                                        quote("2020-01-02", "2020-04-01", "2020-04-30", 40.0)};
        CHECK_THROWS_AS(bootstrap_monthly_curve(q, 24), NumericalError);
    }
    SUBCASE("mixed dates") {
        const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-04-01", "2020-06-30", 10.0),
                                        quote("2020-01-03", "2020-04-01", "2020-04-30", 40.0)};
        CHECK_THROWS_AS(bootstrap_monthly_curve(q, 24), ValidationError);
    }
    SUBCASE("empty") {
        CHECK_THROWS_AS(bootstrap_monthly_curve(std::vector<QuotedSwap>{}, 24), ValidationError);
    }
}

TEST_CASE("verify_no_arbitrage direct arithmetic") {
    StepwiseCurve flat{"DE", parse_date("2020-01-02"), {}};
    const int m0 = month_index(parse_date("2020-01-01"));
    for (int m = m0; m < m0 + 24; ++m) flat.buckets.push_back({m, 50.0, double(days_in_month(m))});
    const std::vector<QuotedSwap> q{quote("2020-01-02", "2020-07-01", "2020-09-30", 49.0)};
    CHECK(verify_no_arbitrage(flat, q).max_residual == doctest::Approx(1.0 / 49.0).epsilon(1e-14));
    CHECK(verify_no_arbitrage(flat, std::vector<QuotedSwap>{}).max_residual == 0.0);
    const std::vector<QuotedSwap> outside{quote("2020-01-02", "2023-01-01", "2023-12-31", 49.0)};
    const auto check = verify_no_arbitrage(flat, outside);
    CHECK(check.max_residual == 0.0);
    CHECK(check.uncheckable.size() == 1);
    for (int h = 0; h < 24; ++h) CHECK(extract_fixed_delivery(flat, h) == 50.0);
}

TEST_CASE("property: randomized nested quote sets reconstruct exactly") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> level(20.0, 120.0);
    std::bernoulli_distribution coin(0.5);
    const Date trade = parse_date("2021-03-15");
    const int m0 = month_index(trade);
    for (int trial = 0; trial < 100; ++trial) {
        // A true monthly curve; quotes are consistent averages of it.
        std::vector<double> truth(48);
        for (auto& v : truth) v = level(rng);
        auto avg = [&](int first, int count) {
            double num = 0, den = 0;
            for (int m = first; m < first + count; ++m) {
                num += days_in_month(m) * truth[std::size_t(m - m0)];
                den += days_in_month(m);
            }
            return num / den;
        };
        std::vector<QuotedSwap> quotes;
        for (int m = m0; m < m0 + 6; ++m)
            if (coin(rng)) quotes.push_back(window_quote(trade, m, 1, truth[std::size_t(m - m0)]));
        for (int qtr = m0 / 3 + 1; qtr < m0 / 3 + 8; ++qtr)
            if (coin(rng) && (qtr * 3 + 3 - m0) <= 48) quotes.push_back(window_quote(trade, qtr * 3, 3, avg(qtr * 3, 3)));
        for (int y = m0 / 12 + 1; y <= m0 / 12 + 2; ++y)
            if (y * 12 + 12 - m0 <= 48) quotes.push_back(window_quote(trade, y * 12, 12, avg(y * 12, 12)));
        std::shuffle(quotes.begin(), quotes.end(), rng);

        const auto r = bootstrap_monthly_curve(quotes, 48);
        CHECK(verify_no_arbitrage(r.curve, quotes).max_residual <= 1e-9);
        // Granularity dominance: quoted months keep their quote.
        for (const auto& q : quotes) {
            if (q.granularity == Granularity::month) CHECK(r.curve.find(q.first_month())->value == q.price);
        }
        // Monotone horizon: a shorter horizon is a prefix with identical values.
        const auto shorter = bootstrap_monthly_curve(quotes, 20);
        for (const auto& b : shorter.curve.buckets) CHECK(r.curve.find(b.month)->value == b.value);
        // Weight invariance of flat fills: a group shares one value exactly.
        for (const auto& g : r.fill_groups)
            for (int m : g) CHECK(r.curve.find(m)->value == r.curve.find(g.front())->value);
    }
}

TEST_CASE("curve csv round trip and bootstrap_all grouping") {
    auto quotes = sample_quotes();
    quotes.push_back(quote("2020-01-03", "2020-02-01", "2020-02-29", 40.4));
    quotes.push_back(quote("2020-01-02", "2020-02-01", "2020-02-29", 20.0, "IT"));
    const auto reports = bootstrap_all(quotes, 36);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].curve.market == "DE");
    CHECK(reports[1].curve.as_of == parse_date("2020-01-03"));
    CHECK(reports[2].curve.market == "IT");
    std::vector<StepwiseCurve> curves;
    for (const auto& r : reports) curves.push_back(r.curve);
    std::stringstream ss;
    write_curves_csv(ss, curves);
    const auto back = read_curves_csv(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(back[i].buckets.size() == curves[i].buckets.size());
        for (std::size_t j = 0; j < back[i].buckets.size(); ++j) {
            CHECK(back[i].buckets[j].value == curves[i].buckets[j].value);
            CHECK(back[i].buckets[j].month == curves[i].buckets[j].month);
        }
    }
    const std::vector<Date> days{parse_date("2020-02-10"), parse_date("2030-01-01")};
    const auto fwd = daily_forward(curves[0], days);
    CHECK(fwd[0] == 39.76);
    CHECK(is_missing(fwd[1]));
}
