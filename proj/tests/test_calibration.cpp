#include "doctest.h"

#include "hjm/calibration.hpp"
#include "hjm/errors.hpp"
#include "hjm/simulation.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace hjm;

namespace {

LogReturnMatrix returns_of(const Eigen::MatrixXd& values, const std::string& market = "X") {
    LogReturnMatrix x;
    x.values = values;
    for (Eigen::Index j = 0; j < values.cols(); ++j) x.column_keys.push_back({market, "M" + std::to_string(j)});
    x.dates.assign(static_cast<std::size_t>(values.rows()), parse_date("2020-01-01"));
    return x;
}

Eigen::MatrixXd random_psd(int n, int rank, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(n, rank);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j) a(i, j) = z(rng) * 0.01;
    Eigen::MatrixXd s = a * a.transpose();
    return 0.5 * (s + s.transpose());
}

Eigen::Matrix4d toy_sigma() {
    Eigen::Matrix4d s;
    s << 0.15, 0.019, -0.13, 0.018,
         0.25, 0.014, -0.19, 0.015,
         0.185, 0.012, -0.13, 0.018,
         0.125, 0.044, -0.131, 0.043;
    return s;
}

// Sample covariance of the toy market reported alongside the recovered sigma.
Eigen::Matrix4d reference_sigma_hat() {
    Eigen::Matrix4d s;
    s << 1.4859, 2.3309, 1.6781, 1.3756,
         2.3309, 3.6897, 2.6580, 2.1138,
         1.6781, 2.6580, 1.9197, 1.5256,
         1.3756, 2.1138, 1.5256, 1.3405;
    return s * 1e-4;
}

}  // namespace

TEST_CASE("identical rows give a zero covariance") {
    Eigen::MatrixXd v(2, 3);
    v << 0.1, -0.2, 0.3, 0.1, -0.2, 0.3;
    const auto est = estimate_covariance(returns_of(v));
    CHECK(est.sigma_hat.cwiseAbs().maxCoeff() == 0.0);
    CHECK(est.n_obs == 2);
    CHECK(est.demeaned);
}

TEST_CASE("two opposite rows: covariance 2a^2 everywhere") {
    const double a = 0.03;
    Eigen::MatrixXd v(2, 2);
    v << a, a, -a, -a;
    const auto est = estimate_covariance(returns_of(v));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(est.sigma_hat(i, j) == doctest::Approx(2 * a * a).epsilon(1e-14));
}

TEST_CASE("incomplete rows are dropped before estimating") {
    Eigen::MatrixXd v(4, 2);
    v << 0.01, 0.02, kMissing, 0.5, -0.01, -0.02, 0.03, kMissing;
    const auto est = estimate_covariance(returns_of(v));
    CHECK(est.n_obs == 2);
    CHECK(est.sigma_hat(0, 1) == doctest::Approx(2 * 0.01 * 0.02));

    Eigen::MatrixXd sparse(3, 2);
    sparse << 0.01, kMissing, kMissing, 0.02, 0.01, 0.02;
    CHECK_THROWS_AS(estimate_covariance(returns_of(sparse)), ValidationError);
}

TEST_CASE("cross-product mode follows the literal recipe") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 2, 3, 4, 5, 6;
    const auto est = estimate_covariance(returns_of(v), CovarianceMode::cross_product);
    CHECK_FALSE(est.demeaned);
    CHECK(est.sigma_hat(0, 0) == 35.0);
    CHECK(est.sigma_hat(0, 1) == 44.0);
    CHECK(est.sigma_hat(1, 1) == 56.0);
}

TEST_CASE("2x2 eigendecomposition with sign rule") {
    Eigen::Matrix2d s;
    s << 2, 1, 1, 2;
    const auto e = pca(s);
    CHECK(e.values(0) == doctest::Approx(3.0));
    CHECK(e.values(1) == doctest::Approx(1.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(e.vectors(0, 0) == doctest::Approx(r));
    CHECK(e.vectors(1, 0) == doctest::Approx(r));
    CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(r));
    CHECK(e.vectors(0, 1) == doctest::Approx(-e.vectors(1, 1)));
}

TEST_CASE("scaled identity keeps every eigenvalue") {
    const Eigen::MatrixXd s = 0.7 * Eigen::MatrixXd::Identity(4, 4);
    const auto e = pca(s);
    for (int i = 0; i < 4; ++i) CHECK(e.values(i) == doctest::Approx(0.7));
    CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
    for (int i = 0; i < 4; ++i) CHECK(e.vectors.col(i).maxCoeff() >= e.vectors.col(i).cwiseAbs().maxCoeff());
}

TEST_CASE("pca rejects asymmetric input") {
    Eigen::Matrix2d s;
    s << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS(pca(s), ValidationError);
}

TEST_CASE("toy covariance: spectrum and rank-two reduction as reported") {
    const auto e = pca(Eigen::MatrixXd(reference_sigma_hat()));
    const double reported[] = {0.8325e-3, 0.0107e-3, 0.0005e-3, 0.0};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(e.values(i) - reported[i]) < 1e-7);
    const Eigen::VectorXd ratios = explained_ratios(e.values);
    CHECK(ratios(1) > 0.99);
    CHECK(ratios(0) < 0.99);

    const auto model = build_sigma_star(e, 2, 1.0 / 260.0);
    Eigen::Matrix4d reduced;
    reduced << 1.4846, 2.3302, 1.6800, 1.3760,
               2.3302, 3.6892, 2.6592, 2.1140,
               1.6800, 2.6592, 1.9169, 1.5250,
               1.3760, 2.1140, 1.5250, 1.3404;
    CHECK((model.implied_covariance() - reduced * 1e-4).cwiseAbs().maxCoeff() < 2e-8);
}

TEST_CASE("factor selection") {
    Eigen::VectorXd lambda(4);
    lambda << 0.8325e-3, 0.0107e-3, 0.0005e-3, 0.0;
    CHECK(select_factors(lambda, 0.99) == 2);
    CHECK(select_factors(lambda, 0.98) == 1);
    CHECK(select_factors(lambda, 1.0) == 3);
    Eigen::VectorXd two(2);
    two << 1.0, 0.0;
    CHECK(select_factors(two, 0.5) == 1);
    CHECK_THROWS_AS(select_factors(Eigen::VectorXd::Zero(3), 0.9), ValidationError);
    CHECK_THROWS_AS(select_factors(lambda, 0.0), ValidationError);
    CHECK_THROWS_AS(select_factors(lambda, 1.5), ValidationError);
}

TEST_CASE("single factor from the 2x2 example") {
    Eigen::Matrix2d s;
    s << 2, 1, 1, 2;
    const auto m = build_sigma_star(pca(s), 1, 1.0);
    CHECK(m.sigma_star(0, 0) == doctest::Approx(std::sqrt(3.0) / std::sqrt(2.0)));
    CHECK(m.sigma_star(1, 0) == doctest::Approx(std::sqrt(3.0) / std::sqrt(2.0)));
    const Eigen::MatrixXd ss = m.sigma_star * m.sigma_star.transpose();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(ss(i, j) == doctest::Approx(1.5));
    CHECK_THROWS_AS(build_sigma_star(pca(s), 0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_sigma_star(pca(s), 3, 1.0), ValidationError);
    CHECK_THROWS_AS(build_sigma_star(pca(s), 1, 0.0), ValidationError);
}

TEST_CASE("one-by-one full sigma") {
    const double s = 0.02, dt = 1.0 / 252.0;
    Eigen::MatrixXd v(2, 1);
    v << s / std::sqrt(2.0), -s / std::sqrt(2.0);
    const auto est = estimate_covariance(returns_of(v));
    CHECK(est.sigma_hat(0, 0) == doctest::Approx(s * s));
    CHECK(full_sigma(est, dt)(0, 0) == doctest::Approx(s / std::sqrt(dt)));
}

TEST_CASE("spectral properties on random covariances") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 7;
        const Eigen::MatrixXd s = random_psd(n, 1 + trial % n, rng);
        const auto e = pca(s);
        CHECK(std::abs(e.values.sum() - s.trace()) <= 1e-10 * s.trace());
        CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);
        for (int i = 1; i < n; ++i) CHECK(e.values(i) <= e.values(i - 1));
        CHECK(e.values.minCoeff() >= 0.0);
        const double dt = 1.0 / 252.0;
        double previous = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= n; ++k) {
            const auto m = build_sigma_star(e, k, dt);
            const double err = (s - m.implied_covariance()).norm();
            CHECK(err <= previous + 1e-18);
            // Frobenius error of a spectral truncation is the norm of the dropped eigenvalues.
            CHECK(err == doctest::Approx(e.values.tail(n - k).norm()).epsilon(1e-6).scale(s.norm() * 1e-6));
            previous = err;
        }
        const auto full = build_sigma_star(e, n, dt);
        CHECK((s - full.implied_covariance()).norm() <= 1e-10 * s.norm());
        const Eigen::VectorXd ratios = explained_ratios(e.values);
        CHECK(ratios(n - 1) == doctest::Approx(1.0));
        for (int i = 1; i < n; ++i) CHECK(ratios(i) >= ratios(i - 1));
    }
}

TEST_CASE("pca is bit-identical on repeated input") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd s = random_psd(6, 6, rng);
    const auto a = pca(s);
    const auto b = pca(s);
    CHECK(a.values == b.values);
    CHECK(a.vectors == b.vectors);
}

TEST_CASE("correlation surface") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    const int n = 10000;
    Eigen::MatrixXd v(n, 4);
    for (int i = 0; i < n; ++i) {
        const double common = z(rng);
        v(i, 0) = z(rng);
        v(i, 1) = z(rng);
        v(i, 2) = common + 0.1 * z(rng);
        v(i, 3) = common + 0.1 * z(rng);
    }
    LogReturnMatrix x = returns_of(v);
    x.column_keys = {{"A", "M0"}, {"A", "M1"}, {"B", "M0"}, {"B", "M1"}};
    const auto aa = correlation_surface(x, "A", "A");
    CHECK(aa(0, 0) == doctest::Approx(1.0));
    CHECK(aa(1, 1) == doctest::Approx(1.0));
    CHECK(std::abs(aa(0, 1)) < 0.05);
    const auto ab = correlation_surface(x, "A", "B");
    CHECK(ab.cwiseAbs().maxCoeff() < 0.05);
    const auto bb = correlation_surface(x, "B", "B");
    CHECK(bb(0, 1) == doctest::Approx(1.0 / 1.01).epsilon(0.01));
    CHECK((bb.array() <= 1.0).all());
    CHECK_THROWS_AS(correlation_surface(x, "A", "C"), ValidationError);

    v.col(1).setConstant(0.5);
    const auto flat = correlation_matrix(returns_of(v));
    CHECK(is_missing(flat(1, 1)));
    CHECK(is_missing(flat(0, 1)));
}

TEST_CASE("model document round trip") {
    std::mt19937_64 rng(9);
    const auto e = pca(random_psd(6, 6, rng));
    auto m = build_sigma_star(e, 3, 1.0 / 252.0, {{"DE", "TTF"}, 3, 1.0 / 12.0});
    m.as_of = parse_date("2021-01-04");
    std::stringstream ss;
    write_model_json(ss, m);
    const std::string text = ss.str();
    CHECK(text.find("\"buckets_per_market\"") != std::string::npos);
    CHECK(text.find("\"sigma_star\"") != std::string::npos);
    const auto back = read_model_json(ss);
    CHECK(back.markets == m.markets);
    CHECK(back.buckets_per_market == 3);
    CHECK(back.n_factors == 3);
    CHECK(back.dt == m.dt);
    CHECK(back.as_of == m.as_of);
    CHECK(back.sigma_star == m.sigma_star);
    CHECK(back.eigenvalues == m.eigenvalues);
    CHECK(back.row(1, 2) == m.sigma_star.row(4));
    CHECK(back.row(1, 9) == m.sigma_star.row(5));

    std::stringstream bad("{\"markets\": [\"DE\"]}");
    CHECK_THROWS_AS(read_model_json(bad), ValidationError);
}

TEST_CASE("bucket lookup uses half-open intervals") {
    FactorModel m;
    m.markets = {"X"};
    m.buckets_per_market = 3;
    m.bucket_width = 1.0 / 12.0;
    CHECK(m.bucket_for(0.01) == 1);
    CHECK(m.bucket_for(1.0 / 12.0) == 1);
    CHECK(m.bucket_for(1.0 / 12.0 + 1e-6) == 2);
    CHECK(m.bucket_for(5.0) == 3);
}

TEST_CASE("recalibration recovers the generating covariance") {
    // Simulate the toy market, recover the sample covariance, compare with dt sigma sigma^T.
    const double dt = 1.0 / 260.0;
    FactorModel truth;
    truth.markets = {"X"};
    truth.buckets_per_market = 4;
    truth.bucket_width = 100.0;  // nothing reaches delivery
    truth.n_factors = 4;
    truth.dt = dt;
    truth.sigma_star = toy_sigma();
    SimConfig cfg;
    cfg.seed = 21;
    cfg.n_paths = 1;
    cfg.step = dt;
    cfg.horizon = 4000 * dt;
    const auto paths = simulate_fixed_delivery(truth, {{1.0, 1.0, 1.0, 1.0}}, cfg);
    const int n = paths.n_times() - 1;
    Eigen::MatrixXd v(n, 4);
    for (int t = 0; t < n; ++t)
        for (int k = 0; k < 4; ++k) v(t, k) = std::log(paths.value(0, t + 1, k) / paths.value(0, t, k));
    const auto est = estimate_covariance(returns_of(v));
    const Eigen::MatrixXd target = truth.implied_covariance();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) / n);
            CHECK(std::abs(est.sigma_hat(i, j) - target(i, j)) < 3.0 * se);
        }
    }
    const auto e = pca(est);
    CHECK(select_factors(e.values, 0.99) == 2);
}
