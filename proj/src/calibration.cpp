#include "hjm/calibration.hpp"

#include "hjm/errors.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace hjm {

CovarianceEstimate estimate_covariance(const LogReturnMatrix& x, CovarianceMode mode) {
    std::vector<Eigen::Index> complete;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        bool ok = true;
        for (Eigen::Index j = 0; j < x.cols() && ok; ++j) ok = !is_missing(x.values(i, j));
        if (ok) complete.push_back(i);
    }
    if (complete.size() < 2) {
        throw ValidationError("covariance needs at least two complete rows, got " + std::to_string(complete.size()));
    }
    Eigen::MatrixXd data(static_cast<Eigen::Index>(complete.size()), x.cols());
    for (std::size_t r = 0; r < complete.size(); ++r) data.row(static_cast<Eigen::Index>(r)) = x.values.row(complete[r]);

    CovarianceEstimate est;
    est.n_obs = static_cast<int>(complete.size());
    est.column_keys = x.column_keys;
    if (mode == CovarianceMode::unbiased) {
        const Eigen::RowVectorXd mean = data.colwise().mean();
        data.rowwise() -= mean;
        est.sigma_hat = data.transpose() * data / static_cast<double>(est.n_obs - 1);
        est.demeaned = true;
    } else {
        est.sigma_hat = data.transpose() * data;
        est.demeaned = false;
    }
    // Exact symmetry; the product is symmetric only up to rounding.
    est.sigma_hat = 0.5 * (est.sigma_hat + est.sigma_hat.transpose()).eval();
    return est;
}

EigenPairs pca(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) {
        throw ValidationError("pca needs a non-empty square matrix");
    }
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ValidationError("pca input is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed");
    }
    const Eigen::Index n = cov.rows();
    const double trace = cov.trace();
    EigenPairs out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = n - 1 - i;  // solver sorts ascending
        double lambda = solver.eigenvalues()(src);
        if (lambda < 1e-12 * trace) lambda = 0.0;
        out.values(i) = lambda;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index k = 1; k < n; ++k) {
            if (std::abs(v(k)) > std::abs(v(arg))) arg = k;
        }
        if (v(arg) < 0.0) v = -v;
        out.vectors.col(i) = v;
    }
    return out;
}

Eigen::VectorXd explained_ratios(const Eigen::VectorXd& eigenvalues) {
    const double total = eigenvalues.sum();
    if (!(total > 0.0)) {
        throw ValidationError("spectrum is identically zero");
    }
    Eigen::VectorXd out(eigenvalues.size());
    double cum = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        cum += eigenvalues(i);
        out(i) = cum / total;
    }
    return out;
}

int select_factors(const Eigen::VectorXd& eigenvalues, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ValidationError("threshold must lie in (0, 1]");
    }
    if ((eigenvalues.array() < 0.0).any()) {
        throw ValidationError("eigenvalues must be nonnegative");
    }
    const Eigen::VectorXd ratios = explained_ratios(eigenvalues);
    for (Eigen::Index i = 0; i < ratios.size(); ++i) {
        if (ratios(i) >= threshold) return static_cast<int>(i + 1);
    }
    return static_cast<int>(ratios.size());
}

int FactorModel::market_index(const std::string& market) const {
    const auto it = std::find(markets.begin(), markets.end(), market);
    if (it == markets.end()) {
        throw ValidationError("market '" + market + "' is not in the model");
    }
    return static_cast<int>(it - markets.begin());
}

Eigen::RowVectorXd FactorModel::row(int market, int bucket) const {
    if (market < 0 || market >= static_cast<int>(markets.size()) || bucket < 1) {
        throw ValidationError("model row out of range");
    }
    const int b = std::min(bucket, buckets_per_market);
    return sigma_star.row(market * buckets_per_market + b - 1);
}

int FactorModel::bucket_for(double tau) const {
    // Half-open buckets (T_{i-1}, T_i]; the small slack absorbs rounding at boundaries.
    const double x = tau / bucket_width;
    int b = static_cast<int>(std::ceil(x - 1e-9));
    return std::clamp(b, 1, buckets_per_market);
}

Eigen::MatrixXd FactorModel::implied_covariance() const { return dt * sigma_star * sigma_star.transpose(); }

void FactorModel::validate() const {
    if (markets.empty() || buckets_per_market < 1) {
        throw ValidationError("model needs at least one market and one bucket");
    }
    if (sigma_star.rows() != static_cast<Eigen::Index>(markets.size()) * buckets_per_market) {
        throw ValidationError("sigma_star rows do not match markets x buckets");
    }
    if (n_factors < 1 || sigma_star.cols() != n_factors) {
        throw ValidationError("sigma_star columns do not match n_factors");
    }
    if (!(dt > 0.0) || !(bucket_width > 0.0)) {
        throw ValidationError("dt and bucket width must be positive");
    }
}

FactorModel build_sigma_star(const EigenPairs& eig, int n_factors, double dt, ModelLayout layout) {
    const auto total = static_cast<int>(eig.values.size());
    if (n_factors < 1 || n_factors > total) {
        throw ValidationError("factor count " + std::to_string(n_factors) + " outside [1, " + std::to_string(total) + "]");
    }
    if (!(dt > 0.0)) {
        throw ValidationError("dt must be positive");
    }
    if (layout.markets.empty()) {
        layout.markets = {"X"};
        layout.buckets_per_market = total;
    }
    if (static_cast<int>(layout.markets.size()) * layout.buckets_per_market != total) {
        throw ValidationError("layout does not match the covariance dimension");
    }
    FactorModel m;
    m.markets = layout.markets;
    m.buckets_per_market = layout.buckets_per_market;
    m.bucket_width = layout.bucket_width;
    m.n_factors = n_factors;
    m.dt = dt;
    m.eigenvalues = eig.values;
    m.explained = explained_ratios(eig.values);
    m.sigma_star.resize(total, n_factors);
    for (int i = 0; i < n_factors; ++i) {
        m.sigma_star.col(i) = eig.vectors.col(i) * std::sqrt(eig.values(i) / dt);
    }
    return m;
}

Eigen::MatrixXd full_sigma(const CovarianceEstimate& cov, double dt) {
    const EigenPairs eig = pca(cov);
    return build_sigma_star(eig, static_cast<int>(eig.values.size()), dt).sigma_star;
}

namespace {

double pair_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double sa = 0, sb = 0;
    int n = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (is_missing(a(i)) || is_missing(b(i))) continue;
        sa += a(i);
        sb += b(i);
        ++n;
    }
    if (n < 2) return kMissing;
    const double ma = sa / n, mb = sb / n;
    double caa = 0, cbb = 0, cab = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (is_missing(a(i)) || is_missing(b(i))) continue;
        caa += (a(i) - ma) * (a(i) - ma);
        cbb += (b(i) - mb) * (b(i) - mb);
        cab += (a(i) - ma) * (b(i) - mb);
    }
    if (!(caa > 0.0) || !(cbb > 0.0)) return kMissing;
    return std::clamp(cab / std::sqrt(caa * cbb), -1.0, 1.0);
}

}  // namespace

Eigen::MatrixXd correlation_matrix(const LogReturnMatrix& x) {
    Eigen::MatrixXd out(x.cols(), x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            out(i, j) = out(j, i) = pair_correlation(x.values.col(i), x.values.col(j));
        }
    }
    return out;
}

Eigen::MatrixXd correlation_surface(const LogReturnMatrix& x, const std::string& market_a,
                                    const std::string& market_b) {
    std::vector<Eigen::Index> ca, cb;
    for (std::size_t j = 0; j < x.column_keys.size(); ++j) {
        if (x.column_keys[j].market == market_a) ca.push_back(static_cast<Eigen::Index>(j));
        if (x.column_keys[j].market == market_b) cb.push_back(static_cast<Eigen::Index>(j));
    }
    if (ca.empty() || cb.empty()) {
        throw ValidationError("correlation surface: market not present in returns");
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ca.size()), static_cast<Eigen::Index>(cb.size()));
    for (std::size_t i = 0; i < ca.size(); ++i)
        for (std::size_t j = 0; j < cb.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                pair_correlation(x.values.col(ca[i]), x.values.col(cb[j]));
    return out;
}

Eigen::MatrixXd covariance_to_correlation(const Eigen::MatrixXd& cov) {
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    Eigen::MatrixXd out(cov.rows(), cov.cols());
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        for (Eigen::Index j = 0; j < cov.cols(); ++j)
            out(i, j) = (sd(i) > 0.0 && sd(j) > 0.0) ? cov(i, j) / (sd(i) * sd(j)) : kMissing;
    return out;
}

void write_model_json(std::ostream& out, const FactorModel& model) {
    model.validate();
    nlohmann::ordered_json doc;
    doc["markets"] = model.markets;
    doc["buckets_per_market"] = model.buckets_per_market;
    doc["bucket_width"] = model.bucket_width;
    doc["n_factors"] = model.n_factors;
    doc["dt"] = model.dt;
    if (model.as_of) doc["as_of"] = format_date(*model.as_of);
    doc["eigenvalues"] = std::vector<double>(model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
    doc["explained"] = std::vector<double>(model.explained.data(), model.explained.data() + model.explained.size());
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < model.sigma_star.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(model.sigma_star.cols()));
        for (Eigen::Index j = 0; j < model.sigma_star.cols(); ++j) r[static_cast<std::size_t>(j)] = model.sigma_star(i, j);
        rows.push_back(r);
    }
    doc["sigma_star"] = rows;
    out << doc.dump(2) << '\n';
}

FactorModel read_model_json(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
        FactorModel m;
        m.markets = doc.at("markets").get<std::vector<std::string>>();
        m.buckets_per_market = doc.at("buckets_per_market").get<int>();
        m.bucket_width = doc.value("bucket_width", 1.0 / 12.0);
        m.n_factors = doc.at("n_factors").get<int>();
        m.dt = doc.at("dt").get<double>();
        if (doc.contains("as_of")) m.as_of = parse_date(doc.at("as_of").get<std::string>());
        const auto ev = doc.at("eigenvalues").get<std::vector<double>>();
        m.eigenvalues = Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
        if (doc.contains("explained")) {
            const auto ex = doc.at("explained").get<std::vector<double>>();
            m.explained = Eigen::Map<const Eigen::VectorXd>(ex.data(), static_cast<Eigen::Index>(ex.size()));
        } else if (m.eigenvalues.size() > 0) {
            m.explained = explained_ratios(m.eigenvalues);
        }
        const auto rows = doc.at("sigma_star").get<std::vector<std::vector<double>>>();
        m.sigma_star.resize(static_cast<Eigen::Index>(rows.size()), m.n_factors);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(rows[i].size()) != m.n_factors) {
                throw ValidationError("sigma_star row " + std::to_string(i) + " has the wrong length");
            }
            for (int j = 0; j < m.n_factors; ++j)
                m.sigma_star(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model document: ") + e.what());
    }
}

}  // namespace hjm
