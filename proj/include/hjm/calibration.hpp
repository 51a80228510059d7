#pragma once

#include "hjm/date.hpp"
#include "hjm/marketdata.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hjm {

enum class CovarianceMode {
    unbiased,       // demeaned, divided by n - 1
    cross_product,  // X^T X exactly as the textbook recipe writes it
};

struct CovarianceEstimate {
    Eigen::MatrixXd sigma_hat;
    int n_obs = 0;
    std::vector<ColumnKey> column_keys;
    bool demeaned = true;
};

/// Sample covariance over the rows that have every column present.
/// Throws ValidationError with fewer than two complete rows.
CovarianceEstimate estimate_covariance(const LogReturnMatrix& x, CovarianceMode mode = CovarianceMode::unbiased);

/// Eigenpairs sorted by descending eigenvalue; each vector's largest-magnitude entry is positive.
struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

EigenPairs pca(const Eigen::MatrixXd& covariance);
inline EigenPairs pca(const CovarianceEstimate& cov) { return pca(cov.sigma_hat); }

/// Cumulative explained-variance ratios of a descending spectrum.
Eigen::VectorXd explained_ratios(const Eigen::VectorXd& eigenvalues);

/// Smallest N whose cumulative ratio reaches `threshold`.
int select_factors(const Eigen::VectorXd& eigenvalues, double threshold);

/// Reduced-factor lognormal volatility model. Rows are ordered market-major:
/// row k * buckets_per_market + (i - 1) holds bucket i of market k, where bucket i
/// covers times to delivery in ((i - 1) * bucket_width, i * bucket_width].
struct FactorModel {
    std::vector<std::string> markets;
    int buckets_per_market = 0;
    double bucket_width = 1.0 / 12.0;
    int n_factors = 0;
    double dt = 1.0 / 252.0;
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd explained;
    Eigen::MatrixXd sigma_star;  // (markets * buckets) x n_factors, annualised
    std::optional<Date> as_of;

    int market_index(const std::string& market) const;
    /// Volatility row for 1-based bucket `i`; buckets past the grid reuse the last row.
    Eigen::RowVectorXd row(int market, int bucket) const;
    /// Bucket containing time to delivery `tau` (> 0), clamped to [1, buckets_per_market].
    int bucket_for(double tau) const;
    /// dt * sigma* sigma*^T.
    Eigen::MatrixXd implied_covariance() const;
    void validate() const;
};

struct ModelLayout {
    std::vector<std::string> markets;
    int buckets_per_market = 0;
    double bucket_width = 1.0 / 12.0;
};

/// sigma* = C* Gamma*^{1/2} / sqrt(dt) with the leading `n_factors` eigenpairs.
/// An empty layout means one market named "X" owning every row.
FactorModel build_sigma_star(const EigenPairs& eig, int n_factors, double dt, ModelLayout layout = {});

/// Full-rank volatility: dt * s s^T reproduces the covariance.
Eigen::MatrixXd full_sigma(const CovarianceEstimate& cov, double dt);

/// Pearson correlations over rows where both columns are present; NaN for zero variance.
Eigen::MatrixXd correlation_matrix(const LogReturnMatrix& x);

/// Rows: tenors of market_a; columns: tenors of market_b.
Eigen::MatrixXd correlation_surface(const LogReturnMatrix& x, const std::string& market_a,
                                    const std::string& market_b);

/// Correlation of a covariance matrix.
Eigen::MatrixXd covariance_to_correlation(const Eigen::MatrixXd& cov);

void write_model_json(std::ostream& out, const FactorModel& model);
FactorModel read_model_json(std::istream& in);

}  // namespace hjm
