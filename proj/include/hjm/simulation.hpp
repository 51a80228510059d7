#pragma once

#include "hjm/calibration.hpp"
#include "hjm/curve.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hjm {

struct SimConfig {
    std::uint64_t seed = 0;
    int n_paths = 1;
    double step = 1.0 / 252.0;  // year fraction per grid step
    double horizon = 1.0;       // year fraction
    bool antithetic = false;

    void validate() const;
    /// 0, step, 2 step, ..., horizon (the last step may be shorter).
    std::vector<double> time_grid() const;
};

/// Simulated prices, laid out path-major: values[(path * n_times + time) * n_products + product].
struct PathSet {
    std::vector<double> values;
    std::vector<double> time_grid;
    std::vector<std::string> product_keys;
    SimConfig config;

    int n_paths() const { return config.n_paths; }
    int n_times() const { return static_cast<int>(time_grid.size()); }
    int n_products() const { return static_cast<int>(product_keys.size()); }
    double value(int path, int time, int product) const {
        return values[(static_cast<std::size_t>(path) * time_grid.size() + static_cast<std::size_t>(time)) *
                          product_keys.size() + static_cast<std::size_t>(product)];
    }
    int product_index(const std::string& key) const;
    /// Grid index of time `t`; throws ValidationError when `t` is not a grid point.
    int time_index(double t) const;
    /// All paths of one product at one time.
    std::vector<double> cross_section(int time, int product) const;
};

enum class ContractKind { fixed_delivery, swap, spot };

/// A simulated contract. Times are year fractions from the simulation start.
struct ContractDescriptor {
    int market = 0;
    ContractKind kind = ContractKind::fixed_delivery;
    int bucket = 1;             // fixed_delivery: 1-based bucket, delivery at bucket * bucket_width
    double delivery_start = 0;  // swap
    double delivery_end = 0;    // swap
    double initial = 0;         // fixed_delivery / swap
    std::string key;
};

/// Fixed-delivery products for every (market, bucket) with initial prices
/// initial[market][bucket - 1]. Each product is frozen after its delivery.
PathSet simulate_fixed_delivery(const FactorModel& model, const std::vector<std::vector<double>>& initial,
                                const SimConfig& cfg);

/// Swaps whose volatility row follows the time to delivery start.
/// Throws ValidationError "contract in delivery" when a start is not after t0.
PathSet simulate_swap(const FactorModel& model, std::span<const ContractDescriptor> swaps, const SimConfig& cfg);

/// Shocks every curve bucket with its own frozen row over n_days steps.
/// Product j of the result is curve bucket j; time grid is {0, n_days * step}.
PathSet simulate_short_horizon(const FactorModel& model, const StepwiseCurve& curve, int n_days, const SimConfig& cfg);

struct SpotInput {
    int market = 0;
    std::vector<double> forward;  // F(t0, t_n) on the simulation grid, kMissing for gaps
    std::string key;
};

/// Spot prices: S(t) = F(t0, t) exp(-0.5 v(t) + sum_i sigma_i . [W over the times whose
/// residual maturity t - s fell in bucket i]).
PathSet simulate_spot(const FactorModel& model, std::span<const SpotInput> markets, const SimConfig& cfg);

/// Deterministic volatility factor sigma(x) = gamma * exp(-2 k x), x = time to expiry.
struct ExponentialFactor {
    double gamma = 0.0;
    double k = 0.0;

    /// Integral of sigma(x)^2 for x in [a, b].
    double integrated_variance(double a, double b) const;
};

using ParametricVol = std::vector<ExponentialFactor>;

/// One contract expiring at `expiry` under a parametric volatility, simulated
/// exactly step by step. Frozen after expiry.
PathSet simulate_parametric(const ParametricVol& vol, double initial, double expiry, const SimConfig& cfg);

/// Var[ln F(t)] for the parametric model: sum_j of sigma_j^2 integrated over s in [t0, t].
double theoretical_log_variance(const ParametricVol& vol, double expiry, double t0, double t);

/// Var[ln F(t)] for a contract under the stepwise model, from bucket occupancy times.
double theoretical_log_variance(const FactorModel& model, const ContractDescriptor& contract, double t);

/// Occupancy of each bucket (index 0 = bucket 1) by the contract's residual maturity over [0, t].
std::vector<double> bucket_occupancy(const FactorModel& model, const ContractDescriptor& contract, double t);

struct SanityRow {
    std::string product;
    double time = 0.0;
    double empirical = 0.0;
    double theoretical = 0.0;
    double relative_error = 0.0;
    double std_error = 0.0;  // standard error of the empirical variance
};

struct SanityReport {
    std::vector<SanityRow> variance;
    Eigen::MatrixXd empirical_correlation;  // pooled log-return correlation across products
    Eigen::MatrixXd model_correlation;      // empty when not supplied
    double max_relative_error = 0.0;
    double max_correlation_gap = 0.0;
};

/// Compares empirical Var[ln F(t)] with `theoretical(product, time index)` at every grid
/// point after t0, and the pooled log-return correlation with `model_correlation` when given.
SanityReport sanity_check(const PathSet& paths, const std::vector<std::vector<double>>& theoretical,
                          const Eigen::MatrixXd& model_correlation = {});

/// Correlation implied by sigma rows: rows_i . rows_j / (|rows_i| |rows_j|).
Eigen::MatrixXd row_correlation(const Eigen::MatrixXd& rows);

/// Pooled one-step log-return correlation of all products across paths and steps.
Eigen::MatrixXd log_return_correlation(const PathSet& paths);

struct PathSummaryRow {
    std::string product;
    double time = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
};

std::vector<PathSummaryRow> summarize_paths(const PathSet& paths);

/// Grid points first..last (inclusive) of every path and product. Times keep their
/// original values, so discounting stays measured from the simulation start.
PathSet slice_times(const PathSet& paths, int first, int last);

/// `path_id,time,product_key,value`.
void write_paths_csv(std::ostream& out, const PathSet& paths);
PathSet read_paths_csv(std::istream& in);
void write_summary_csv(std::ostream& out, std::span<const PathSummaryRow> rows);

}  // namespace hjm
