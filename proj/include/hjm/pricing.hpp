#pragma once

#include "hjm/simulation.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace hjm {

enum class OptionType { call, put };

struct EuropeanOption {
    ContractDescriptor underlying;
    double maturity = 0.0;  // T0, year fraction from t0
    double strike = 0.0;
    double rate = 0.0;
    OptionType type = OptionType::call;

    void validate() const;
};

double normal_cdf(double x);

/// Black price with total log-variance `variance` over [t0, T0]. Zero variance gives the
/// discounted intrinsic value.
double black_price(double forward, double strike, double variance, double rate, double maturity, OptionType type);
double black_price(double forward, const EuropeanOption& opt, double variance);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Discounted mean and standard error of max(+-(F(T0) - K), 0) on one product.
McEstimate mc_european(const PathSet& paths, int product, double maturity, double strike, double rate,
                       OptionType type);

/// Polynomial regression of y on (x - center) / scale up to `degree`. The degree drops to
/// (distinct x values - 1) when the sample cannot identify more coefficients.
class CrossSectionRegression {
public:
    CrossSectionRegression(std::span<const double> x, int degree);

    /// Coefficients, one column per column of `y`.
    Eigen::MatrixXd fit(const Eigen::MatrixXd& y) const;
    /// Fitted values at the sample points.
    Eigen::MatrixXd fitted(const Eigen::MatrixXd& coef) const { return design_ * coef; }

    int degree() const { return degree_; }
    double center() const { return center_; }
    double scale() const { return scale_; }
    bool used_ridge() const { return ridge_; }

private:
    Eigen::MatrixXd design_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::LDLT<Eigen::MatrixXd> ridge_solver_;
    int degree_ = 0;
    double center_ = 0.0;
    double scale_ = 1.0;
    bool ridge_ = false;
};

/// Fitted continuation values for every resource state at one decision time.
struct StepPolicy {
    double center = 0.0;
    double scale = 1.0;
    Eigen::MatrixXd coef;  // (degree + 1) x states

    double continuation(int state, double x) const;
};

struct PolicyValuation {
    double value = 0.0;
    double std_error = 0.0;
    std::vector<StepPolicy> policy;
    bool in_sample = true;
    std::vector<std::string> warnings;
    std::vector<double> path_values;  // discounted value of each path, for paired comparisons
};

struct LsmcOptions {
    int degree = 3;
};

/// Continuation estimate for one state: regression of realized values on polynomials of x.
StepPolicy lsmc_continuation(std::span<const double> x, std::span<const double> realized, int degree = 3);

struct SwingContract {
    int u_max = 1;
    int d_max = 1;
    double strike = 0.0;
    double quantity = 1.0;

    void validate(int days) const;
};

struct SwingResult {
    PolicyValuation value;
    double lower_bound = 0.0;  // American call + American put
    double upper_bound = 0.0;  // strip of European calls and puts
    double lower_bound_se = 0.0;
    double upper_bound_se = 0.0;
};

/// Every grid point of `paths` is an exercise day; cash at time t is discounted by exp(-r t).
SwingResult price_swing(const SwingContract& c, const PathSet& paths, int product, double rate,
                        const LsmcOptions& opt = {});

/// Swing value alone, without the bounds.
PolicyValuation swing_value(const SwingContract& c, const PathSet& paths, int product, double rate,
                            const LsmcOptions& opt = {});

PolicyValuation american_option(const PathSet& paths, int product, double strike, double rate, OptionType type,
                                const LsmcOptions& opt = {});

struct VppContract {
    int t_on = 1;   // periods
    int t_off = 1;  // periods
    double q_min = 0.0;
    double q_max = 0.0;
    double startup_cost = 0.0;
    double shutdown_cost = 0.0;
    double heat_rate = 1.0;
    double period_hours = 1.0;  // MWh per MW per grid step

    void validate() const;
};

struct VppResult {
    PolicyValuation lsmc;
    double naive = 0.0;  // perfect foresight
    double naive_se = 0.0;
    double upper_bound = 0.0;  // strip of spark-spread calls at q_max
    double upper_bound_se = 0.0;
};

/// The plant starts off and unlocked. Each grid point is one dispatch period.
VppResult price_vpp(const VppContract& c, const PathSet& power, int power_product, const PathSet& fuel,
                    int fuel_product, double rate, const LsmcOptions& opt = {});

/// Policy replay only: value of a fitted dispatch policy on other paths.
PolicyValuation replay_vpp(const VppContract& c, const std::vector<StepPolicy>& policy, const PathSet& power,
                           int power_product, const PathSet& fuel, int fuel_product, double rate);

struct StorageContract {
    double v_min = 0.0;
    double v_max = 0.0;
    double v0 = 0.0;
    double v_target = 0.0;
    double i_min = 0.0;  // maximum withdrawal per day, negative
    double i_max = 0.0;  // maximum injection per day, positive
    double penalty_scale = 2.0;

    void validate() const;
};

/// Volume levels v0 + k * step inside [v_min, v_max], step = min(i_max, |i_min|).
struct VolumeGrid {
    std::vector<double> levels;
    int start = 0;        // index of v0
    int inject = 0;       // steps per injection
    int withdraw = 0;     // steps per withdrawal
    bool truncated = false;  // v_max or v_min not on the grid
};

VolumeGrid volume_grid(const StorageContract& c);

struct StorageResult {
    PolicyValuation sdp;
    double deterministic = 0.0;
    double deterministic_se = 0.0;
    PolicyValuation out_of_sample;
    VolumeGrid grid;
};

/// Decisions on every grid point but the last; the last grid point is the settlement
/// date, where the shortfall penalty is charged.
StorageResult price_storage(const StorageContract& c, const PathSet& paths, const PathSet& fresh_paths, int product,
                            double rate, const LsmcOptions& opt = {});

/// Policy replay only: value of a fitted storage policy on other paths.
PolicyValuation replay_storage(const StorageContract& c, const std::vector<StepPolicy>& policy,
                               const PathSet& paths, int product, double rate);

/// Repeats each time step `factor` times: daily prices held flat over each hour of the day.
PathSet expand_steps(const PathSet& paths, int factor);

}  // namespace hjm
