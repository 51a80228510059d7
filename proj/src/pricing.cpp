#include "hjm/pricing.hpp"

#include "hjm/errors.hpp"
#include "hjm/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace hjm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

McEstimate mean_and_error(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

McEstimate mean_and_error(const Eigen::VectorXd& xs) {
    return mean_and_error(std::vector<double>(xs.data(), xs.data() + xs.size()));
}

std::vector<double> discount_factors(const PathSet& paths, double rate) {
    std::vector<double> d;
    d.reserve(paths.time_grid.size());
    for (double t : paths.time_grid) d.push_back(std::exp(-rate * t));
    return d;
}

void add_warning(std::vector<std::string>& warnings, const std::string& w) {
    if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
}

// A discrete-state optimal stopping/switching problem on a path set. Problems provide:
//   n_times(), n_states(), initial_state(), n_paths(), regressor(t, p), terminal(p, s),
//   moves(t, p, s, f) calling f(next_state, discounted_cash) for each feasible action in a fixed order.

/// Longstaff-Schwartz backward induction with realized-value propagation, one regression
/// per decision time shared by every resource state.
template <class Problem>
PolicyValuation solve_lsmc(const Problem& prob, int degree) {
    const int n = prob.n_paths();
    const int states = prob.n_states();
    PolicyValuation out;
    out.policy.resize(static_cast<std::size_t>(prob.n_times()));
    Eigen::MatrixXd next(n, states);
    for (int p = 0; p < n; ++p)
        for (int s = 0; s < states; ++s) next(p, s) = prob.terminal(p, s);
    Eigen::MatrixXd cur(n, states);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int t = prob.n_times() - 1; t >= 0; --t) {
        for (int p = 0; p < n; ++p) x[static_cast<std::size_t>(p)] = prob.regressor(t, p);
        const CrossSectionRegression reg(x, degree);
        if (reg.used_ridge()) add_warning(out.warnings, "rank-deficient regression design; ridge fallback used");
        if (n < 10 * (reg.degree() + 1)) {
            add_warning(out.warnings, "fewer than 10 samples per basis function in a regression");
        }
        StepPolicy& step = out.policy[static_cast<std::size_t>(t)];
        step.center = reg.center();
        step.scale = reg.scale();
        step.coef = reg.fit(next);
        const Eigen::MatrixXd cont = reg.fitted(step.coef);
        for (int s = 0; s < states; ++s) {
            for (int p = 0; p < n; ++p) {
                double best = kNegInf;
                double realized = kNegInf;
                prob.moves(t, p, s, [&](int to, double cash) {
                    const double est = cash + cont(p, to);
                    if (est > best) {
                        best = est;
                        realized = cash + next(p, to);
                    }
                });
                cur(p, s) = realized;
            }
        }
        std::swap(cur, next);
    }
    const Eigen::VectorXd v0 = next.col(prob.initial_state());
    if (!v0.allFinite()) throw NumericalError("initial state has no feasible policy");
    const auto est = mean_and_error(v0);
    out.value = est.value;
    out.std_error = est.std_error;
    out.path_values.assign(v0.data(), v0.data() + v0.size());
    return out;
}

/// Per-path dynamic programming with the whole path known in advance.
template <class Problem>
McEstimate solve_perfect_foresight(const Problem& prob) {
    const int states = prob.n_states();
    std::vector<double> values(static_cast<std::size_t>(prob.n_paths()));
    std::vector<double> next(static_cast<std::size_t>(states)), cur(static_cast<std::size_t>(states));
    for (int p = 0; p < prob.n_paths(); ++p) {
        for (int s = 0; s < states; ++s) next[static_cast<std::size_t>(s)] = prob.terminal(p, s);
        for (int t = prob.n_times() - 1; t >= 0; --t) {
            for (int s = 0; s < states; ++s) {
                double best = kNegInf;
                prob.moves(t, p, s, [&](int to, double cash) {
                    best = std::max(best, cash + next[static_cast<std::size_t>(to)]);
                });
                cur[static_cast<std::size_t>(s)] = best;
            }
            std::swap(cur, next);
        }
        values[static_cast<std::size_t>(p)] = next[static_cast<std::size_t>(prob.initial_state())];
    }
    const auto est = mean_and_error(values);
    if (!std::isfinite(est.value)) throw NumericalError("initial state has no feasible policy");
    return est;
}

/// Forward replay of fitted continuation values.
template <class Problem>
PolicyValuation replay_policy(const Problem& prob, const std::vector<StepPolicy>& policy) {
    if (policy.size() != static_cast<std::size_t>(prob.n_times())) {
        throw ValidationError("policy length does not match the decision grid");
    }
    for (const auto& step : policy) {
        if (step.coef.cols() != prob.n_states()) throw ValidationError("policy does not match the state space");
    }
    std::vector<double> values(static_cast<std::size_t>(prob.n_paths()));
    for (int p = 0; p < prob.n_paths(); ++p) {
        int s = prob.initial_state();
        double total = 0.0;
        for (int t = 0; t < prob.n_times(); ++t) {
            const double x = prob.regressor(t, p);
            const auto& step = policy[static_cast<std::size_t>(t)];
            double best = kNegInf;
            int chosen = -1;
            double chosen_cash = 0.0;
            prob.moves(t, p, s, [&](int to, double cash) {
                const double est = cash + step.continuation(to, x);
                if (est > best) {
                    best = est;
                    chosen = to;
                    chosen_cash = cash;
                }
            });
            if (chosen < 0) throw NumericalError("replayed policy reached a state without feasible actions");
            total += chosen_cash;
            s = chosen;
        }
        values[static_cast<std::size_t>(p)] = total + prob.terminal(p, s);
    }
    PolicyValuation out;
    const auto est = mean_and_error(values);
    out.value = est.value;
    out.std_error = est.std_error;
    out.in_sample = false;
    out.path_values = std::move(values);
    return out;
}

void require_product(const PathSet& paths, int product) {
    if (product < 0 || product >= paths.n_products()) throw ValidationError("product index out of range");
    if (paths.n_times() < 1 || paths.n_paths() < 1) throw ValidationError("empty path set");
}

struct SwingProblem {
    const PathSet& paths;
    int product;
    std::vector<double> disc;
    int u_max, d_max;
    double strike, quantity;

    int n_times() const { return paths.n_times(); }
    int n_states() const { return (u_max + 1) * (d_max + 1); }
    int initial_state() const { return n_states() - 1; }
    int n_paths() const { return paths.n_paths(); }
    double regressor(int t, int p) const { return paths.value(p, t, product); }
    double terminal(int, int) const { return 0.0; }
    template <class F>
    void moves(int t, int p, int s, F&& f) const {
        const int u = s / (d_max + 1);
        const int d = s % (d_max + 1);
        const double spot = paths.value(p, t, product);
        const double dq = disc[static_cast<std::size_t>(t)] * quantity;
        f(s, 0.0);
        if (u > 0) f(s - (d_max + 1), dq * std::max(spot - strike, 0.0));
        if (d > 0) f(s - 1, dq * std::max(strike - spot, 0.0));
    }
};

struct VppProblem {
    const PathSet& power;
    int power_product;
    const PathSet& fuel;
    int fuel_product;
    std::vector<double> disc;
    const VppContract& c;

    // States: off with lock 0..t_off-1, then on with lock 0..t_on-1.
    int n_times() const { return power.n_times(); }
    int n_states() const { return c.t_off + c.t_on; }
    int initial_state() const { return 0; }
    int n_paths() const { return power.n_paths(); }
    double regressor(int t, int p) const {
        return power.value(p, t, power_product) - c.heat_rate * fuel.value(p, t, fuel_product);
    }
    double terminal(int, int) const { return 0.0; }
    int off(int lock) const { return lock; }
    int on(int lock) const { return c.t_off + lock; }
    template <class F>
    void moves(int t, int p, int s, F&& f) const {
        const double dsc = disc[static_cast<std::size_t>(t)];
        const double x = regressor(t, p);
        const double run = dsc * (x > 0.0 ? c.q_max : c.q_min) * x * c.period_hours;
        if (s < c.t_off) {
            const int lock = s;
            if (lock > 0) {
                f(off(lock - 1), 0.0);
                return;
            }
            f(off(0), 0.0);
            f(on(c.t_on - 1), run - dsc * c.startup_cost);
        } else {
            const int lock = s - c.t_off;
            if (lock > 0) {
                f(on(lock - 1), run);
                return;
            }
            f(on(0), run);
            f(off(c.t_off - 1), -dsc * c.shutdown_cost);
        }
    }
};

struct StorageProblem {
    const PathSet& paths;
    int product;
    std::vector<double> disc;
    const StorageContract& c;
    const VolumeGrid& grid;

    int n_times() const { return paths.n_times() - 1; }
    int n_states() const { return static_cast<int>(grid.levels.size()); }
    int initial_state() const { return grid.start; }
    int n_paths() const { return paths.n_paths(); }
    double regressor(int t, int p) const { return paths.value(p, t, product); }
    double terminal(int p, int k) const {
        const int last = paths.n_times() - 1;
        const double shortfall = std::max(c.v_target - grid.levels[static_cast<std::size_t>(k)], 0.0);
        if (shortfall <= 0.0) return 0.0;
        return -disc[static_cast<std::size_t>(last)] * c.penalty_scale * paths.value(p, last, product) * shortfall;
    }
    template <class F>
    void moves(int t, int p, int k, F&& f) const {
        const double ds = disc[static_cast<std::size_t>(t)] * paths.value(p, t, product);
        const int top = n_states() - 1;
        f(k, 0.0);
        if (k + grid.inject <= top) {
            const double dv = grid.levels[static_cast<std::size_t>(k + grid.inject)] - grid.levels[static_cast<std::size_t>(k)];
            f(k + grid.inject, -ds * dv);
        }
        if (k - grid.withdraw >= 0) {
            const double dv = grid.levels[static_cast<std::size_t>(k - grid.withdraw)] - grid.levels[static_cast<std::size_t>(k)];
            f(k - grid.withdraw, -ds * dv);
        }
    }
};

}  // namespace

void EuropeanOption::validate() const {
    if (!(strike > 0.0)) throw ValidationError("strike must be > 0");
    if (maturity < 0.0) throw ValidationError("option maturity must be >= t0");
    if (underlying.kind == ContractKind::swap && maturity > underlying.delivery_start + 1e-12) {
        throw ValidationError("option maturity must not exceed the delivery start");
    }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double black_price(double forward, double strike, double variance, double rate, double maturity, OptionType type) {
    if (!(forward > 0.0)) throw ValidationError("forward must be > 0");
    if (!(strike > 0.0)) throw ValidationError("strike must be > 0");
    if (variance < 0.0) throw ValidationError("variance must be >= 0");
    const double df = std::exp(-rate * maturity);
    double call;
    if (variance == 0.0) {
        call = df * std::max(forward - strike, 0.0);
    } else {
        const double sd = std::sqrt(variance);
        const double d1 = (std::log(forward / strike) + 0.5 * variance) / sd;
        const double d2 = d1 - sd;
        call = df * (forward * normal_cdf(d1) - strike * normal_cdf(d2));
    }
    if (type == OptionType::call) return call;
    return call - df * (forward - strike);
}

double black_price(double forward, const EuropeanOption& opt, double variance) {
    opt.validate();
    return black_price(forward, opt.strike, variance, opt.rate, opt.maturity, opt.type);
}

McEstimate mc_european(const PathSet& paths, int product, double maturity, double strike, double rate,
                       OptionType type) {
    require_product(paths, product);
    const int t = paths.time_index(maturity);
    const double df = std::exp(-rate * maturity);
    std::vector<double> payoff(static_cast<std::size_t>(paths.n_paths()));
    for (int p = 0; p < paths.n_paths(); ++p) {
        const double f = paths.value(p, t, product);
        payoff[static_cast<std::size_t>(p)] = df * std::max(type == OptionType::call ? f - strike : strike - f, 0.0);
    }
    return mean_and_error(payoff);
}

CrossSectionRegression::CrossSectionRegression(std::span<const double> x, int degree) {
    if (x.empty()) throw ValidationError("regression needs at least one sample");
    if (degree < 0) throw ValidationError("regression degree must be >= 0");
    const auto n = static_cast<Eigen::Index>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    center_ = sum / static_cast<double>(n);
    double spread = 0.0;
    for (double v : x) spread = std::max(spread, std::abs(v - center_));
    scale_ = spread > 0.0 ? spread : 1.0;

    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - center_) / scale_;
    std::vector<double> sorted = z;
    std::sort(sorted.begin(), sorted.end());
    int distinct = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] - sorted[i - 1] > 1e-10) ++distinct;
    }
    degree_ = std::min(degree, distinct - 1);

    design_.resize(n, degree_ + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        double pw = 1.0;
        for (int j = 0; j <= degree_; ++j) {
            design_(i, j) = pw;
            pw *= z[static_cast<std::size_t>(i)];
        }
    }
    qr_.setThreshold(1e-12);
    qr_.compute(design_);
    if (qr_.rank() < design_.cols()) {
        ridge_ = true;
        Eigen::MatrixXd gram = design_.transpose() * design_;
        const double lambda = 1e-8 * std::max(gram.trace() / static_cast<double>(gram.rows()), 1e-300);
        gram.diagonal().array() += lambda;
        ridge_solver_.compute(gram);
    }
}

Eigen::MatrixXd CrossSectionRegression::fit(const Eigen::MatrixXd& y) const {
    if (y.rows() != design_.rows()) throw ValidationError("regression target length does not match the samples");
    if (ridge_) return ridge_solver_.solve(design_.transpose() * y);
    return qr_.solve(y);
}

double StepPolicy::continuation(int state, double x) const {
    const double z = (x - center) / scale;
    double v = 0.0;
    for (Eigen::Index j = coef.rows() - 1; j >= 0; --j) v = v * z + coef(j, state);
    return v;
}

StepPolicy lsmc_continuation(std::span<const double> x, std::span<const double> realized, int degree) {
    if (x.size() != realized.size()) throw ValidationError("regression inputs differ in length");
    const CrossSectionRegression reg(x, degree);
    const Eigen::Map<const Eigen::VectorXd> y(realized.data(), static_cast<Eigen::Index>(realized.size()));
    return {reg.center(), reg.scale(), reg.fit(Eigen::MatrixXd(y))};
}

void SwingContract::validate(int days) const {
    if (u_max < 0 || d_max < 0) throw ValidationError("swing rights must be >= 0");
    if (u_max > days || d_max > days) throw ValidationError("swing rights exceed the number of exercise days");
    if (!(strike > 0.0)) throw ValidationError("strike must be > 0");
    if (!(quantity > 0.0)) throw ValidationError("quantity must be > 0");
}

PolicyValuation swing_value(const SwingContract& c, const PathSet& paths, int product, double rate,
                            const LsmcOptions& opt) {
    require_product(paths, product);
    c.validate(paths.n_times());
    const SwingProblem prob{paths, product, discount_factors(paths, rate), c.u_max, c.d_max, c.strike, c.quantity};
    return solve_lsmc(prob, opt.degree);
}

PolicyValuation american_option(const PathSet& paths, int product, double strike, double rate, OptionType type,
                                const LsmcOptions& opt) {
    SwingContract c;
    c.u_max = type == OptionType::call ? 1 : 0;
    c.d_max = type == OptionType::put ? 1 : 0;
    c.strike = strike;
    return swing_value(c, paths, product, rate, opt);
}

SwingResult price_swing(const SwingContract& c, const PathSet& paths, int product, double rate,
                        const LsmcOptions& opt) {
    SwingResult r;
    r.value = swing_value(c, paths, product, rate, opt);
    const auto call = american_option(paths, product, c.strike, rate, OptionType::call, opt);
    const auto put = american_option(paths, product, c.strike, rate, OptionType::put, opt);
    r.lower_bound = c.quantity * (call.value + put.value);
    r.lower_bound_se = c.quantity * std::hypot(call.std_error, put.std_error);
    const auto disc = discount_factors(paths, rate);
    std::vector<double> strip(static_cast<std::size_t>(paths.n_paths()), 0.0);
    for (int p = 0; p < paths.n_paths(); ++p)
        for (int t = 0; t < paths.n_times(); ++t)
            strip[static_cast<std::size_t>(p)] +=
                disc[static_cast<std::size_t>(t)] * c.quantity * std::abs(paths.value(p, t, product) - c.strike);
    const auto ub = mean_and_error(strip);
    r.upper_bound = ub.value;
    r.upper_bound_se = ub.std_error;
    return r;
}

void VppContract::validate() const {
    if (t_on < 1 || t_off < 1) throw ValidationError("t_on and t_off must be >= 1");
    if (!(q_min >= 0.0) || q_min > q_max || !(q_max > 0.0)) {
        throw ValidationError("capacities must satisfy 0 <= q_min <= q_max, q_max > 0");
    }
    if (startup_cost < 0.0 || shutdown_cost < 0.0) throw ValidationError("startup and shutdown costs must be >= 0");
    if (!(heat_rate >= 0.0)) throw ValidationError("heat rate must be >= 0");
    if (!(period_hours > 0.0)) throw ValidationError("period length must be > 0");
}

static void check_vpp_inputs(const VppContract& c, const PathSet& power, int power_product, const PathSet& fuel,
                             int fuel_product) {
    c.validate();
    require_product(power, power_product);
    require_product(fuel, fuel_product);
    if (power.n_paths() != fuel.n_paths() || power.n_times() != fuel.n_times()) {
        throw ValidationError("power and fuel path grids do not match");
    }
    for (int t = 0; t < power.n_times(); ++t) {
        if (std::abs(power.time_grid[static_cast<std::size_t>(t)] - fuel.time_grid[static_cast<std::size_t>(t)]) > 1e-12) {
            throw ValidationError("power and fuel path grids do not match");
        }
    }
}

VppResult price_vpp(const VppContract& c, const PathSet& power, int power_product, const PathSet& fuel,
                    int fuel_product, double rate, const LsmcOptions& opt) {
    check_vpp_inputs(c, power, power_product, fuel, fuel_product);
    const VppProblem prob{power, power_product, fuel, fuel_product, discount_factors(power, rate), c};
    VppResult r;
    r.lsmc = solve_lsmc(prob, opt.degree);
    const auto naive = solve_perfect_foresight(prob);
    r.naive = naive.value;
    r.naive_se = naive.std_error;
    std::vector<double> strip(static_cast<std::size_t>(power.n_paths()), 0.0);
    for (int p = 0; p < power.n_paths(); ++p)
        for (int t = 0; t < power.n_times(); ++t)
            strip[static_cast<std::size_t>(p)] += prob.disc[static_cast<std::size_t>(t)] * c.q_max * c.period_hours *
                                                  std::max(prob.regressor(t, p), 0.0);
    const auto ub = mean_and_error(strip);
    r.upper_bound = ub.value;
    r.upper_bound_se = ub.std_error;
    return r;
}

PolicyValuation replay_vpp(const VppContract& c, const std::vector<StepPolicy>& policy, const PathSet& power,
                           int power_product, const PathSet& fuel, int fuel_product, double rate) {
    check_vpp_inputs(c, power, power_product, fuel, fuel_product);
    const VppProblem prob{power, power_product, fuel, fuel_product, discount_factors(power, rate), c};
    return replay_policy(prob, policy);
}

void StorageContract::validate() const {
    if (!(v_min <= v0 && v0 <= v_max)) throw ValidationError("v0 must lie in [v_min, v_max]");
    if (!(v_min <= v_target && v_target <= v_max)) throw ValidationError("v_target must lie in [v_min, v_max]");
    if (!(i_min < 0.0 && i_max > 0.0)) throw ValidationError("storage rates need i_min < 0 < i_max");
    if (penalty_scale < 0.0) throw ValidationError("penalty_scale must be >= 0");
}

VolumeGrid volume_grid(const StorageContract& c) {
    c.validate();
    const double step = std::min(c.i_max, -c.i_min);
    const auto multiple = [&](double rate) {
        const double k = rate / step;
        const double r = std::round(k);
        if (std::abs(k - r) > 1e-9 * k) {
            throw ValidationError("injection and withdrawal rates must be multiples of " + io::format_number(step));
        }
        return static_cast<int>(r);
    };
    VolumeGrid g;
    g.inject = multiple(c.i_max);
    g.withdraw = multiple(-c.i_min);
    const auto below = static_cast<long>(std::floor((c.v0 - c.v_min) / step + 1e-9));
    const auto above = static_cast<long>(std::floor((c.v_max - c.v0) / step + 1e-9));
    for (long k = -below; k <= above; ++k) g.levels.push_back(c.v0 + static_cast<double>(k) * step);
    g.start = static_cast<int>(below);
    g.truncated = std::abs(g.levels.front() - c.v_min) > 1e-9 * step || std::abs(g.levels.back() - c.v_max) > 1e-9 * step;
    return g;
}

StorageResult price_storage(const StorageContract& c, const PathSet& paths, const PathSet& fresh_paths, int product,
                            double rate, const LsmcOptions& opt) {
    require_product(paths, product);
    require_product(fresh_paths, product);
    if (paths.n_times() < 2) throw ValidationError("storage needs at least one decision day and a settlement date");
    if (fresh_paths.n_times() != paths.n_times()) throw ValidationError("fresh paths must share the time grid");
    StorageResult r;
    r.grid = volume_grid(c);
    const double top = r.grid.levels.back();
    const double step = r.grid.levels.size() > 1 ? r.grid.levels[1] - r.grid.levels[0] : 0.0;
    const int days = paths.n_times() - 1;
    const double reachable = std::min(top, c.v0 + static_cast<double>(days) * r.grid.inject * step);
    if (c.v_target > reachable + 1e-9 * std::max(1.0, c.v_target)) {
        throw NumericalError("v_target " + io::format_number(c.v_target) + " is unreachable on the volume grid (max " +
                             io::format_number(reachable) + ")");
    }
    const StorageProblem prob{paths, product, discount_factors(paths, rate), c, r.grid};
    r.sdp = solve_lsmc(prob, opt.degree);
    if (r.grid.truncated) {
        add_warning(r.sdp.warnings, "volume grid truncated to [" + io::format_number(r.grid.levels.front()) + ", " +
                                        io::format_number(top) + "]");
    }
    const auto det = solve_perfect_foresight(prob);
    r.deterministic = det.value;
    r.deterministic_se = det.std_error;
    r.out_of_sample = replay_storage(c, r.sdp.policy, fresh_paths, product, rate);
    return r;
}

PolicyValuation replay_storage(const StorageContract& c, const std::vector<StepPolicy>& policy,
                               const PathSet& paths, int product, double rate) {
    require_product(paths, product);
    const VolumeGrid grid = volume_grid(c);
    const StorageProblem prob{paths, product, discount_factors(paths, rate), c, grid};
    return replay_policy(prob, policy);
}

PathSet expand_steps(const PathSet& paths, int factor) {
    if (factor < 1) throw ValidationError("expansion factor must be >= 1");
    PathSet out;
    out.config = paths.config;
    out.config.step = paths.config.step / factor;
    out.product_keys = paths.product_keys;
    const int n_times = paths.n_times();
    for (int t = 0; t < n_times; ++t) {
        const double t0 = paths.time_grid[static_cast<std::size_t>(t)];
        const double len = t + 1 < n_times ? paths.time_grid[static_cast<std::size_t>(t + 1)] - t0 : paths.config.step;
        for (int j = 0; j < factor; ++j) out.time_grid.push_back(t0 + len * j / factor);
    }
    out.config.horizon = out.time_grid.back();
    const std::size_t k = out.product_keys.size();
    out.values.reserve(static_cast<std::size_t>(paths.n_paths()) * out.time_grid.size() * k);
    for (int p = 0; p < paths.n_paths(); ++p)
        for (int t = 0; t < n_times; ++t)
            for (int j = 0; j < factor; ++j)
                for (std::size_t i = 0; i < k; ++i) out.values.push_back(paths.value(p, t, static_cast<int>(i)));
    return out;
}

}  // namespace hjm
