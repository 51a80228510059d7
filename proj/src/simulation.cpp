#include "hjm/simulation.hpp"

#include "hjm/errors.hpp"
#include "hjm/io.hpp"
#include "hjm/random.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

namespace hjm {

namespace {

constexpr double kTimeTol = 1e-10;

void require_model(const FactorModel& model) {
    model.validate();
    if (model.n_factors < 1) throw ValidationError("model has no factors");
}

/// Sorted union of the step grid and extra breakpoints inside (0, horizon).
std::vector<double> fine_grid(const std::vector<double>& grid, std::vector<double> extra) {
    const double horizon = grid.back();
    extra.insert(extra.end(), grid.begin(), grid.end());
    std::erase_if(extra, [&](double t) { return t < 0.0 || t > horizon + kTimeTol; });
    std::sort(extra.begin(), extra.end());
    std::vector<double> out;
    for (double t : extra) {
        if (out.empty() || t - out.back() > kTimeTol) out.push_back(t);
    }
    // Snap the grid points themselves so recorded times are exactly the step grid.
    for (double g : grid) {
        auto it = std::lower_bound(out.begin(), out.end(), g - kTimeTol);
        *it = g;
    }
    return out;
}

/// Position of each grid point inside the fine grid.
std::vector<int> grid_positions(const std::vector<double>& grid, const std::vector<double>& fine) {
    std::vector<int> pos;
    pos.reserve(grid.size());
    for (double g : grid) {
        const auto it = std::lower_bound(fine.begin(), fine.end(), g - kTimeTol);
        pos.push_back(static_cast<int>(it - fine.begin()));
    }
    return pos;
}

PathSet empty_paths(const SimConfig& cfg, std::vector<double> grid, std::vector<std::string> keys) {
    PathSet ps;
    ps.config = cfg;
    ps.time_grid = std::move(grid);
    ps.product_keys = std::move(keys);
    ps.values.assign(static_cast<std::size_t>(cfg.n_paths) * ps.time_grid.size() * ps.product_keys.size(), 0.0);
    return ps;
}

/// A product driven by one row at a time. `rows[f]` is its row on fine interval f,
/// empty once the product has stopped.
struct RowProduct {
    double initial = 0.0;
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> half_var;
};

/// Simulates products whose log-increment on each fine interval is row . dW - 0.5 |row|^2 len.
PathSet integrate_rows(const std::vector<RowProduct>& products, std::vector<std::string> keys, int n_factors,
                       const std::vector<double>& fine, const SimConfig& cfg) {
    const auto grid = cfg.time_grid();
    const auto pos = grid_positions(grid, fine);
    PathSet ps = empty_paths(cfg, grid, std::move(keys));
    const std::size_t n_prod = products.size();
    const std::size_t n_times = grid.size();
    const std::size_t n_fine = fine.size();

    std::vector<double> log_f(n_prod);
    Eigen::VectorXd dw(n_factors);
    for (int p = 0; p < cfg.n_paths; ++p) {
        NormalStream rng = path_stream(cfg.seed, static_cast<std::uint64_t>(p), cfg.antithetic);
        std::fill(log_f.begin(), log_f.end(), 0.0);
        double* out = ps.values.data() + static_cast<std::size_t>(p) * n_times * n_prod;
        std::size_t next_grid = 0;
        for (std::size_t f = 0; f < n_fine; ++f) {
            if (f > 0) {
                const double sq = std::sqrt(fine[f] - fine[f - 1]);
                for (int j = 0; j < n_factors; ++j) dw(j) = rng.next() * sq;
                for (std::size_t k = 0; k < n_prod; ++k) {
                    const auto& row = products[k].rows[f - 1];
                    if (row.size() == 0) continue;
                    log_f[k] += row.dot(dw) - products[k].half_var[f - 1];
                }
            }
            if (next_grid < n_times && static_cast<std::size_t>(pos[next_grid]) == f) {
                for (std::size_t k = 0; k < n_prod; ++k) {
                    out[next_grid * n_prod + k] = products[k].initial * std::exp(log_f[k]);
                }
                ++next_grid;
            }
        }
    }
    return ps;
}

/// Occupancy of residual maturities in [lo, hi] across buckets; the last bucket absorbs
/// everything beyond the calibrated range.
std::vector<double> occupancy_of_range(const FactorModel& model, double lo, double hi) {
    const int m = model.buckets_per_market;
    std::vector<double> occ(static_cast<std::size_t>(m), 0.0);
    if (hi <= lo) return occ;
    for (int i = 1; i <= m; ++i) {
        const double a = (i - 1) * model.bucket_width;
        const double b = i == m ? std::max(hi, a) : i * model.bucket_width;
        occ[static_cast<std::size_t>(i - 1)] = std::max(0.0, std::min(hi, b) - std::max(lo, a));
    }
    return occ;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
    if (!(step > 0.0)) throw ValidationError("step must be > 0");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be > 0");
    if (antithetic && n_paths % 2 != 0) throw ValidationError("antithetic sampling needs an even n_paths");
}

std::vector<double> SimConfig::time_grid() const {
    validate();
    const auto n = static_cast<long>(std::ceil(horizon / step - 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i < n; ++i) grid.push_back(static_cast<double>(i) * step);
    grid.push_back(horizon);
    return grid;
}

int PathSet::product_index(const std::string& key) const {
    const auto it = std::find(product_keys.begin(), product_keys.end(), key);
    if (it == product_keys.end()) throw ValidationError("unknown product '" + key + "'");
    return static_cast<int>(it - product_keys.begin());
}

int PathSet::time_index(double t) const {
    const auto it = std::lower_bound(time_grid.begin(), time_grid.end(), t - 1e-9);
    if (it == time_grid.end() || std::abs(*it - t) > 1e-9) {
        throw ValidationError("time " + io::format_number(t) + " is not on the path grid");
    }
    return static_cast<int>(it - time_grid.begin());
}

std::vector<double> PathSet::cross_section(int time, int product) const {
    std::vector<double> out(static_cast<std::size_t>(n_paths()));
    for (int p = 0; p < n_paths(); ++p) out[static_cast<std::size_t>(p)] = value(p, time, product);
    return out;
}

PathSet simulate_fixed_delivery(const FactorModel& model, const std::vector<std::vector<double>>& initial,
                                const SimConfig& cfg) {
    require_model(model);
    const auto grid = cfg.time_grid();
    if (initial.size() != model.markets.size()) throw ValidationError("one initial curve per market is required");
    std::vector<double> stops;
    for (int i = 1; i <= model.buckets_per_market; ++i) stops.push_back(i * model.bucket_width);
    const auto fine = fine_grid(grid, stops);

    std::vector<RowProduct> products;
    std::vector<std::string> keys;
    for (std::size_t k = 0; k < model.markets.size(); ++k) {
        if (initial[k].size() != static_cast<std::size_t>(model.buckets_per_market)) {
            throw ValidationError("initial prices for " + model.markets[k] + " do not match the bucket grid");
        }
        for (int i = 1; i <= model.buckets_per_market; ++i) {
            const double f0 = initial[k][static_cast<std::size_t>(i - 1)];
            if (!(f0 > 0.0)) throw ValidationError("initial prices must be > 0");
            RowProduct prod;
            prod.initial = f0;
            const Eigen::RowVectorXd row = model.row(static_cast<int>(k), i);
            const double delivery = i * model.bucket_width;
            for (std::size_t f = 1; f < fine.size(); ++f) {
                if (fine[f] > delivery + kTimeTol) {
                    prod.rows.emplace_back();
                    prod.half_var.push_back(0.0);
                } else {
                    prod.rows.push_back(row);
                    prod.half_var.push_back(0.5 * row.squaredNorm() * (fine[f] - fine[f - 1]));
                }
            }
            products.push_back(std::move(prod));
            keys.push_back(model.markets[k] + ":M" + std::to_string(i - 1));
        }
    }
    return integrate_rows(products, std::move(keys), model.n_factors, fine, cfg);
}

PathSet simulate_swap(const FactorModel& model, std::span<const ContractDescriptor> swaps, const SimConfig& cfg) {
    require_model(model);
    const auto grid = cfg.time_grid();
    std::vector<double> breaks;
    for (const auto& c : swaps) {
        if (c.kind != ContractKind::swap) throw ValidationError("simulate_swap expects swap contracts");
        if (c.market < 0 || c.market >= static_cast<int>(model.markets.size())) {
            throw ValidationError("swap market index out of range");
        }
        if (!(c.delivery_start > 0.0)) throw ValidationError("contract in delivery");
        if (!(c.delivery_start < c.delivery_end)) throw ValidationError("swap needs delivery_start < delivery_end");
        if (!(c.initial > 0.0)) throw ValidationError("initial prices must be > 0");
        breaks.push_back(c.delivery_start);
        for (int j = 1; j < model.buckets_per_market; ++j) breaks.push_back(c.delivery_start - j * model.bucket_width);
    }
    const auto fine = fine_grid(grid, breaks);

    std::vector<RowProduct> products;
    std::vector<std::string> keys;
    for (const auto& c : swaps) {
        RowProduct prod;
        prod.initial = c.initial;
        for (std::size_t f = 1; f < fine.size(); ++f) {
            if (fine[f] > c.delivery_start + kTimeTol) {
                prod.rows.emplace_back();
                prod.half_var.push_back(0.0);
                continue;
            }
            const double mid = 0.5 * (fine[f] + fine[f - 1]);
            const Eigen::RowVectorXd row = model.row(c.market, model.bucket_for(c.delivery_start - mid));
            prod.half_var.push_back(0.5 * row.squaredNorm() * (fine[f] - fine[f - 1]));
            prod.rows.push_back(row);
        }
        products.push_back(std::move(prod));
        keys.push_back(c.key.empty() ? model.markets[static_cast<std::size_t>(c.market)] + ":swap" : c.key);
    }
    return integrate_rows(products, std::move(keys), model.n_factors, fine, cfg);
}

PathSet simulate_short_horizon(const FactorModel& model, const StepwiseCurve& curve, int n_days,
                               const SimConfig& cfg) {
    require_model(model);
    if (n_days < 1) throw ValidationError("n_days must be >= 1");
    if (curve.buckets.empty()) throw ValidationError("curve has no buckets");
    SimConfig c = cfg;
    c.horizon = n_days * cfg.step;
    c.validate();
    const double delta = c.horizon;
    const int market = model.market_index(curve.market);
    const int first = month_index(curve.as_of);

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<std::string> keys;
    for (const auto& b : curve.buckets) {
        if (!(b.value > 0.0)) throw ValidationError("curve values must be > 0");
        rows.push_back(model.row(market, b.month - first + 1));
        keys.push_back(curve.market + ":" + format_date(b.start()));
    }
    PathSet ps = empty_paths(c, {0.0, delta}, std::move(keys));
    const std::size_t n_prod = rows.size();
    Eigen::VectorXd w(model.n_factors);
    for (int p = 0; p < c.n_paths; ++p) {
        NormalStream rng = path_stream(c.seed, static_cast<std::uint64_t>(p), c.antithetic);
        for (int j = 0; j < model.n_factors; ++j) w(j) = rng.next() * std::sqrt(delta);
        double* out = ps.values.data() + static_cast<std::size_t>(p) * 2 * n_prod;
        for (std::size_t k = 0; k < n_prod; ++k) {
            const double f0 = curve.buckets[k].value;
            out[k] = f0;
            out[n_prod + k] = f0 * std::exp(rows[k].dot(w) - 0.5 * rows[k].squaredNorm() * delta);
        }
    }
    return ps;
}

PathSet simulate_spot(const FactorModel& model, std::span<const SpotInput> markets, const SimConfig& cfg) {
    require_model(model);
    const auto grid = cfg.time_grid();
    const int m = model.buckets_per_market;
    const int n_factors = model.n_factors;
    for (const auto& s : markets) {
        if (s.market < 0 || s.market >= static_cast<int>(model.markets.size())) {
            throw ValidationError("spot market index out of range");
        }
        if (s.forward.size() != grid.size()) throw ValidationError("spot forward curve must cover every grid date");
        for (double f : s.forward) {
            if (is_missing(f) || !(f > 0.0)) throw ValidationError("spot forward curve must be > 0 on every grid date");
        }
    }
    std::vector<double> breaks;
    for (double t : grid) {
        for (int j = 1; j < m; ++j) breaks.push_back(t - j * model.bucket_width);
    }
    const auto fine = fine_grid(grid, breaks);
    const auto locate = [&](double t) {
        const auto it = std::lower_bound(fine.begin(), fine.end(), t - kTimeTol);
        return static_cast<int>(it - fine.begin());
    };

    // For grid time t_n and bucket i, the driving times s lie in [lo, hi).
    struct Segment {
        int bucket;
        int lo;
        int hi;
    };
    std::vector<std::vector<Segment>> segments(grid.size());
    for (std::size_t n = 1; n < grid.size(); ++n) {
        const double t = grid[n];
        for (int i = 1; i <= m; ++i) {
            const double lo = i == m ? 0.0 : std::max(0.0, t - i * model.bucket_width);
            const double hi = std::max(0.0, t - (i - 1) * model.bucket_width);
            if (hi - lo > kTimeTol) segments[n].push_back({i, locate(lo), locate(hi)});
        }
    }

    std::vector<std::vector<double>> drift(markets.size(), std::vector<double>(grid.size(), 0.0));
    std::vector<std::vector<Eigen::RowVectorXd>> rows(markets.size());
    for (std::size_t k = 0; k < markets.size(); ++k) {
        for (int i = 1; i <= m; ++i) rows[k].push_back(model.row(markets[k].market, i));
        for (std::size_t n = 1; n < grid.size(); ++n) {
            for (const auto& seg : segments[n]) {
                drift[k][n] += 0.5 * rows[k][static_cast<std::size_t>(seg.bucket - 1)].squaredNorm() *
                               (fine[static_cast<std::size_t>(seg.hi)] - fine[static_cast<std::size_t>(seg.lo)]);
            }
        }
    }

    std::vector<std::string> keys;
    for (const auto& s : markets) {
        keys.push_back(s.key.empty() ? model.markets[static_cast<std::size_t>(s.market)] + ":spot" : s.key);
    }
    PathSet ps = empty_paths(cfg, grid, std::move(keys));
    const std::size_t n_prod = markets.size();
    Eigen::MatrixXd w(static_cast<Eigen::Index>(fine.size()), n_factors);  // cumulative Brownian motion
    for (int p = 0; p < cfg.n_paths; ++p) {
        NormalStream rng = path_stream(cfg.seed, static_cast<std::uint64_t>(p), cfg.antithetic);
        w.row(0).setZero();
        for (std::size_t f = 1; f < fine.size(); ++f) {
            const double sq = std::sqrt(fine[f] - fine[f - 1]);
            for (int j = 0; j < n_factors; ++j) {
                w(static_cast<Eigen::Index>(f), j) = w(static_cast<Eigen::Index>(f - 1), j) + rng.next() * sq;
            }
        }
        double* out = ps.values.data() + static_cast<std::size_t>(p) * grid.size() * n_prod;
        for (std::size_t n = 0; n < grid.size(); ++n) {
            for (std::size_t k = 0; k < n_prod; ++k) {
                double x = -drift[k][n];
                for (const auto& seg : segments[n]) {
                    x += rows[k][static_cast<std::size_t>(seg.bucket - 1)].dot(w.row(seg.hi) - w.row(seg.lo));
                }
                out[n * n_prod + k] = markets[k].forward[n] * std::exp(x);
            }
        }
    }
    return ps;
}

double ExponentialFactor::integrated_variance(double a, double b) const {
    if (k == 0.0) return gamma * gamma * (b - a);
    return gamma * gamma / (4.0 * k) * (std::exp(-4.0 * k * a) - std::exp(-4.0 * k * b));
}

PathSet simulate_parametric(const ParametricVol& vol, double initial, double expiry, const SimConfig& cfg) {
    if (vol.empty()) throw ValidationError("parametric volatility needs at least one factor");
    if (!(initial > 0.0)) throw ValidationError("initial prices must be > 0");
    if (!(expiry > 0.0)) throw ValidationError("expiry must be > 0");
    const auto grid = cfg.time_grid();
    const auto fine = fine_grid(grid, {expiry});
    const auto pos = grid_positions(grid, fine);
    const std::size_t n_f = vol.size();

    // Per fine interval: standard deviation of each factor's stochastic integral, and total half variance.
    std::vector<std::vector<double>> sd(fine.size());
    std::vector<double> half_var(fine.size(), 0.0);
    for (std::size_t f = 1; f < fine.size(); ++f) {
        const double a = fine[f - 1];
        const double b = std::min(fine[f], expiry);
        sd[f].assign(n_f, 0.0);
        if (b <= a) continue;
        for (std::size_t j = 0; j < n_f; ++j) {
            const double v = vol[j].integrated_variance(expiry - b, expiry - a);
            sd[f][j] = std::sqrt(v);
            half_var[f] += 0.5 * v;
        }
    }

    PathSet ps = empty_paths(cfg, grid, {"parametric"});
    for (int p = 0; p < cfg.n_paths; ++p) {
        NormalStream rng = path_stream(cfg.seed, static_cast<std::uint64_t>(p), cfg.antithetic);
        double x = 0.0;
        double* out = ps.values.data() + static_cast<std::size_t>(p) * grid.size();
        std::size_t next_grid = 0;
        for (std::size_t f = 0; f < fine.size(); ++f) {
            if (f > 0) {
                for (std::size_t j = 0; j < n_f; ++j) x += sd[f][j] * rng.next();
                x -= half_var[f];
            }
            if (next_grid < grid.size() && static_cast<std::size_t>(pos[next_grid]) == f) {
                out[next_grid++] = initial * std::exp(x);
            }
        }
    }
    return ps;
}

double theoretical_log_variance(const ParametricVol& vol, double expiry, double t0, double t) {
    const double end = std::min(t, expiry);
    if (end <= t0) return 0.0;
    double v = 0.0;
    for (const auto& f : vol) v += f.integrated_variance(expiry - end, expiry - t0);
    return v;
}

std::vector<double> bucket_occupancy(const FactorModel& model, const ContractDescriptor& contract, double t) {
    const auto m = static_cast<std::size_t>(model.buckets_per_market);
    if (t <= 0.0) return std::vector<double>(m, 0.0);
    switch (contract.kind) {
    case ContractKind::fixed_delivery: {
        std::vector<double> occ(m, 0.0);
        const int b = std::clamp(contract.bucket, 1, model.buckets_per_market);
        occ[static_cast<std::size_t>(b - 1)] = std::min(t, contract.bucket * model.bucket_width);
        return occ;
    }
    case ContractKind::swap: {
        const double end = std::min(t, contract.delivery_start);
        return occupancy_of_range(model, contract.delivery_start - end, contract.delivery_start);
    }
    case ContractKind::spot:
        return occupancy_of_range(model, 0.0, t);
    }
    return {};
}

double theoretical_log_variance(const FactorModel& model, const ContractDescriptor& contract, double t) {
    const auto occ = bucket_occupancy(model, contract, t);
    double v = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        if (occ[i] > 0.0) v += model.row(contract.market, static_cast<int>(i) + 1).squaredNorm() * occ[i];
    }
    return v;
}

Eigen::MatrixXd row_correlation(const Eigen::MatrixXd& rows) {
    const Eigen::MatrixXd cov = rows * rows.transpose();
    return covariance_to_correlation(cov);
}

Eigen::MatrixXd log_return_correlation(const PathSet& paths) {
    const int n = paths.n_products();
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n, n, kMissing);
    // Pairwise sums over (path, step) samples where both products are still moving.
    std::vector<double> r(static_cast<std::size_t>(n));
    Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(n, n), sa = cnt, sb = cnt, saa = cnt, sbb = cnt, sab = cnt;
    for (int p = 0; p < paths.n_paths(); ++p) {
        for (int t = 1; t < paths.n_times(); ++t) {
            for (int k = 0; k < n; ++k) {
                r[static_cast<std::size_t>(k)] = std::log(paths.value(p, t, k) / paths.value(p, t - 1, k));
            }
            for (int a = 0; a < n; ++a) {
                const double ra = r[static_cast<std::size_t>(a)];
                if (ra == 0.0) continue;
                for (int b = a; b < n; ++b) {
                    const double rb = r[static_cast<std::size_t>(b)];
                    if (rb == 0.0) continue;
                    cnt(a, b) += 1.0;
                    sa(a, b) += ra;
                    sb(a, b) += rb;
                    saa(a, b) += ra * ra;
                    sbb(a, b) += rb * rb;
                    sab(a, b) += ra * rb;
                }
            }
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            const double c = cnt(a, b);
            if (c < 2.0) continue;
            const double va = saa(a, b) - sa(a, b) * sa(a, b) / c;
            const double vb = sbb(a, b) - sb(a, b) * sb(a, b) / c;
            if (va <= 0.0 || vb <= 0.0) continue;
            const double rho = (sab(a, b) - sa(a, b) * sb(a, b) / c) / std::sqrt(va * vb);
            corr(a, b) = corr(b, a) = rho;
        }
    }
    return corr;
}

SanityReport sanity_check(const PathSet& paths, const std::vector<std::vector<double>>& theoretical,
                          const Eigen::MatrixXd& model_correlation) {
    if (theoretical.size() != static_cast<std::size_t>(paths.n_products())) {
        throw ValidationError("one theoretical variance curve per product is required");
    }
    SanityReport report;
    const int n = paths.n_paths();
    for (int k = 0; k < paths.n_products(); ++k) {
        if (theoretical[static_cast<std::size_t>(k)].size() != static_cast<std::size_t>(paths.n_times())) {
            throw ValidationError("theoretical variance curve must cover the time grid");
        }
        for (int t = 1; t < paths.n_times(); ++t) {
            double mean = 0.0;
            for (int p = 0; p < n; ++p) mean += std::log(paths.value(p, t, k));
            mean /= n;
            double m2 = 0.0, m4 = 0.0;
            for (int p = 0; p < n; ++p) {
                const double d = std::log(paths.value(p, t, k)) - mean;
                m2 += d * d;
                m4 += d * d * d * d;
            }
            SanityRow row;
            row.product = paths.product_keys[static_cast<std::size_t>(k)];
            row.time = paths.time_grid[static_cast<std::size_t>(t)];
            row.empirical = n > 1 ? m2 / (n - 1) : 0.0;
            row.theoretical = theoretical[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
            const double pop = m2 / n;
            row.std_error = std::sqrt(std::max(0.0, m4 / n - pop * pop) / n);
            row.relative_error = row.theoretical > 0.0 ? std::abs(row.empirical - row.theoretical) / row.theoretical
                                                       : std::abs(row.empirical);
            report.max_relative_error = std::max(report.max_relative_error, row.relative_error);
            report.variance.push_back(row);
        }
    }
    if (paths.n_times() > 1) report.empirical_correlation = log_return_correlation(paths);
    if (model_correlation.size() > 0) {
        if (model_correlation.rows() != paths.n_products() || model_correlation.cols() != paths.n_products()) {
            throw ValidationError("model correlation must be products x products");
        }
        report.model_correlation = model_correlation;
        for (Eigen::Index a = 0; a < model_correlation.rows(); ++a) {
            for (Eigen::Index b = 0; b < model_correlation.cols(); ++b) {
                const double e = report.empirical_correlation(a, b);
                const double m = model_correlation(a, b);
                if (is_missing(e) || is_missing(m)) continue;
                report.max_correlation_gap = std::max(report.max_correlation_gap, std::abs(e - m));
            }
        }
    }
    return report;
}

std::vector<PathSummaryRow> summarize_paths(const PathSet& paths) {
    std::vector<PathSummaryRow> rows;
    const int n = paths.n_paths();
    for (int k = 0; k < paths.n_products(); ++k) {
        for (int t = 0; t < paths.n_times(); ++t) {
            auto xs = paths.cross_section(t, k);
            double mean = 0.0;
            for (double x : xs) mean += x;
            mean /= n;
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            std::sort(xs.begin(), xs.end());
            PathSummaryRow row;
            row.product = paths.product_keys[static_cast<std::size_t>(k)];
            row.time = paths.time_grid[static_cast<std::size_t>(t)];
            row.mean = mean;
            row.std_error = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
            row.q05 = quantile_sorted(xs, 0.05);
            row.q95 = quantile_sorted(xs, 0.95);
            rows.push_back(row);
        }
    }
    return rows;
}

void write_paths_csv(std::ostream& out, const PathSet& paths) {
    out << "path_id,time,product_key,value\n";
    for (int p = 0; p < paths.n_paths(); ++p) {
        for (int t = 0; t < paths.n_times(); ++t) {
            const std::string time = io::format_number(paths.time_grid[static_cast<std::size_t>(t)]);
            for (int k = 0; k < paths.n_products(); ++k) {
                out << p << ',' << time << ',' << paths.product_keys[static_cast<std::size_t>(k)] << ','
                    << io::format_number(paths.value(p, t, k)) << '\n';
            }
        }
    }
}

PathSet read_paths_csv(std::istream& in) {
    std::string line;
    if (!io::read_line(in, line) || line != "path_id,time,product_key,value") {
        throw ValidationError("path header must be 'path_id,time,product_key,value'");
    }
    PathSet ps;
    std::map<std::string, int> product_pos;
    int max_path = -1;
    std::size_t row = 0;
    std::vector<std::tuple<int, double, int, double>> records;
    while (io::read_line(in, line)) {
        ++row;
        const auto f = io::split_csv_line(line);
        if (f.size() != 4) throw ValidationError("path row " + std::to_string(row) + ": expected 4 fields");
        const int path = static_cast<int>(io::parse_number(f[0]));
        const double time = io::parse_number(f[1]);
        auto [it, inserted] = product_pos.try_emplace(f[2], static_cast<int>(ps.product_keys.size()));
        if (inserted) ps.product_keys.push_back(f[2]);
        if (path == 0 && (ps.time_grid.empty() || ps.time_grid.back() < time)) ps.time_grid.push_back(time);
        max_path = std::max(max_path, path);
        records.emplace_back(path, time, it->second, io::parse_number(f[3]));
    }
    ps.config.n_paths = max_path + 1;
    if (!ps.time_grid.empty()) {
        ps.config.horizon = ps.time_grid.back();
        if (ps.time_grid.size() > 1) ps.config.step = ps.time_grid[1] - ps.time_grid[0];
    }
    ps.values.assign(static_cast<std::size_t>(ps.config.n_paths) * ps.time_grid.size() * ps.product_keys.size(),
                     kMissing);
    for (const auto& [path, time, product, value] : records) {
        const auto t = static_cast<std::size_t>(ps.time_index(time));
        ps.values[(static_cast<std::size_t>(path) * ps.time_grid.size() + t) * ps.product_keys.size() +
                  static_cast<std::size_t>(product)] = value;
    }
    return ps;
}

void write_summary_csv(std::ostream& out, std::span<const PathSummaryRow> rows) {
    out << "product_key,time,mean,std_error,q05,q95\n";
    for (const auto& r : rows) {
        out << r.product << ',' << io::format_number(r.time) << ',' << io::format_number(r.mean) << ','
            << io::format_number(r.std_error) << ',' << io::format_number(r.q05) << ','
            << io::format_number(r.q95) << '\n';
    }
}

PathSet slice_times(const PathSet& paths, int first, int last) {
    if (first < 0 || last >= paths.n_times() || first > last) {
        throw ValidationError("time slice [" + std::to_string(first) + ", " + std::to_string(last) +
                              "] outside the grid");
    }
    PathSet out;
    out.config = paths.config;
    out.product_keys = paths.product_keys;
    out.time_grid.assign(paths.time_grid.begin() + first, paths.time_grid.begin() + last + 1);
    const std::size_t k = paths.product_keys.size();
    const std::size_t n_times = paths.time_grid.size();
    out.values.reserve(static_cast<std::size_t>(paths.n_paths()) * out.time_grid.size() * k);
    for (int p = 0; p < paths.n_paths(); ++p) {
        const auto row = paths.values.begin() +
                         static_cast<std::ptrdiff_t>((static_cast<std::size_t>(p) * n_times + first) * k);
        out.values.insert(out.values.end(), row, row + static_cast<std::ptrdiff_t>((last - first + 1) * k));
    }
    return out;
}

}  // namespace hjm
