#include "app.hpp"

#include "hjm/calibration.hpp"
#include "hjm/curve.hpp"
#include "hjm/date.hpp"
#include "hjm/io.hpp"
#include "hjm/marketdata.hpp"
#include "hjm/pricing.hpp"
#include "hjm/random.hpp"
#include "hjm/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace hjm::app {

namespace fs = std::filesystem;
using io::format_number;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Accepts plain decimals and simple fractions such as 1/252.
double parse_value(const std::string& text, const std::string& what) {
    try {
        const auto slash = text.find('/');
        if (slash == std::string::npos) return io::parse_number(trim(text));
        const double num = io::parse_number(trim(text.substr(0, slash)));
        const double den = io::parse_number(trim(text.substr(slash + 1)));
        if (den == 0.0) throw ValidationError("zero denominator");
        return num / den;
    } catch (const ValidationError& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void log(const std::string& msg) { std::cerr << "[hjm] " << msg << '\n'; }

std::string seconds_text(double s) {
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << s << " s";
    return os.str();
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ValidationError("cannot open " + p.string());
    return in;
}

// Writes to a temporary name and renames, so a failing command leaves no half files.
class OutFile {
public:
    explicit OutFile(fs::path target) : target_(std::move(target)), tmp_(target_.string() + ".tmp") {
        fs::create_directories(target_.parent_path());
        out_.open(tmp_, std::ios::binary);
        if (!out_) throw ValidationError("cannot write " + target_.string());
    }
    std::ostream& stream() { return out_; }
    void commit() {
        out_.close();
        fs::rename(tmp_, target_);
    }

private:
    fs::path target_;
    fs::path tmp_;
    std::ofstream out_;
};

template <typename F>
void write_file(const fs::path& p, F&& body) {
    OutFile f(p);
    body(f.stream());
    f.commit();
}

struct QuoteInput {
    ParseResult parsed;
    std::vector<std::string> markets;
};

QuoteInput load_quotes(const RunConfig& cfg) {
    auto in = open_in(cfg.quotes);
    QuoteInput q;
    try {
        q.parsed = parse_quotes(in);
    } catch (const ValidationError& e) {
        throw ValidationError(cfg.quotes.string() + ": " + e.what());
    }
    if (q.parsed.quotes.empty()) throw ValidationError(cfg.quotes.string() + ": no valid quotes");
    std::vector<std::string> seen;
    for (const auto& quote : q.parsed.quotes) {
        if (std::find(seen.begin(), seen.end(), quote.market) == seen.end()) seen.push_back(quote.market);
    }
    if (cfg.markets.empty()) {
        q.markets = seen;
    } else {
        for (const auto& m : cfg.markets) {
            if (std::find(seen.begin(), seen.end(), m) == seen.end()) {
                throw ValidationError("market " + m + " has no quotes in " + cfg.quotes.string());
            }
        }
        q.markets = cfg.markets;
        std::erase_if(q.parsed.quotes, [&](const QuotedSwap& s) {
            return std::find(q.markets.begin(), q.markets.end(), s.market) == q.markets.end();
        });
    }
    return q;
}

std::vector<StepwiseCurve> curves_of(const std::vector<BootstrapReport>& reports) {
    std::vector<StepwiseCurve> out;
    for (const auto& r : reports) out.push_back(r.curve);
    return out;
}

fs::path ingest_dir(const RunConfig& cfg) { return cfg.out / "ingest"; }
fs::path curve_dir(const RunConfig& cfg) { return cfg.out / "curve"; }
fs::path calibrate_dir(const RunConfig& cfg) { return cfg.out / "calibrate"; }
fs::path simulate_dir(const RunConfig& cfg) { return cfg.out / "simulate"; }
fs::path price_dir(const RunConfig& cfg) { return cfg.out / "price"; }

std::vector<std::string> read_markets_file(const RunConfig& cfg) {
    auto in = open_in(ingest_dir(cfg) / "markets.txt");
    std::vector<std::string> out;
    std::string line;
    while (io::read_line(in, line)) out.push_back(trim(line));
    if (out.empty()) throw ValidationError("ingest/markets.txt lists no market");
    return out;
}

FactorModel load_model(const RunConfig& cfg) {
    auto in = open_in(calibrate_dir(cfg) / "model.json");
    return read_model_json(in);
}

// Most recent curve of each model market.
std::vector<StepwiseCurve> latest_curves(const RunConfig& cfg, const FactorModel& model) {
    auto in = open_in(curve_dir(cfg) / "curves.csv");
    const auto all = read_curves_csv(in);
    std::vector<StepwiseCurve> out;
    for (const auto& m : model.markets) {
        const StepwiseCurve* best = nullptr;
        for (const auto& c : all) {
            if (c.market == m && (best == nullptr || c.as_of > best->as_of)) best = &c;
        }
        if (best == nullptr) throw ValidationError("curves.csv has no curve for " + m);
        out.push_back(*best);
    }
    return out;
}

const StepwiseCurve& curve_for(const std::vector<StepwiseCurve>& curves, const std::string& market) {
    for (const auto& c : curves) {
        if (c.market == market) return c;
    }
    throw ValidationError("no curve for market " + market);
}

PathSet first_paths(const PathSet& paths, int n) {
    PathSet out = paths;
    n = std::min(n, paths.n_paths());
    out.config.n_paths = n;
    out.values.resize(static_cast<std::size_t>(n) * paths.time_grid.size() * paths.product_keys.size());
    return out;
}

}  // namespace

KeyValueFile KeyValueFile::load(const fs::path& file) {
    auto in = open_in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    KeyValueFile kv = parse(ss.str(), file.string());
    kv.base_ = file.parent_path();
    return kv;
}

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
    KeyValueFile kv;
    kv.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    int n = 0;
    while (std::getline(ss, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(origin + ":" + std::to_string(n) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ValidationError(origin + ":" + std::to_string(n) + ": empty key");
        if (kv.values_.count(key) != 0) {
            throw ValidationError(origin + ":" + std::to_string(n) + ": duplicate key " + key);
        }
        kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::string KeyValueFile::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError(origin_ + ": missing key " + key);
    used_[key] = true;
    return it->second;
}

std::string KeyValueFile::text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
}

double KeyValueFile::number(const std::string& key) const { return parse_value(text(key), origin_ + ": " + key); }

double KeyValueFile::number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

int KeyValueFile::integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError(origin_ + ": " + key + " must be an integer");
    return static_cast<int>(v);
}

std::vector<std::string> KeyValueFile::list(const std::string& key) const { return split_list(text(key)); }

std::vector<double> KeyValueFile::numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) out.push_back(parse_value(item, origin_ + ": " + key));
    return out;
}

fs::path KeyValueFile::path(const std::string& key) const {
    fs::path p = text(key);
    return p.is_absolute() ? p : base_ / p;
}

void KeyValueFile::finish() const {
    for (const auto& [key, value] : values_) {
        if (!used_[key]) throw ValidationError(origin_ + ": unknown key " + key);
    }
}

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ValidationError("config: " + msg);
    };
    require(dt > 0.0 && dt <= 1.0, "dt must be in (0, 1]");
    require(months >= 1 && quarters >= 0 && years >= 0, "tenor counts out of range");
    require(curve_months >= months, "curve_months must cover the panel months");
    require(acf_lags >= 1, "acf_lags must be >= 1");
    require(outlier_k == 0.0 || outlier_k > 1.0, "outlier_k must be 0 (off) or > 1");
    require(threshold > 0.0 && threshold <= 1.0, "threshold must be in (0, 1]");
    require(factors >= 0, "factors must be >= 0");
    require(n_paths >= 1 && price_paths >= 1 && short_horizon_paths >= 1, "path counts must be >= 1");
    require(!antithetic || (n_paths % 2 == 0 && price_paths % 2 == 0 && short_horizon_paths % 2 == 0),
            "antithetic runs need even path counts");
    require(step >= 0.0 && horizon > 0.0 && spot_step > 0.0, "step and horizon must be positive");
    require(export_paths >= 0 && short_horizon_days >= 1, "export_paths or short_horizon_days out of range");
    require(sanity_z > 0.0 && sanity_correlation > 0.0, "sanity tolerances must be positive");
    require(std::isfinite(rate), "rate must be finite");
}

RunConfig load_config(const fs::path& file) {
    const auto kv = KeyValueFile::load(file);
    RunConfig c;
    if (kv.has("quotes")) c.quotes = kv.path("quotes");
    if (kv.has("markets")) c.markets = kv.list("markets");
    c.dt = kv.number("dt", c.dt);
    c.months = kv.integer("months", c.months);
    c.quarters = kv.integer("quarters", c.quarters);
    c.years = kv.integer("years", c.years);
    c.curve_months = kv.integer("curve_months", c.curve_months);
    c.acf_lags = kv.integer("acf_lags", c.acf_lags);
    c.outlier_k = kv.number("outlier_k", c.outlier_k);
    c.threshold = kv.number("threshold", c.threshold);
    c.factors = kv.integer("factors", c.factors);
    if (kv.has("seed")) {
        const std::string s = kv.text("seed");
        try {
            std::size_t used = 0;
            if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(s);
            c.seed = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw ValidationError(kv.origin() + ": seed must be an unsigned integer");
        }
    }
    c.n_paths = kv.integer("n_paths", c.n_paths);
    c.step = kv.number("step", c.step);
    c.horizon = kv.number("horizon", c.horizon);
    c.antithetic = kv.text("antithetic", "false") == "true";
    c.export_paths = kv.integer("export_paths", c.export_paths);
    c.short_horizon_days = kv.integer("short_horizon_days", c.short_horizon_days);
    c.short_horizon_paths = kv.integer("short_horizon_paths", c.short_horizon_paths);
    c.sanity_z = kv.number("sanity_z", c.sanity_z);
    c.sanity_correlation = kv.number("sanity_correlation", c.sanity_correlation);
    if (kv.has("contracts")) {
        const fs::path base = file.parent_path();
        for (const auto& item : kv.list("contracts")) {
            fs::path p = item;
            c.contracts.push_back(p.is_absolute() ? p : base / p);
        }
    }
    c.price_paths = kv.integer("price_paths", c.price_paths);
    c.spot_step = kv.number("spot_step", c.spot_step);
    c.rate = kv.number("rate", c.rate);
    if (kv.has("out")) c.out = kv.path("out");
    kv.finish();
    return c;
}

// ---------------------------------------------------------------- ingest

void cmd_ingest(const RunConfig& cfg) {
    Stopwatch clock;
    const QuoteInput q = load_quotes(cfg);
    const auto reports = bootstrap_all(q.parsed.quotes, cfg.curve_months);
    const auto curves = curves_of(reports);
    const auto tenors = default_tenors(cfg.months, cfg.quarters, cfg.years);

    std::vector<RelativePanel> panels;
    std::vector<LogReturnMatrix> returns;
    for (const auto& m : q.markets) {
        panels.push_back(build_relative_panel(m, curves, tenors));
        returns.push_back(log_returns(panels.back(), cfg.dt));
    }
    const LogReturnMatrix merged = merge_returns(returns);

    const fs::path dir = ingest_dir(cfg);
    for (const auto& p : panels) {
        write_file(dir / ("panel_" + p.market + ".csv"), [&](std::ostream& out) { write_panel_csv(out, p); });
    }
    write_file(dir / "markets.txt", [&](std::ostream& out) {
        for (const auto& m : q.markets) out << m << '\n';
    });
    write_file(dir / "acf.csv", [&](std::ostream& out) {
        out << "column,lag,acf\n";
        for (Eigen::Index j = 0; j < merged.cols(); ++j) {
            const auto x = present_values(merged, j);
            if (static_cast<int>(x.size()) <= cfg.acf_lags) continue;
            const auto r = acf(x, cfg.acf_lags);
            for (std::size_t k = 0; k < r.size(); ++k) {
                out << merged.column_keys[j].str() << ',' << (k + 1) << ',' << format_number(r[k]) << '\n';
            }
        }
    });
    write_file(dir / "moments.csv", [&](std::ostream& out) {
        out << "column,n,mean,std_dev,skewness,excess_kurtosis\n";
        for (Eigen::Index j = 0; j < merged.cols(); ++j) {
            const auto x = present_values(merged, j);
            if (x.size() < 3) continue;
            const Moments m = normality_diagnostics(x);
            out << merged.column_keys[j].str() << ',' << x.size() << ',' << format_number(m.mean) << ','
                << format_number(m.std_dev) << ',' << format_number(m.skewness) << ','
                << format_number(m.excess_kurtosis) << '\n';
        }
    });
    for (const auto& a : q.markets) {
        for (const auto& b : q.markets) {
            if (b < a) continue;
            const Eigen::MatrixXd s = correlation_surface(merged, a, b);
            write_file(dir / ("correlation_" + a + "_" + b + ".csv"), [&](std::ostream& out) {
                out << "tenor";
                for (const auto& t : tenors) out << ',' << b << ':' << t.label();
                out << '\n';
                for (Eigen::Index i = 0; i < s.rows(); ++i) {
                    out << a << ':' << tenors[static_cast<std::size_t>(i)].label();
                    for (Eigen::Index j = 0; j < s.cols(); ++j) out << ',' << format_number(s(i, j));
                    out << '\n';
                }
            });
        }
    }
    write_file(dir / "diagnostics.txt", [&](std::ostream& out) {
        out << "quotes_accepted " << q.parsed.quotes.size() << '\n';
        out << "quotes_rejected " << q.parsed.errors.size() << '\n';
        for (const auto& e : q.parsed.errors) out << "rejected_row " << e.row << ' ' << e.message << '\n';
        for (const auto& p : panels) {
            out << "panel " << p.market << " dates " << p.dates.size() << " tenors " << p.tenors.size() << '\n';
        }
        out << "returns " << merged.rows() << " columns " << merged.cols() << '\n';
        for (const auto& w : merged.warnings) out << "warning " << w << '\n';
        for (const auto& r : returns) {
            for (const auto& w : r.warnings) out << "warning " << w << '\n';
        }
    });
    for (const auto& e : q.parsed.errors) log("rejected row " + std::to_string(e.row) + ": " + e.message);
    log("ingest: " + std::to_string(q.parsed.quotes.size()) + " quotes, " + std::to_string(q.parsed.errors.size()) +
        " rejected (" + seconds_text(clock.seconds()) + ")");
}

// ---------------------------------------------------------------- curve

void cmd_curve(const RunConfig& cfg) {
    Stopwatch clock;
    const QuoteInput q = load_quotes(cfg);
    const auto reports = bootstrap_all(q.parsed.quotes, cfg.curve_months);
    const auto curves = curves_of(reports);
    const fs::path dir = curve_dir(cfg);
    write_file(dir / "curves.csv", [&](std::ostream& out) { write_curves_csv(out, curves); });
    double worst = 0.0;
    write_file(dir / "arbitrage.csv", [&](std::ostream& out) {
        out << "as_of,market,max_residual,removed_products,uncheckable\n";
        for (const auto& r : reports) {
            std::vector<QuotedSwap> group;
            for (const auto& s : q.parsed.quotes) {
                if (s.market == r.curve.market && s.trading_date == r.curve.as_of) group.push_back(s);
            }
            const ArbitrageCheck check = verify_no_arbitrage(r.curve, group);
            worst = std::max(worst, check.max_residual);
            out << format_date(r.curve.as_of) << ',' << r.curve.market << ',' << format_number(check.max_residual)
                << ',' << r.removed_products.size() << ',' << check.uncheckable.size() << '\n';
        }
    });
    log("curve: " + std::to_string(curves.size()) + " curves, max residual " + format_number(worst) + " (" +
        seconds_text(clock.seconds()) + ")");
}

// ---------------------------------------------------------------- calibrate

void cmd_calibrate(const RunConfig& cfg) {
    Stopwatch clock;
    const auto markets = cfg.markets.empty() ? read_markets_file(cfg) : cfg.markets;
    std::vector<LogReturnMatrix> returns;
    std::vector<ColumnKey> keys;
    Date last{};
    for (const auto& m : markets) {
        auto in = open_in(ingest_dir(cfg) / ("panel_" + m + ".csv"));
        const RelativePanel panel = read_panel_csv(in, m);
        if (!panel.dates.empty()) last = std::max(last, panel.dates.back());
        returns.push_back(log_returns(panel, cfg.dt));
        for (int h = 0; h < cfg.months; ++h) keys.push_back({m, "M" + std::to_string(h)});
    }
    const LogReturnMatrix merged = select_columns(merge_returns(returns), keys);
    LogReturnMatrix used = merged;
    std::vector<int> removed(static_cast<std::size_t>(merged.cols()), 0);
    if (cfg.outlier_k > 0.0) {
        auto filtered = filter_outliers(merged, cfg.outlier_k);
        used = std::move(filtered.filtered);
        removed = std::move(filtered.removed);
    }
    const CovarianceEstimate cov = estimate_covariance(used);
    const EigenPairs eig = pca(cov);
    const int n = cfg.factors > 0 ? cfg.factors : select_factors(eig.values, cfg.threshold);
    if (n > eig.values.size()) throw ValidationError("factors exceeds the number of columns");
    FactorModel model = build_sigma_star(eig, n, cfg.dt, ModelLayout{markets, cfg.months, 1.0 / 12.0});
    model.as_of = last;
    model.validate();

    const fs::path dir = calibrate_dir(cfg);
    write_file(dir / "model.json", [&](std::ostream& out) { write_model_json(out, model); });
    write_file(dir / "scree.csv", [&](std::ostream& out) {
        out << "factor,eigenvalue,share,cumulative\n";
        const double total = eig.values.sum();
        const Eigen::VectorXd cum = explained_ratios(eig.values);
        for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
            out << (i + 1) << ',' << format_number(eig.values(i)) << ','
                << format_number(total > 0.0 ? eig.values(i) / total : 0.0) << ',' << format_number(cum(i)) << '\n';
        }
    });
    write_file(dir / "outliers.csv", [&](std::ostream& out) {
        out << "column,removed\n";
        for (std::size_t j = 0; j < removed.size(); ++j) {
            out << merged.column_keys[j].str() << ',' << removed[j] << '\n';
        }
    });
    write_file(dir / "correlation.csv", [&](std::ostream& out) {
        const Eigen::MatrixXd emp = covariance_to_correlation(cov.sigma_hat);
        const Eigen::MatrixXd red = covariance_to_correlation(model.implied_covariance());
        out << "row,column,empirical,model\n";
        for (Eigen::Index i = 0; i < emp.rows(); ++i)
            for (Eigen::Index j = 0; j < emp.cols(); ++j)
                out << cov.column_keys[i].str() << ',' << cov.column_keys[j].str() << ','
                    << format_number(emp(i, j)) << ',' << format_number(red(i, j)) << '\n';
    });
    log("calibrate: " + std::to_string(cov.n_obs) + " complete returns, N = " + std::to_string(n) +
        " factors explaining " + format_number(model.explained(n - 1)) + " (" + seconds_text(clock.seconds()) + ")");
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(const RunConfig& cfg) {
    Stopwatch clock;
    if (!cfg.seed) throw ValidationError("simulate needs a seed (config key seed or --seed)");
    const FactorModel model = load_model(cfg);
    const auto curves = latest_curves(cfg, model);
    const int n_markets = static_cast<int>(model.markets.size());
    const int buckets = model.buckets_per_market;

    std::vector<std::vector<double>> initial(static_cast<std::size_t>(n_markets));
    for (int k = 0; k < n_markets; ++k) {
        for (int i = 1; i <= buckets; ++i) initial[k].push_back(extract_fixed_delivery(curves[k], i - 1));
    }
    SimConfig sc{*cfg.seed, cfg.n_paths, cfg.sim_step(), cfg.horizon, cfg.antithetic};
    const PathSet paths = simulate_fixed_delivery(model, initial, sc);

    std::vector<std::vector<double>> theory(static_cast<std::size_t>(paths.n_products()));
    for (int k = 0; k < n_markets; ++k) {
        for (int i = 1; i <= buckets; ++i) {
            const std::string key = model.markets[k] + ":M" + std::to_string(i - 1);
            const int p = paths.product_index(key);
            ContractDescriptor d;
            d.market = k;
            d.kind = ContractKind::fixed_delivery;
            d.bucket = i;
            d.initial = initial[k][i - 1];
            for (double t : paths.time_grid) theory[p].push_back(theoretical_log_variance(model, d, t));
        }
    }
    const SanityReport report = sanity_check(paths, theory);

    // Short-horizon scenario set: every curve bucket shocked with its frozen row.
    SimConfig shc{splitmix64(*cfg.seed), cfg.short_horizon_paths, cfg.sim_step(), cfg.horizon, cfg.antithetic};
    std::vector<PathSet> shorts;
    std::vector<SanityReport> short_reports;
    for (int k = 0; k < n_markets; ++k) {
        shorts.push_back(simulate_short_horizon(model, curves[k], cfg.short_horizon_days, shc));
        const PathSet& s = shorts.back();
        const int first = month_index(curves[k].as_of);
        Eigen::MatrixXd rows(s.n_products(), model.n_factors);
        std::vector<std::vector<double>> th;
        for (int j = 0; j < s.n_products(); ++j) {
            rows.row(j) = model.row(k, curves[k].buckets[j].month - first + 1);
            th.push_back({0.0, rows.row(j).squaredNorm() * s.time_grid.back()});
        }
        short_reports.push_back(sanity_check(s, th, row_correlation(rows)));
    }

    double max_z = 0.0;
    std::string worst;
    auto z_of = [](const SanityRow& r) {
        const double diff = std::abs(r.empirical - r.theoretical);
        if (r.std_error > 0.0) return diff / r.std_error;
        return diff > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    const fs::path dir = simulate_dir(cfg);
    write_file(dir / "summary.csv", [&](std::ostream& out) {
        const auto rows = summarize_paths(paths);
        write_summary_csv(out, rows);
    });
    write_file(dir / "paths.csv", [&](std::ostream& out) { write_paths_csv(out, first_paths(paths, cfg.export_paths)); });
    write_file(dir / "sanity.csv", [&](std::ostream& out) {
        out << "product_key,time,empirical,theoretical,relative_error,std_error,z\n";
        auto emit = [&](const SanityReport& rep) {
            for (const auto& r : rep.variance) {
                const double z = z_of(r);
                if (z > max_z) {
                    max_z = z;
                    worst = r.product + " at t=" + format_number(r.time);
                }
                out << r.product << ',' << format_number(r.time) << ',' << format_number(r.empirical) << ','
                    << format_number(r.theoretical) << ',' << format_number(r.relative_error) << ','
                    << format_number(r.std_error) << ',' << format_number(z) << '\n';
            }
        };
        emit(report);
        for (const auto& r : short_reports) emit(r);
    });
    double corr_gap = 0.0;
    for (const auto& r : short_reports) corr_gap = std::max(corr_gap, r.max_correlation_gap);
    write_file(dir / "short_horizon.csv", [&](std::ostream& out) {
        out << "product_key,input,mean,std_error,q05,q95\n";
        for (const auto& s : shorts) {
            for (const auto& r : summarize_paths(s)) {
                if (r.time == 0.0) continue;
                const double input = s.value(0, 0, s.product_index(r.product));
                out << r.product << ',' << format_number(input) << ',' << format_number(r.mean) << ','
                    << format_number(r.std_error) << ',' << format_number(r.q05) << ',' << format_number(r.q95)
                    << '\n';
            }
        }
    });
    const bool breach = max_z > cfg.sanity_z || corr_gap > cfg.sanity_correlation;
    write_file(dir / "sanity_summary.txt", [&](std::ostream& out) {
        out << "max_relative_error " << format_number(report.max_relative_error) << '\n';
        out << "max_z " << format_number(max_z) << '\n';
        out << "max_correlation_gap " << format_number(corr_gap) << '\n';
        out << "status " << (breach ? "breach" : "ok") << '\n';
    });
    log("simulate: " + std::to_string(paths.n_paths()) + " paths x " + std::to_string(paths.n_times()) + " steps x " +
        std::to_string(paths.n_products()) + " products, max z " + format_number(max_z) + ", correlation gap " +
        format_number(corr_gap) + " (" + seconds_text(clock.seconds()) + ")");
    if (breach) {
        throw SanityBreach("sanity check failed: max z " + format_number(max_z) + " (" + worst +
                           "), correlation gap " + format_number(corr_gap));
    }
}

// ---------------------------------------------------------------- price

namespace {

struct PriceContext {
    const RunConfig& cfg;
    FactorModel model;
    std::vector<StepwiseCurve> curves;
    Date as_of;
};

// Daily spot paths for `markets` from the curve date to `last` inclusive.
PathSet simulate_daily_spot(const PriceContext& ctx, const std::vector<std::string>& markets, Date last,
                            std::uint64_t seed, int paths) {
    const int n_days = days_between(ctx.as_of, last);
    if (n_days < 1) throw ValidationError("contract window ends before the curve date");
    std::vector<Date> dates;
    for (int n = 0; n <= n_days; ++n) dates.push_back(add_days(ctx.as_of, n));
    std::vector<SpotInput> inputs;
    for (const auto& m : markets) {
        const StepwiseCurve& c = curve_for(ctx.curves, m);
        if (c.as_of != ctx.as_of) throw ValidationError("curves of " + m + " and the pricing date disagree");
        inputs.push_back({ctx.model.market_index(m), daily_forward(c, dates), m});
    }
    SimConfig sc{seed, paths, ctx.cfg.spot_step, n_days * ctx.cfg.spot_step, ctx.cfg.antithetic};
    return simulate_spot(ctx.model, inputs, sc);
}

struct Window {
    Date start;
    Date end;
    int first = 0;  // grid index of start
    int last = 0;   // grid index of end
};

Window window_of(const PriceContext& ctx, const KeyValueFile& spec) {
    Window w;
    w.start = parse_date(spec.text("start"));
    w.end = parse_date(spec.text("end"));
    if (w.end < w.start) throw ValidationError(spec.origin() + ": end before start");
    w.first = days_between(ctx.as_of, w.start);
    w.last = days_between(ctx.as_of, w.end);
    if (w.first < 1) throw ValidationError(spec.origin() + ": contract in delivery at the curve date");
    return w;
}

std::vector<int> int_list(const KeyValueFile& spec, const std::string& key) {
    std::vector<int> out;
    for (double v : spec.numbers(key)) {
        if (v != std::floor(v)) throw ValidationError(spec.origin() + ": " + key + " must list integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// Pairs two sweep lists; a single value is repeated to the other list's length.
std::vector<std::pair<int, int>> paired(const KeyValueFile& spec, const std::string& a, const std::string& b) {
    auto x = int_list(spec, a);
    auto y = int_list(spec, b);
    if (x.size() == 1) x.resize(y.size(), x[0]);
    if (y.size() == 1) y.resize(x.size(), y[0]);
    if (x.size() != y.size()) throw ValidationError(spec.origin() + ": " + a + " and " + b + " differ in length");
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], y[i]);
    return out;
}

// Polynomial degree of the continuation regressions, 3 unless the contract file sets `degree`.
LsmcOptions lsmc_options(const KeyValueFile& spec) {
    LsmcOptions opt;
    opt.degree = spec.integer("degree", opt.degree);
    if (opt.degree < 0) throw ValidationError(spec.origin() + ": degree must be nonnegative");
    return opt;
}

// Path count of one contract: the run's price_paths unless the contract file sets `paths`.
int spec_paths(const PriceContext& ctx, const KeyValueFile& spec) {
    const int paths = spec.integer("paths", ctx.cfg.price_paths);
    if (paths < 2) throw ValidationError(spec.origin() + ": paths must be at least 2");
    return paths;
}

void price_swing_spec(const PriceContext& ctx, const KeyValueFile& spec, std::ostream& out) {
    const std::string market = spec.text("market");
    const Window w = window_of(ctx, spec);
    const double rate = spec.number("rate", ctx.cfg.rate);
    SwingContract c;
    c.strike = spec.number("strike");
    c.quantity = spec.number("quantity", 1.0);
    const auto sweep = paired(spec, "u_max", "d_max");
    const LsmcOptions opt = lsmc_options(spec);
    const int paths = spec_paths(ctx, spec);
    spec.finish();

    const PathSet spot = slice_times(simulate_daily_spot(ctx, {market}, w.end, *ctx.cfg.seed, paths), w.first, w.last);
    out << "u_max,d_max,value,std_error,lower_bound,lower_bound_se,upper_bound,upper_bound_se\n";
    for (const auto& [u, d] : sweep) {
        Stopwatch clock;
        c.u_max = u;
        c.d_max = d;
        const SwingResult r = price_swing(c, spot, 0, rate, opt);
        out << u << ',' << d << ',' << format_number(r.value.value) << ',' << format_number(r.value.std_error) << ','
            << format_number(r.lower_bound) << ',' << format_number(r.lower_bound_se) << ','
            << format_number(r.upper_bound) << ',' << format_number(r.upper_bound_se) << '\n';
        log("  swing u=" + std::to_string(u) + " d=" + std::to_string(d) + ": " + format_number(r.value.value) +
            " (" + seconds_text(clock.seconds()) + ")");
    }
}

void price_vpp_spec(const PriceContext& ctx, const KeyValueFile& spec, std::ostream& out) {
    const std::string power = spec.text("power");
    const std::string fuel = spec.text("fuel");
    const Window w = window_of(ctx, spec);
    const double rate = spec.number("rate", ctx.cfg.rate);
    const int per_day = spec.integer("periods_per_day", 24);
    VppContract c;
    c.q_min = spec.number("q_min");
    c.q_max = spec.number("q_max");
    c.startup_cost = spec.number("startup_cost");
    c.shutdown_cost = spec.number("shutdown_cost");
    c.heat_rate = spec.number("heat_rate");
    c.period_hours = spec.number("period_hours", 1.0);
    const auto sweep = paired(spec, "t_on", "t_off");
    const LsmcOptions opt = lsmc_options(spec);
    const int paths = spec_paths(ctx, spec);
    spec.finish();

    const PathSet daily = slice_times(simulate_daily_spot(ctx, {power, fuel}, w.end, *ctx.cfg.seed, paths), w.first, w.last);
    const PathSet hourly = expand_steps(daily, per_day);
    const int pi = hourly.product_index(power);
    const int fi = hourly.product_index(fuel);
    out << "t_on,t_off,value,std_error,naive,naive_se,upper_bound,upper_bound_se\n";
    for (const auto& [on, off] : sweep) {
        Stopwatch clock;
        c.t_on = on;
        c.t_off = off;
        const VppResult r = price_vpp(c, hourly, pi, hourly, fi, rate, opt);
        out << on << ',' << off << ',' << format_number(r.lsmc.value) << ',' << format_number(r.lsmc.std_error) << ','
            << format_number(r.naive) << ',' << format_number(r.naive_se) << ',' << format_number(r.upper_bound) << ','
            << format_number(r.upper_bound_se) << '\n';
        log("  vpp t_on=" + std::to_string(on) + " t_off=" + std::to_string(off) + ": " +
            format_number(r.lsmc.value) + " (" + seconds_text(clock.seconds()) + ")");
    }
}

void price_storage_spec(const PriceContext& ctx, const KeyValueFile& spec, std::ostream& out) {
    const std::string market = spec.text("market");
    const Window w = window_of(ctx, spec);
    const double rate = spec.number("rate", ctx.cfg.rate);
    StorageContract c;
    c.v_min = spec.number("v_min");
    c.v_max = spec.number("v_max");
    c.v0 = spec.number("v0");
    c.v_target = spec.number("v_target");
    c.i_min = spec.number("i_min");
    c.i_max = spec.number("i_max");
    c.penalty_scale = spec.number("penalty_scale", c.penalty_scale);
    const LsmcOptions opt = lsmc_options(spec);
    const int paths = spec_paths(ctx, spec);
    spec.finish();

    // One grid point past the window: the settlement date carries the penalty.
    const Date settle = add_days(w.end, 1);
    const PathSet in_sample =
        slice_times(simulate_daily_spot(ctx, {market}, settle, *ctx.cfg.seed, paths), w.first, w.last + 1);
    const PathSet fresh =
        slice_times(simulate_daily_spot(ctx, {market}, settle, splitmix64(*ctx.cfg.seed ^ 0x5eedULL), paths), w.first,
                    w.last + 1);
    Stopwatch clock;
    const StorageResult r = price_storage(c, in_sample, fresh, 0, rate, opt);
    out << "approach,value,std_error\n";
    out << "deterministic," << format_number(r.deterministic) << ',' << format_number(r.deterministic_se) << '\n';
    out << "sdp," << format_number(r.sdp.value) << ',' << format_number(r.sdp.std_error) << '\n';
    out << "sdp_out_of_sample," << format_number(r.out_of_sample.value) << ','
        << format_number(r.out_of_sample.std_error) << '\n';
    for (const auto& warning : r.sdp.warnings) log("  storage: " + warning);
    log("  storage: sdp " + format_number(r.sdp.value) + " (" + seconds_text(clock.seconds()) + ")");
}

void price_european_spec(const PriceContext& ctx, const KeyValueFile& spec, std::ostream& out) {
    const std::string market = spec.text("market");
    const Window w = window_of(ctx, spec);
    const Date maturity = parse_date(spec.text("maturity"));
    const double rate = spec.number("rate", ctx.cfg.rate);
    const std::string type_text = spec.text("option", "call");
    if (type_text != "call" && type_text != "put") throw ValidationError(spec.origin() + ": option must be call or put");
    const OptionType type = type_text == "call" ? OptionType::call : OptionType::put;
    const auto moneyness = spec.numbers("moneyness");
    const int n_paths = spec_paths(ctx, spec);
    spec.finish();

    const StepwiseCurve& curve = curve_for(ctx.curves, market);
    const int m0 = month_index(w.start);
    const int count = month_index(w.end) - m0 + 1;
    const auto f0 = curve.average(m0, count);
    if (!f0) throw ValidationError(spec.origin() + ": delivery window not covered by the curve");
    const int n_mat = days_between(ctx.as_of, maturity);
    if (n_mat < 1 || n_mat > w.first) throw ValidationError(spec.origin() + ": maturity must lie in (curve date, start]");

    const double step = ctx.cfg.spot_step;
    ContractDescriptor d;
    d.market = ctx.model.market_index(market);
    d.kind = ContractKind::swap;
    d.delivery_start = w.first * step;
    d.delivery_end = (w.last + 1) * step;
    d.initial = *f0;
    d.key = market + ":" + format_date(w.start) + "/" + format_date(w.end);
    const double t0 = n_mat * step;
    SimConfig sc{*ctx.cfg.seed, n_paths, step, t0, ctx.cfg.antithetic};
    const PathSet paths = simulate_swap(ctx.model, std::span(&d, 1), sc);
    const double var = theoretical_log_variance(ctx.model, d, t0);
    out << "strike,black,mc,std_error\n";
    for (double m : moneyness) {
        const double k = m * *f0;
        const double black = black_price(*f0, k, var, rate, t0, type);
        const McEstimate mc = mc_european(paths, 0, t0, k, rate, type);
        out << format_number(k) << ',' << format_number(black) << ',' << format_number(mc.value) << ','
            << format_number(mc.std_error) << '\n';
    }
}

}  // namespace

void cmd_price(const RunConfig& cfg) {
    Stopwatch clock;
    if (!cfg.seed) throw ValidationError("price needs a seed (config key seed or --seed)");
    if (cfg.contracts.empty()) throw ValidationError("config lists no contracts");
    PriceContext ctx{cfg, load_model(cfg), {}, {}};
    ctx.curves = latest_curves(cfg, ctx.model);
    ctx.as_of = ctx.curves.front().as_of;

    std::set<std::string> names;
    for (const auto& file : cfg.contracts) {
        const KeyValueFile spec = KeyValueFile::load(file);
        const std::string type = spec.text("type");
        const std::string name = spec.text("name", file.stem().string());
        if (!names.insert(name).second) throw ValidationError("duplicate contract name " + name);
        Stopwatch one;
        log("price: " + name + " (" + type + ")");
        write_file(price_dir(cfg) / (name + ".csv"), [&](std::ostream& out) {
            if (type == "swing") {
                price_swing_spec(ctx, spec, out);
            } else if (type == "vpp") {
                price_vpp_spec(ctx, spec, out);
            } else if (type == "storage") {
                price_storage_spec(ctx, spec, out);
            } else if (type == "european") {
                price_european_spec(ctx, spec, out);
            } else {
                throw ValidationError(spec.origin() + ": unknown contract type " + type);
            }
        });
        log("price: " + name + " done (" + seconds_text(one.seconds()) + ")");
    }
    log("price: " + std::to_string(cfg.contracts.size()) + " contracts (" + seconds_text(clock.seconds()) + ")");
}

void cmd_pipeline(const RunConfig& cfg) {
    cmd_ingest(cfg);
    cmd_curve(cfg);
    cmd_calibrate(cfg);
    cmd_simulate(cfg);
    cmd_price(cfg);
}

int run_command(const std::string& name, const RunConfig& cfg) {
    try {
        cfg.validate();
        if (cfg.quotes.empty() && (name == "ingest" || name == "curve" || name == "pipeline")) {
            throw ValidationError("config has no quotes file");
        }
        if (name == "ingest") cmd_ingest(cfg);
        else if (name == "curve") cmd_curve(cfg);
        else if (name == "calibrate") cmd_calibrate(cfg);
        else if (name == "simulate") cmd_simulate(cfg);
        else if (name == "price") cmd_price(cfg);
        else if (name == "pipeline") cmd_pipeline(cfg);
        else throw ValidationError("unknown command " + name);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace hjm::app
