#pragma once

#include "hjm/errors.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hjm::app {

/// A sanity report outside its tolerances. Exit code 2 like any numerical failure.
class SanityBreach : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Flat `key = value` text with '#' comments. Every key must be consumed; leftovers
/// are reported by `finish()` so typos do not pass silently.
class KeyValueFile {
public:
    static KeyValueFile load(const std::filesystem::path& file);
    static KeyValueFile parse(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string text(const std::string& key) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    std::vector<std::string> list(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    /// Resolved against the directory of the file.
    std::filesystem::path path(const std::string& key) const;
    const std::string& origin() const { return origin_; }
    void finish() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> used_;
    std::string origin_;
    std::filesystem::path base_;
};

struct RunConfig {
    std::filesystem::path quotes;
    std::vector<std::string> markets;  // empty: every market in the quote file
    double dt = 1.0 / 252.0;
    int months = 24;
    int quarters = 0;
    int years = 0;
    int curve_months = 36;
    int acf_lags = 20;
    double outlier_k = 3.0;  // 0 disables the filter
    double threshold = 0.99;
    int factors = 0;  // 0: chosen by threshold
    std::optional<std::uint64_t> seed;
    int n_paths = 1000;
    double step = 0.0;  // 0: dt
    double horizon = 1.0;
    bool antithetic = false;
    int export_paths = 10;
    int short_horizon_days = 10;
    int short_horizon_paths = 400;
    double sanity_z = 5.0;
    double sanity_correlation = 0.2;
    std::vector<std::filesystem::path> contracts;
    int price_paths = 500;
    double spot_step = 1.0 / 365.0;
    double rate = 0.0;
    std::filesystem::path out = "out";

    double sim_step() const { return step > 0.0 ? step : dt; }
    void validate() const;
};

RunConfig load_config(const std::filesystem::path& file);

void cmd_ingest(const RunConfig& cfg);
void cmd_curve(const RunConfig& cfg);
void cmd_calibrate(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_price(const RunConfig& cfg);
void cmd_pipeline(const RunConfig& cfg);

/// Runs one command and maps failures to exit codes: 0 ok, 1 validation, 2 numerical.
int run_command(const std::string& name, const RunConfig& cfg);

}  // namespace hjm::app
