#include "doctest.h"

#include "app.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace hjm;
using namespace hjm::app;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hjm_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The first `days` trading days of the bundled fixture, both markets.
std::string fixture_head(int days) {
    std::ifstream in(fs::path(HJM_DATA_DIR) / "fixture_quotes.csv");
    std::string line, out;
    std::getline(in, line);
    out = line + "\n";
    for (int i = 0; i < days * 52 && std::getline(in, line); ++i) out += line + "\n";
    return out;
}

}  // namespace

TEST_CASE("key = value files: comments, fractions, lists") {
    const auto kv = KeyValueFile::parse("# header\n dt = 1/252 \nmarkets = DE, TTF,\nn = 12 # trailing\nname = x\n", "t");
    CHECK(kv.number("dt") == doctest::Approx(1.0 / 252.0));
    CHECK(kv.list("markets") == std::vector<std::string>{"DE", "TTF"});
    CHECK(kv.integer("n", 0) == 12);
    CHECK(kv.integer("missing", 7) == 7);
    CHECK(kv.number("missing", 2.5) == 2.5);
    CHECK_THROWS_AS(kv.finish(), ValidationError);  // name never read
    CHECK(kv.text("name") == "x");
    CHECK_NOTHROW(kv.finish());

    CHECK_THROWS_AS(KeyValueFile::parse("a = 1\na = 2\n", "t"), ValidationError);
    CHECK_THROWS_AS(KeyValueFile::parse("just words\n", "t"), ValidationError);
    CHECK_THROWS_AS(KeyValueFile::parse(" = 3\n", "t"), ValidationError);
    const auto bad = KeyValueFile::parse("a = 1/0\nb = 2.5\nc = abc\n", "t");
    CHECK_THROWS_AS(bad.number("a"), ValidationError);
    CHECK_THROWS_AS(bad.integer("b", 0), ValidationError);
    CHECK_THROWS_AS(bad.number("c"), ValidationError);
    CHECK_THROWS_AS(bad.text("d"), ValidationError);
}

TEST_CASE("config paths resolve against the config file") {
    const fs::path dir = scratch("paths");
    fs::create_directories(dir / "conf");
    write_text(dir / "conf" / "run.cfg",
               "quotes = ../q.csv\ncontracts = a.cfg, /abs/b.cfg\nout = results\nseed = 42\nantithetic = true\n");
    const RunConfig c = load_config(dir / "conf" / "run.cfg");
    CHECK(c.quotes == dir / "conf" / "../q.csv");
    REQUIRE(c.contracts.size() == 2);
    CHECK(c.contracts[0] == dir / "conf" / "a.cfg");
    CHECK(c.contracts[1] == fs::path("/abs/b.cfg"));
    CHECK(c.out == dir / "conf" / "results");
    CHECK(c.seed == 42u);
    CHECK(c.antithetic);
    CHECK(c.dt == doctest::Approx(1.0 / 252.0));

    write_text(dir / "typo.cfg", "n_path = 10\n");
    CHECK_THROWS_AS(load_config(dir / "typo.cfg"), ValidationError);
    write_text(dir / "seed.cfg", "seed = -3\n");
    CHECK_THROWS_AS(load_config(dir / "seed.cfg"), ValidationError);
    CHECK_THROWS_AS(load_config(dir / "absent.cfg"), ValidationError);
}

TEST_CASE("exit codes: validation failures leave no outputs") {
    const fs::path dir = scratch("exit");
    write_text(dir / "empty.csv", "");
    RunConfig cfg;
    cfg.quotes = dir / "empty.csv";
    cfg.out = dir / "out";
    CHECK(run_command("ingest", cfg) == 1);
    CHECK_FALSE(fs::exists(dir / "out"));

    write_text(dir / "header.csv", "trading_date,market,delivery_start,delivery_end,price\n");
    cfg.quotes = dir / "header.csv";
    CHECK(run_command("pipeline", cfg) == 1);
    CHECK_FALSE(fs::exists(dir / "out"));

    cfg.quotes.clear();
    CHECK(run_command("ingest", cfg) == 1);
    CHECK(run_command("calibrate", cfg) == 1);  // no ingest artifacts yet
    CHECK(run_command("launch", cfg) == 1);
    RunConfig bad = cfg;
    bad.dt = 0.0;
    CHECK(run_command("simulate", bad) == 1);
    bad = cfg;
    bad.antithetic = true;
    bad.n_paths = 3;
    CHECK(run_command("simulate", bad) == 1);
}

TEST_CASE("ingest keeps going past bad rows and lists them") {
    const fs::path dir = scratch("ingest");
    std::string text = fixture_head(40);
    text += "2022-02-01,DE,2022-05-01,2022-04-30,50\n";  // delivery ends before it starts
    text += "not a row\n";
    write_text(dir / "quotes.csv", text);
    RunConfig cfg;
    cfg.quotes = dir / "quotes.csv";
    cfg.out = dir / "out";
    cfg.acf_lags = 5;
    REQUIRE(run_command("ingest", cfg) == 0);
    const std::string diag = read_text(dir / "out" / "ingest" / "diagnostics.txt");
    CHECK(diag.find("quotes_accepted 2080") != std::string::npos);
    CHECK(diag.find("quotes_rejected 2") != std::string::npos);
    CHECK(diag.find("rejected_row 2081") != std::string::npos);  // data rows, header excluded
    CHECK(diag.find("rejected_row 2082") != std::string::npos);
    CHECK(read_text(dir / "out" / "ingest" / "markets.txt") == "DE\nTTF\n");
    CHECK(fs::exists(dir / "out" / "ingest" / "panel_DE.csv"));
    CHECK(fs::exists(dir / "out" / "ingest" / "correlation_DE_TTF.csv"));
    for (const auto& e : fs::recursive_directory_iterator(dir / "out")) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("a sanity breach stops the run with exit code 2") {
    const fs::path dir = scratch("sanity");
    write_text(dir / "quotes.csv", fixture_head(120));
    RunConfig cfg;
    cfg.quotes = dir / "quotes.csv";
    cfg.out = dir / "out";
    cfg.months = 12;
    cfg.acf_lags = 5;
    cfg.seed = 5;
    cfg.n_paths = 200;
    cfg.short_horizon_paths = 100;
    REQUIRE(run_command("ingest", cfg) == 0);
    REQUIRE(run_command("curve", cfg) == 0);
    REQUIRE(run_command("calibrate", cfg) == 0);
    CHECK(run_command("simulate", cfg) == 0);
    CHECK(fs::exists(dir / "out" / "simulate" / "sanity.csv"));

    cfg.sanity_z = 1e-6;
    CHECK(run_command("simulate", cfg) == 2);
    RunConfig unseeded = cfg;
    unseeded.seed.reset();
    CHECK(run_command("simulate", unseeded) == 1);
}
