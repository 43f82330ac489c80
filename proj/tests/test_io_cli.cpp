#include <catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qspec/cli.hpp"
#include "qspec/io.hpp"

using namespace qspec;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qspec_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text) lines += (c == '\n') ? 1 : 0;
    return lines;
}

int run(const std::vector<std::string>& args) { return qspec::cli::run_cli(args); }

}  // namespace

TEST_CASE("csv reading", "[io]") {
    TempDir dir;
    const auto plain = dir.file("plain.csv");
    write_text(plain, "1\n2\n3\n");
    const Series s = read_series_csv(plain, "1", false);
    CHECK(s.values() == std::vector<double>{1, 2, 3});

    // header selection by name, 634 data rows
    const auto permits = dir.file("permits.csv");
    std::ostringstream body;
    body << "date,permits\n";
    for (int i = 0; i < 634; ++i) body << i << "," << (1000 + i) << "\n";
    write_text(permits, body.str());
    const Series p = read_series_csv(permits, "permits", true);
    CHECK(p.size() == 634);
    CHECK(p[0] == 1000.0);
    CHECK(p[633] == 1633.0);

    // numeric index works with a header too
    const Series p2 = read_series_csv(permits, "2", true);
    CHECK(p2.values() == p.values());
}

TEST_CASE("csv error contracts", "[io]") {
    TempDir dir;
    const auto bad = dir.file("bad.csv");
    write_text(bad, "x\n1\nNaN\n3\n");
    try {
        read_series_csv(bad, "x", true);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }

    write_text(dir.file("inf.csv"), "1\ninf\n");
    CHECK_THROWS_AS(read_series_csv(dir.file("inf.csv"), "1", false), parse_error);

    write_text(dir.file("short.csv"), "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_series_csv(dir.file("short.csv"), "b", true), schema_error);

    write_text(dir.file("cols.csv"), "a,b\n1,2\n");
    CHECK_THROWS_AS(read_series_csv(dir.file("cols.csv"), "missing", true), schema_error);
    CHECK_THROWS_AS(read_series_csv(dir.file("nothere.csv"), "1", false), parse_error);
    write_text(dir.file("empty.csv"), "");
    CHECK_THROWS_AS(read_series_csv(dir.file("empty.csv"), "1", false), schema_error);
}

TEST_CASE("series round trip preserves every bit", "[io]") {
    TempDir dir;
    CounterRng rng(8);
    std::vector<double> values;
    for (int i = 0; i < 200; ++i) {
        values.push_back((rng.next_open01() - 0.5) * std::pow(10.0, double(i % 40) - 20.0));
    }
    values.push_back(1.0 / 3.0);
    values.push_back(-1e300);
    const Series s(values);
    const auto path = dir.file("roundtrip.csv");
    write_series_csv(path, s);
    const Series back = read_series_csv(path, "1", false);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(back[i] == s[i]);
}

TEST_CASE("experiment config round trip", "[io]") {
    TempDir dir;
    const auto path = dir.file("config.json");
    write_text(path, R"({
      "type": "size_power",
      "process": "qar",
      "n": [100, 300],
      "tau": [0.1, 0.9],
      "test": "cvm-bootstrap",
      "warp_speed": true,
      "block_sizes": [5, 10],
      "replications": 50,
      "seed": 7,
      "contamination": {"p": 0.15, "noise": "t", "nu": 2.001}
    })");
    const auto cfg = read_experiment_config(path);
    CHECK(cfg.type == "size_power");
    CHECK(cfg.process == "qar");
    CHECK(cfg.n_values == std::vector<std::size_t>{100, 300});
    CHECK(cfg.taus == std::vector<double>{0.1, 0.9});
    CHECK(cfg.block_sizes == std::vector<int>{5, 10});
    CHECK(cfg.replications == 50);
    CHECK(cfg.contamination.has_value());
    CHECK(cfg.contamination->nu == Approx(2.001));

    write_text(dir.file("broken.json"), "{ not json");
    CHECK_THROWS_AS(read_experiment_config(dir.file("broken.json")), parse_error);
    write_text(dir.file("typeless.json"), R"({"n": [10]})");
    CHECK_THROWS_AS(read_experiment_config(dir.file("typeless.json")), schema_error);
}

TEST_CASE("median reference round trip", "[io]") {
    TempDir dir;
    MedianReference ref;
    ref.seed = 11;
    ref.n = 1000;
    ref.bandwidth_c = 13.0;
    ref.tau = 0.5;
    ref.freqs = {0.0, 1.0, 2.0, 3.2};
    ref.values = {0.1, 0.2, 0.15, 0.12};
    ref.targets = {{1.5, 0.99}};
    const auto path = dir.file("ref.json");
    save_median_reference(path, ref);
    const auto back = load_median_reference(path);
    CHECK(back.freqs == ref.freqs);
    CHECK(back.values == ref.values);
    CHECK(back.targets == ref.targets);
    CHECK(back.value_at(1.5) == 0.99);                      // exact target
    CHECK(back.value_at(0.5) == Approx(0.15).margin(1e-12));  // midpoint interpolation
}

TEST_CASE("report JSON schemas are stable", "[io]") {
    CvmResult r;
    r.procedure = CvmResult::Procedure::bootstrap;
    r.block_size = 10;
    const auto cvm = cvm_to_json(r);
    std::vector<std::string> cvm_keys;
    for (auto it = cvm.begin(); it != cvm.end(); ++it) cvm_keys.push_back(it.key());
    CHECK(cvm_keys == std::vector<std::string>{"method", "tau", "statistic", "critical_value",
                                               "p_value", "alpha", "decision", "replications",
                                               "block_size", "seed", "known_quantile"});

    PointwiseTestReport p{};
    const auto pw = pointwise_to_json(p);
    std::vector<std::string> pw_keys;
    for (auto it = pw.begin(); it != pw.end(); ++it) pw_keys.push_back(it.key());
    CHECK(pw_keys == std::vector<std::string>{"method", "tau", "lambda", "lambda_snapped",
                                              "statistic", "lower", "upper", "null_value",
                                              "p_value", "alpha", "k", "decision"});
}

TEST_CASE("cli estimate produces one row per grid point and tau", "[cli]") {
    TempDir dir;
    const auto input = dir.file("three.csv");
    write_text(input, "1\n2\n3\n");
    const auto out = dir.file("est.csv");
    CHECK(run({"estimate", "--input", input, "--tau", "0.5", "--output", out}) == 0);
    const auto text = read_text(out);
    CHECK(count_lines(text) == 1 + 2);  // header + natural grid j = 0..1

    const auto out2 = dir.file("est2.csv");
    CHECK(run({"estimate", "--input", input, "--tau", "0.25", "--tau", "0.75", "--output",
               out2}) == 0);
    CHECK(count_lines(read_text(out2)) == 1 + 4);  // two tau blocks
}

TEST_CASE("cli estimate bands keep the ordinate inside the interval", "[cli]") {
    TempDir dir;
    const auto series_path = dir.file("ar2.csv");
    CHECK(run({"simulate", "--process", "ar2", "--n", "300", "--seed", "7", "--output",
               series_path}) == 0);
    const auto out = dir.file("bands.csv");
    CHECK(run({"estimate", "--input", series_path, "--tau", "0.5", "--band-k", "4", "--output",
               out}) == 0);
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);  // header
    CHECK(line == "lambda,tau,estimate,lower,upper,null_value");
    int rows = 0;
    while (std::getline(in, line)) {
        const auto cells = qspec::detail::split_csv_line(line);
        REQUIRE(cells.size() == 6);
        const double est = std::stod(cells[2]);
        const double lo = std::stod(cells[3]);
        const double hi = std::stod(cells[4]);
        CHECK(lo < est);
        CHECK(est < hi);
        ++rows;
    }
    CHECK(rows > 100);
}

TEST_CASE("cli estimate normalization and explicit grids", "[cli]") {
    TempDir dir;
    const auto input = dir.file("u.csv");
    CHECK(run({"simulate", "--process", "iid:uniform", "--n", "64", "--seed", "4", "--output",
               input}) == 0);
    const auto raw_path = dir.file("raw.csv");
    const auto norm_path = dir.file("norm.csv");
    CHECK(run({"estimate", "--input", input, "--tau", "0.5", "--grid", "count:9", "--output",
               raw_path}) == 0);
    CHECK(run({"estimate", "--input", input, "--tau", "0.5", "--grid", "count:9", "--normalize",
               "null-value", "--output", norm_path}) == 0);
    std::ifstream raw(raw_path), norm(norm_path);
    std::string rline, nline;
    std::getline(raw, rline);
    std::getline(norm, nline);
    int rows = 0;
    const double flat = 0.25 / (2.0 * std::numbers::pi);
    while (std::getline(raw, rline) && std::getline(norm, nline)) {
        const auto rc = qspec::detail::split_csv_line(rline);
        const auto nc = qspec::detail::split_csv_line(nline);
        CHECK(std::stod(rc[0]) == Approx(std::stod(nc[0])));  // same lambda
        CHECK(std::stod(nc[1]) == Approx(0.5));
        // normalized estimate times the flat value recovers the raw estimate
        CHECK(std::stod(nc[2]) * flat == Approx(std::stod(rc[2])).margin(1e-12));
        CHECK(std::stod(rc[5]) == Approx(flat));
        CHECK(std::stod(nc[5]) == 1.0);
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("cli flag conflicts and bad values exit nonzero", "[cli]") {
    TempDir dir;
    const auto input = dir.file("in.csv");
    write_text(input, "1\n2\n3\n4\n");
    CHECK(run({"estimate", "--input", input, "--tau", "0.5", "--band-k", "2", "--kernel",
               "bartlett", "--output", dir.file("x.csv")}) != 0);
    CHECK(run({"estimate", "--input", input, "--kernel", "boxcar", "--output",
               dir.file("x.csv")}) != 0);
    CHECK(run({"estimate", "--input", input, "--normalize", "wat", "--output",
               dir.file("x.csv")}) != 0);
    CHECK(run({"estimate", "--input", input, "--grid", "count:1", "--output",
               dir.file("x.csv")}) != 0);
    CHECK(run({"bogus-subcommand"}) != 0);
}

TEST_CASE("cli test subcommand", "[cli]") {
    TempDir dir;
    const auto input = dir.file("iid.csv");
    CHECK(run({"simulate", "--process", "iid:chi2_3", "--n", "100", "--seed", "5", "--output",
               input}) == 0);

    const auto out1 = dir.file("mc1.json");
    const auto out2 = dir.file("mc2.json");
    CHECK(run({"test", "--input", input, "--tau", "0.5", "--method", "cvm-mc", "--seed", "42",
               "--output", out1}) == 0);
    CHECK(run({"test", "--input", input, "--tau", "0.5", "--method", "cvm-mc", "--seed", "42",
               "--output", out2}) == 0);
    CHECK(read_text(out1) == read_text(out2));  // deterministic for a fixed seed
    const auto doc = json::parse(read_text(out1));
    CHECK(doc.at("method") == "cvm-mc");
    CHECK(doc.at("p_value").get<double>() >= 1.0 / 1000.0);

    // bootstrap without --block-size applies the sqrt(n)/2 rule
    const auto outb = dir.file("boot.json");
    CHECK(run({"test", "--input", input, "--tau", "0.5", "--method", "cvm-bootstrap", "--seed",
               "9", "--output", outb}) == 0);
    CHECK(json::parse(read_text(outb)).at("block_size").get<int>() == 5);

    // pointwise at lambda = 0 violates the (0, pi) domain
    CHECK(run({"test", "--input", input, "--tau", "0.5", "--method", "pointwise", "--lambda",
               "0", "--k", "2"}) != 0);
    // lambda only applies to the pointwise method
    CHECK(run({"test", "--input", input, "--tau", "0.5", "--method", "cvm-mc", "--lambda",
               "1.0"}) != 0);
    CHECK(run({"test", "--input", input, "--tau", "0.5", "--method", "sign-test"}) != 0);

    const auto outp = dir.file("pw.json");
    CHECK(run({"test", "--input", input, "--tau", "0.5", "--method", "pointwise", "--lambda",
               "1.4", "--k", "2", "--output", outp}) == 0);
    const auto pw = json::parse(read_text(outp));
    CHECK(pw.at("method") == "pointwise");
    CHECK(pw.at("k").get<int>() == 2);
}

TEST_CASE("cli simulate determinism and qar positivity", "[cli]") {
    TempDir dir;
    const auto a = dir.file("a.csv");
    const auto b = dir.file("b.csv");
    CHECK(run({"simulate", "--process", "ar2", "--n", "300", "--seed", "7", "--output", a}) == 0);
    CHECK(run({"simulate", "--process", "ar2", "--n", "300", "--seed", "7", "--output", b}) == 0);
    CHECK(read_text(a) == read_text(b));

    const auto q = dir.file("qar.csv");
    CHECK(run({"simulate", "--process", "qar", "--n", "300", "--seed", "11", "--output", q}) == 0);
    const Series s = read_series_csv(q, "1", false);
    CHECK(s.size() == 300);
    for (double v : s.values()) CHECK(v > 0.0);

    CHECK(run({"simulate", "--process", "weibull", "--n", "10", "--output",
               dir.file("w.csv")}) != 0);

    // contaminated run is deterministic too
    const auto c1 = dir.file("c1.csv");
    const auto c2 = dir.file("c2.csv");
    CHECK(run({"simulate", "--process", "ar2", "--n", "100", "--seed", "3", "--contaminate",
               "0.15:t:2.001", "--output", c1}) == 0);
    CHECK(run({"simulate", "--process", "ar2", "--n", "100", "--seed", "3", "--contaminate",
               "0.15:t:2.001", "--output", c2}) == 0);
    CHECK(read_text(c1) == read_text(c2));
    CHECK(run({"simulate", "--process", "ar2", "--n", "10", "--seed", "3", "--contaminate",
               "0.15:laplace", "--output", c1}) != 0);
}

TEST_CASE("cli experiment runs a small config end to end", "[cli]") {
    TempDir dir;
    const auto cfg_path = dir.file("cfg.json");
    write_text(cfg_path, R"({
      "type": "size_power",
      "process": "iid:chi2_3",
      "n": [100],
      "tau": [0.5],
      "test": "cvm-mc",
      "replications": 50,
      "shared_null_draws": 500,
      "seed": 12,
      "threads": 2
    })");
    const auto prefix = dir.file("result");
    CHECK(run({"experiment", "--config", cfg_path, "--output", prefix}) == 0);
    const auto csv = read_text(prefix + ".csv");
    CHECK(count_lines(csv) == 2);  // header + one cell
    CHECK(csv.find("size_power,iid:chi2_3,cvm-mc,100,0.5") != std::string::npos);
    const auto doc = json::parse(read_text(prefix + ".json"));
    CHECK(doc.at("cells").size() == 1);
    CHECK(doc.at("cells")[0].at("replications").get<int>() == 50);

    CHECK(run({"experiment", "--config", dir.file("missing.json"), "--output", prefix}) != 0);
}
