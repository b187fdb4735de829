#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "floq/closed_form.hpp"
#include "floq/experiment.hpp"

using namespace floq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    fs::path d = fs::temp_directory_path() / "floq_test_out";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("config round trip") {
    ExperimentConfig cfg;
    CHECK(parse_config(serialize_config(cfg)) == cfg);

    cfg.experiment = "chrono";
    cfg.model.type = "three-phase";
    cfg.model.K3 = {10.0, 10.0, 10.0};
    cfg.model.a3 = {10.0 / 24, 12.0 / 24, 2.0 / 24};
    cfg.model.psi = {"sin", {0.9}};
    cfg.therapy = TherapySpec{2, 0.5, 0.25, {"cos6", {1.0}}};
    cfg.grid.n_time = 480;
    cfg.grid.c_tail = 12.0;
    cfg.chrono.epsilons = {0.1, 0.5, 1.0};
    cfg.chrono.gamma = {"cos6", {1.0}};
    cfg.jobs = 2;
    cfg.output.prefix = "x/y";
    CHECK(parse_config(serialize_config(cfg)) == cfg);

    ExperimentConfig multi;
    multi.model.type = "multi-phase";
    multi.model.phases = {PhaseSpec{2.0, 0.5, {"sin", {0.9}}, std::nullopt},
                          PhaseSpec{3.0, 0.5, {"constant", {1.0}}, ControlSpec{"constant", {0.1}}}};
    CHECK(parse_config(serialize_config(multi)) == multi);
}

TEST_CASE("config validation messages carry their location") {
    CHECK_THROWS_WITH_AS((void)parse_config("{\"experiment\": \"fly\"}"),
                         doctest::Contains("/experiment"), std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)parse_config("{\"chrono\": {\"theta_points\": 2}}"),
                         doctest::Contains("/chrono/theta_points"), std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)parse_config("not json"), doctest::Contains("not valid JSON"),
                         std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config("{\"model\": {\"type\": \"five-phase\"}}"),
                    std::invalid_argument);
    // unknown control kinds surface when the model is built
    ExperimentConfig cfg = parse_config("{\"model\": {\"type\": \"one-phase\", \"psi\": {\"kind\": \"wavelet\"}}}");
    CHECK_THROWS_WITH_AS((void)build_model(cfg.model, cfg.therapy),
                         doctest::Contains("unknown control kind"), std::invalid_argument);
}

TEST_CASE("full-precision formatting round trips") {
    for (double x : {1.0 / 3.0, 0.1, 1e-300, 123456.789, 0.47860033949912983}) {
        const std::string s = format_full(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("maturation-age sweep crosses the Perron curve at the period") {
    ExperimentConfig cfg;
    cfg.experiment = "sweep-a";
    cfg.model.psi = {"sin", {}};
    cfg.grid.n_time = 1200;
    cfg.grid.c_tail = 8.0;
    cfg.sweep = {0.97, 1.03, 7};
    cfg.jobs = 0;
    const SweepAResult res = run_sweep_a(cfg);
    CHECK(res.all_converged);
    REQUIRE(res.crossing.has_value());
    CHECK(std::abs(*res.crossing - 1.0) < 0.005);
    for (const SweepRow& r : res.rows) {
        CHECK(std::isfinite(r.lambda_F));
        CHECK(r.lambda_P >= r.lambda_g);
    }
    // rows sorted by the sweep parameter
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i) CHECK(res.rows[i].a < res.rows[i + 1].a);
}

TEST_CASE("identity control collapses Floquet onto Perron columnwise") {
    ExperimentConfig cfg;
    cfg.experiment = "sweep-a";
    cfg.model.psi = {"constant", {}};
    cfg.grid.n_time = 500;
    cfg.grid.c_tail = 8.0;
    cfg.sweep = {0.9, 1.1, 3};
    const SweepAResult res = run_sweep_a(cfg);
    for (const SweepRow& r : res.rows) CHECK(std::abs(r.lambda_F - r.lambda_P) < 2e-3);
}

TEST_CASE("the local picture far from the period: Floquet strictly below Perron") {
    ExperimentConfig cfg;
    cfg.experiment = "sweep-a";
    cfg.model.psi = {"sin", {}};
    cfg.grid.n_time = 600;
    cfg.grid.c_tail = 8.0;
    cfg.sweep = {0.3, 0.5, 2};
    const SweepAResult res = run_sweep_a(cfg);
    CHECK(res.rows[0].lambda_F - res.rows[0].lambda_P < -5e-3);
    CHECK(res.rows[1].lambda_F - res.rows[1].lambda_P < -5e-3);
    CHECK_FALSE(res.crossing.has_value());
}

TEST_CASE("identical configs produce byte-identical outputs") {
    const fs::path dir = temp_dir();
    ExperimentConfig cfg;
    cfg.experiment = "sweep-a";
    cfg.model.psi = {"square", {}};
    cfg.grid.n_time = 400;
    cfg.grid.c_tail = 6.0;
    cfg.sweep = {0.96, 1.04, 5};
    cfg.jobs = 2;

    std::ostringstream log;
    cfg.output.prefix = (dir / "runA").string();
    CHECK(run_experiment(cfg, log) == 0);
    cfg.output.prefix = (dir / "runB").string();
    CHECK(run_experiment(cfg, log) == 0);
    const std::string a = slurp(dir / "runA_sweep-a.csv");
    const std::string b = slurp(dir / "runB_sweep-a.csv");
    CHECK(!a.empty());
    CHECK(a == b);

    // header row present, 17-significant-digit payload
    CHECK(a.substr(0, a.find('\n')) == "a,lambda_F,lambda_P,lambda_g,converged");

    // meta sidecar exists and is JSON
    const std::string meta = slurp(dir / "runA_meta.json");
    CHECK(meta.find("\"experiment\"") != std::string::npos);
    CHECK(meta.find("\"crossing_a\"") != std::string::npos);
}

TEST_CASE("floquet and perron runners emit their files") {
    const fs::path dir = temp_dir();
    ExperimentConfig cfg;
    cfg.experiment = "perron";
    cfg.output.prefix = (dir / "pr").string();
    std::ostringstream log;
    CHECK(run_experiment(cfg, log) == 0);
    const std::string csv = slurp(dir / "pr_perron.csv");
    CHECK(csv.substr(0, csv.find('\n')) == "lambda_P,residual_P,lambda_g,residual_g");

    ExperimentConfig fcfg;
    fcfg.experiment = "floquet";
    fcfg.grid.n_time = 256;
    fcfg.grid.c_tail = 8.0;
    fcfg.output.prefix = (dir / "fl").string();
    fcfg.output.format = "json";
    CHECK(run_experiment(fcfg, log) == 0);
    CHECK(slurp(dir / "fl_floquet.json").find("lambda") != std::string::npos);
}
