#include <cmath>
#include <cstring>
#include <doctest.h>
#include <filesystem>
#include <fstream>

#include "dacsim/scenario.hpp"
#include "dacsim/trace_io.hpp"

using namespace dacsim;

namespace {

const char* kMinimalConfig = R"(
[plant]
theta = 1.0

[controller]
eps = 0.1
c = 1.0
r = 1.0
sigma = 0.05

[initial]
theta_hat0 = 0.0

[simulation]
t_final = 1
)";

std::string with_line(const std::string& base, const std::string& section,
                      const std::string& line) {
    std::string out = base;
    const auto pos = out.find("[" + section + "]");
    REQUIRE(pos != std::string::npos);
    const auto eol = out.find('\n', pos);
    out.insert(eol + 1, line + "\n");
    return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << contents;
    return path;
}

}  // namespace

TEST_CASE("minimal config fills the documented defaults") {
    const ScenarioConfig cfg = parse_config(kMinimalConfig);
    CHECK(cfg.h == doctest::Approx(1e-3));
    CHECK(cfg.intervals == 1000);
    CHECK(cfg.steps == 1000);
    CHECK(cfg.controller.omega == doctest::Approx(0.5 * std::log(2.0)));
    CHECK(cfg.controller.fp_tol == 1e-12);
    CHECK(cfg.controller.fp_max_iter == 50);
    CHECK(cfg.controller.blowup_limit == 1e12);
    CHECK(cfg.disturbance.kind == "zero");
    CHECK(cfg.x0.kind == InitialSpec::Kind::constant);
}

TEST_CASE("config diagnostics carry the key path") {
    CHECK_THROWS_WITH_AS(parse_config(with_line(kMinimalConfig, "controller", "bogus = 1")),
                         "unknown key controller.bogus", ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimalConfig) + "\n[mystery]\nx = 1\n"),
                    ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"(
[plant]
theta = 1.0
[controller]
eps = 0.1
c = 1.0
r = 1.0
sigma = 0.05
[initial]
theta_hat0 = 0.0
[simulation]
)"),
                         "missing required key simulation.t_final", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(with_line(kMinimalConfig, "controller", "omega = 1.0")),
                         "controller omega must satisfy exp(omega*r) < 2", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(with_line(kMinimalConfig, "simulation", "h = 0.3")),
                         "simulation.h must divide controller.r", GridError);
    {
        std::string text(kMinimalConfig);
        const auto pos = text.find("t_final = 1");
        text.replace(pos, std::strlen("t_final = 1"), "t_final = 0.0005");
        CHECK_THROWS_WITH_AS(parse_config(text),
                             "simulation.t_final must be a multiple of simulation.h", GridError);
    }
    CHECK_THROWS_AS(parse_config(with_line(kMinimalConfig, "controller", "eps = -1")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(with_line(kMinimalConfig, "plant", "theta = abc")), ConfigError);
}

TEST_CASE("initial profile presets") {
    SUBCASE("ramp endpoints") {
        std::string text = with_line(kMinimalConfig, "initial", "x0_kind = ramp");
        text = with_line(text, "initial", "x0_from = -1.0");
        text = with_line(text, "initial", "x0_to = 3.0");
        const ScenarioConfig cfg = parse_config(text);
        const HistoryWindow x0 = build_x0(cfg);
        CHECK(x0.front() == doctest::Approx(-1.0));
        CHECK(x0.back() == doctest::Approx(3.0));
    }
    SUBCASE("spike preset scales with eps and sharpness") {
        std::string text = with_line(kMinimalConfig, "initial", "x0_kind = spike");
        text = with_line(text, "initial", "x0_n = 4");
        const ScenarioConfig cfg = parse_config(text);
        const HistoryWindow x0 = build_x0(cfg);
        CHECK(x0.back() == doctest::Approx(cfg.controller.eps));
        CHECK(x0.front() == 0.0);
        // zero until -r/5
        CHECK(x0[cfg.intervals / 5 * 4 - 1] == 0.0);
    }
    SUBCASE("sample table size is validated") {
        const std::string text =
            with_line(kMinimalConfig, "initial", "x0_kind = samples\nx0_samples = 1, 2, 3");
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }
}

TEST_CASE("zero scenario: all-zero trace, every check passes, CSV round-trips") {
    std::string text = with_line(kMinimalConfig, "initial", "x0_value = 0.0");
    const ScenarioConfig cfg = parse_config(text);
    const ScenarioResult res = run_scenario(cfg);
    CHECK(res.all_passed);
    for (const TraceRow& row : res.trace.rows) {
        CHECK(row.x == 0.0);
        CHECK(row.u == 0.0);
        CHECK(row.p == 0.0);
    }

    const auto path = temp_file("dacsim_zero_trace.csv", "");
    write_trace_csv(res.trace, path.string());
    const auto rows = read_trace_rows(path.string());
    REQUIRE(rows.size() == res.trace.rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(std::memcmp(&rows[i], &res.trace.rows[i], sizeof(TraceRow)) == 0);
    }
}

TEST_CASE("CSV serialization is bit-exact for a decaying run") {
    std::string text = with_line(kMinimalConfig, "simulation", "seed = 9");
    text = with_line(text, "initial", "x0_value = 1.0");
    text += "\n[disturbance]\nkind = uniform_noise\namplitude = 0.25\n";
    const ScenarioConfig cfg = parse_config(text);
    const ScenarioResult res = run_scenario(cfg);
    const auto path = temp_file("dacsim_noisy_trace.csv", "");
    write_trace_csv(res.trace, path.string());
    const auto rows = read_trace_rows(path.string());
    REQUIRE(rows.size() == res.trace.rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(std::memcmp(&rows[i], &res.trace.rows[i], sizeof(TraceRow)) == 0);
    }

    SUBCASE("reconstruction recovers the update log and passes the checks") {
        const SimulationTrace rebuilt = reconstruct_trace(rows, cfg);
        REQUIRE(rebuilt.update_log.size() == res.trace.update_log.size());
        for (size_t i = 0; i < rebuilt.update_log.size(); ++i) {
            CHECK(rebuilt.update_log[i].updated == res.trace.update_log[i].updated);
            CHECK(rebuilt.update_log[i].best_time == res.trace.update_log[i].best_time);
        }
        const auto reports = run_trace_checks(rebuilt);
        for (const BoundReport& rep : reports) CHECK(rep.pass);
    }
}

TEST_CASE("single-value sweep equals the plain run") {
    std::string text = with_line(kMinimalConfig, "initial", "x0_value = 1.0");
    const ScenarioConfig cfg = parse_config(text);
    const auto rows = sweep(cfg, "theta", {1.0});
    REQUIRE(rows.size() == 1);
    const ScenarioResult res = run_scenario(cfg);
    CHECK(rows[0].final_abs_x == std::abs(res.trace.rows.back().x));
    CHECK(rows[0].all_passed == res.all_passed);
}

TEST_CASE("sigma sweep exposes the learning/robustness trade-off") {
    std::string text = with_line(kMinimalConfig, "initial", "x0_value = 1.0");
    text += "\n[disturbance]\nkind = uniform_noise\namplitude = 0.1\n";
    const ScenarioConfig cfg = parse_config(text);
    const auto rows = sweep(cfg, "sigma", {0.05, 0.5, 5.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].identifier_bound == doctest::Approx(2.0));
    CHECK(rows[1].identifier_bound == doctest::Approx(0.2));
    CHECK(rows[2].identifier_bound == doctest::Approx(0.02));
}

TEST_CASE("c sweep reports the assignable asymptotic gain") {
    std::string text = with_line(kMinimalConfig, "initial", "x0_value = 1.0");
    const ScenarioConfig cfg = parse_config(text);
    const auto rows = sweep(cfg, "c", {0.5, 1.0, 2.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].asymptotic_gain == doctest::Approx(1.68).epsilon(5e-3));
    CHECK(rows[1].asymptotic_gain == doctest::Approx(0.841).epsilon(5e-3));
    CHECK(rows[2].asymptotic_gain == doctest::Approx(0.420).epsilon(5e-3));
}

TEST_CASE("unsweepable axis is named") {
    const ScenarioConfig cfg = parse_config(kMinimalConfig);
    CHECK_THROWS_AS(sweep(cfg, "blowup_limit", {1.0}), ConfigError);
    CHECK_THROWS_AS(sweep(cfg, "d_amplitude", {1.0}), ConfigError);  // zero kind
}

TEST_CASE("convergence study") {
    SUBCASE("zero scenario reports exact") {
        std::string text(kMinimalConfig);
        const ScenarioConfig cfg = parse_config(text);
        const ConvergenceResult res = convergence_study(cfg, 2);
        CHECK(res.exact);
        for (const ConvergenceRow& row : res.rows) CHECK(row.identity_residual == 0.0);
    }
    SUBCASE("smooth scenario observes second order") {
        std::string text = with_line(kMinimalConfig, "initial", "x0_value = 1.0");
        const auto pos = text.find("t_final = 1");
        text.replace(pos, std::strlen("t_final = 1"), "t_final = 2");
        const ScenarioConfig cfg = parse_config(text);
        const ConvergenceResult res = convergence_study(cfg, 2);
        CHECK_FALSE(res.exact);
        CHECK(res.observed_order >= 1.9);
    }
    SUBCASE("piecewise-constant noise still observes at least first order") {
        std::string text = with_line(kMinimalConfig, "initial", "x0_value = 1.0");
        const auto pos = text.find("t_final = 1");
        text.replace(pos, std::strlen("t_final = 1"), "t_final = 2");
        text += "\n[disturbance]\nkind = uniform_noise\namplitude = 1.0\n";
        const ScenarioConfig cfg = parse_config(text);
        const ConvergenceResult res = convergence_study(cfg, 2);
        CHECK(res.observed_order >= 0.9);
    }
    SUBCASE("halvings below two are rejected") {
        const ScenarioConfig cfg = parse_config(kMinimalConfig);
        CHECK_THROWS_AS(convergence_study(cfg, 1), ConfigError);
    }
}

TEST_CASE("report lines and JSON") {
    std::string text = with_line(kMinimalConfig, "initial", "x0_value = 1.0");
    const ScenarioConfig cfg = parse_config(text);
    const ScenarioResult res = run_scenario(cfg);
    for (const BoundReport& rep : res.reports) {
        const std::string line = report_line(rep);
        CHECK(line.find(rep.pass ? "[PASS]" : "[FAIL]") == 0);
        CHECK(line.find(rep.name) != std::string::npos);
    }
    const std::string json = reports_to_json(res.reports);
    CHECK(json.find("\"name\"") != std::string::npos);
    CHECK(json.find("worst_margin") != std::string::npos);
}
