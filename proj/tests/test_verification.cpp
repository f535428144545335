#include <cmath>
#include <doctest.h>
#include <fstream>

#include <json.hpp>

#include "dacsim/trace_io.hpp"
#include "dacsim/verification.hpp"
#include "support/generators.hpp"

using namespace dacsim;
using dacsim::testing::Rng;

namespace {

ControllerConfig make_controller(double eps, double c, double r, double sigma) {
    ControllerConfig cfg;
    cfg.eps = eps;
    cfg.c = c;
    cfg.r = r;
    cfg.sigma = sigma;
    cfg.omega = ControllerConfig::default_omega(c, r);
    return cfg;
}

SimulationTrace short_run(double theta, double eps, double d_amp, std::uint64_t seed,
                          double x0_value, double t_final, double h = 1e-3) {
    const ControllerConfig cfg = make_controller(eps, 1.0, 1.0, 0.05);
    const int n = static_cast<int>(std::lround(1.0 / h));
    const HistoryWindow x0 = HistoryWindow::constant(x0_value, h, n);
    const std::vector<double> u0(static_cast<size_t>(n), 0.0);
    const DisturbanceSpec d =
        d_amp == 0.0 ? DisturbanceSpec::zero() : DisturbanceSpec::uniform_noise(d_amp, seed, h);
    return run({theta}, cfg, d, x0, u0, 0.0, t_final);
}

// hand-built trace: constant state level, zero control/disturbance
SimulationTrace synthetic_flat_trace(double level, double eps, double t_final, double h) {
    SimulationTrace tr;
    tr.config = make_controller(eps, 1.0, 1.0, 1e9);
    tr.plant = {0.0};
    tr.disturbance = DisturbanceSpec::zero();
    tr.h = h;
    tr.intervals = static_cast<int>(std::lround(1.0 / h));
    tr.x0_samples.assign(static_cast<size_t>(tr.intervals) + 1, level);
    tr.u0_samples.assign(static_cast<size_t>(tr.intervals) + 1, 0.0);
    tr.virtual_d.assign(static_cast<size_t>(tr.intervals), -tr.plant.theta * level);
    const long steps = std::lround(t_final / h);
    for (long j = 0; j <= steps; ++j) {
        tr.rows.push_back({j * h, level, 0.0, 0.0, 0.0, 0.0});
    }
    return tr;
}

}  // namespace

TEST_CASE("transient amplification constant") {
    const ControllerConfig c1 = make_controller(1.0, 1.0, 1.0, 1.0);
    CHECK(constant_M({0.0}, c1) == 1.0);
    CHECK(constant_M({3.0}, c1) ==
          doctest::Approx(std::exp(3.0 + std::sqrt(2.0) / 2.0 - 2.0)).epsilon(1e-13));
    const ControllerConfig c2 = make_controller(1.0, 1.0, 2.0, 1.0);
    CHECK(constant_M({-5.0}, c2) == 1.0);
}

TEST_CASE("input-floor scale constant") {
    const ControllerConfig c1 = make_controller(1.0, 1.0, 1.0, 1.0);
    CHECK(constant_rho({0.0}, c1) == doctest::Approx(4.0 + 1.0 / (2.0 * std::sqrt(2.0))));
    CHECK(constant_rho({1.0}, c1) == doctest::Approx(6.0 + 1.0 / (2.0 * std::sqrt(2.0))));
    const ControllerConfig c3 = make_controller(1.0, 3.7, 1.0, 1.0);
    CHECK(constant_rho({0.0}, c3) - 4.0 * 3.7 - 1.0 / (2.0 * std::sqrt(2.0)) ==
          doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("Lipschitz constants of the gain functional") {
    const ControllerConfig cfg = make_controller(1.0, 1.0, 1.0, 1.0);
    CHECK(lipschitz_h(1.0, cfg) == doctest::Approx(19.0));
    CHECK(lipschitz_l(1.0, cfg) == doctest::Approx(11704.0));
}

TEST_CASE("state bound holds on simulated scenarios") {
    SUBCASE("zero scenario passes with margin eps") {
        const SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 0.0, 2.0, 1e-2);
        const BoundReport rep = check_state_bound(tr);
        CHECK(rep.pass);
        CHECK(rep.worst_margin == doctest::Approx(0.1));
    }
    SUBCASE("canonical-style decay run") {
        const SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 1.0, 4.0);
        const BoundReport rep = check_state_bound(tr);
        CHECK(rep.pass);
        CHECK(rep.constants.at("M") == 1.0);  // (1 + sqrt(2)/2 - 2)^+ = 0
    }
    SUBCASE("asymptote constant reflects the assignable gain") {
        const SimulationTrace tr = short_run(1.0, 0.1, 1.0, 3, 1.0, 2.0, 1e-2);
        const BoundReport rep = check_state_bound(tr);
        CHECK(rep.constants.at("asymptote") ==
              doctest::Approx(0.1 + std::pow(2.0, -0.25)).epsilon(1e-12));
    }
}

TEST_CASE("input bound holds and reports the eps*rho floor") {
    const SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 1.0, 4.0);
    const BoundReport rep = check_input_bound(tr);
    CHECK(rep.pass);
    const double rho = constant_rho({1.0}, tr.config);
    CHECK(rep.constants.at("eps_rho") == doctest::Approx(0.1 * rho));
    CHECK(rep.constants.at("K") == doctest::Approx(16.0 / 0.1 * std::sqrt(2.0) * 4.0 * 4.0));
    // settled d=0 run: |u| over the last window sits below the floor
    CHECK(rep.constants.at("final_window_max_abs_u") <= rep.constants.at("eps_rho"));
}

TEST_CASE("input bound requires the decay-rate constraint") {
    SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 0.0, 1.0, 1e-2);
    tr.config.omega = 0.9;  // exp(0.9) > 2
    CHECK_THROWS_AS(check_input_bound(tr), ConfigError);
}

TEST_CASE("integral identity residual on an open-loop exponential") {
    // x = e^t, u = 0, d = 0: both sides of the window identity equal e^2 - 1
    // at t = 1 and the discrete residual is O(h^2)
    const double h = 1e-3;
    const int n = 1000;
    SimulationTrace tr;
    tr.config = make_controller(1.0, 1.0, 1.0, 1e9);
    tr.plant = {1.0};
    tr.disturbance = DisturbanceSpec::zero();
    tr.h = h;
    tr.intervals = n;
    for (int j = 0; j <= n; ++j) {
        tr.x0_samples.push_back(std::exp((j - n) * h));
        tr.u0_samples.push_back(0.0);
    }
    for (int j = 0; j < n; ++j) tr.virtual_d.push_back(0.0);  // not used for t >= r
    for (int j = 0; j <= n; ++j) {
        tr.rows.push_back({j * h, std::exp(j * h), 0.0, 0.0, 0.0, 0.0});
    }
    // scale of this trajectory (x up to e) exceeds the calibration scenario;
    // widen the quadratic coefficient accordingly
    CheckTolerances tols = CheckTolerances::calibrated();
    tols.identity_a = 8.0;
    const BoundReport rep = check_identity(tr, tols);
    CHECK(rep.pass);
    CHECK(rep.constants.at("worst_residual") <= 1e-5);

    // the two sides themselves, evaluated discretely at t = 1
    std::vector<double> v;
    for (int j = 0; j <= n; ++j) v.push_back(std::exp(j * h));
    const HistoryWindow xw(std::move(v), h, 1.0);
    const double lhs = std::exp(2.0) - 1.0;
    CHECK(xw.back() * xw.back() - xw.front() * xw.front() == doctest::Approx(lhs).epsilon(1e-12));
    CHECK(2.0 * l2_norm_sq(xw) == doctest::Approx(lhs).epsilon(1e-5));
}

TEST_CASE("identifier bound check locates the certified time") {
    SUBCASE("canonical run certifies from the second boundary") {
        const SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 1.0, 4.0);
        const BoundReport rep = check_identifier_bound(tr);
        CHECK(rep.pass);
        CHECK_FALSE(rep.vacuous);
        CHECK(rep.constants.at("T") == doctest::Approx(2.0));
        CHECK(rep.constants.at("T_first_excited_boundary") == doctest::Approx(1.0));
    }
    SUBCASE("never-excited run reports vacuously and the estimate stays put") {
        SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 1.0, 2.0, 1e-2);
        for (TraceRow& row : tr.rows) row.theta_hat = 0.25;  // pretend theta_hat0 = 0.25
        tr.config.sigma = 1e9;
        const BoundReport rep = check_identifier_bound(tr);
        CHECK(rep.pass);
        CHECK(rep.vacuous);
    }
    SUBCASE("disabled identifier reports vacuously") {
        SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 1.0, 2.0, 1e-2);
        tr.identifier_enabled = false;
        CHECK(check_identifier_bound(tr).vacuous);
    }
}

TEST_CASE("Lyapunov decay bound") {
    SUBCASE("state inside the residual set passes trivially") {
        const SimulationTrace tr = short_run(1.0, 0.1, 0.0, 0, 0.0, 2.0, 1e-2);
        CHECK(check_lyapunov_decay(tr).pass);
    }
    SUBCASE("a state held above eps violates the decay") {
        const SimulationTrace tr = synthetic_flat_trace(0.2, 0.1, 3.0, 1e-3);
        const BoundReport rep = check_lyapunov_decay(tr);
        CHECK_FALSE(rep.pass);
        CHECK(rep.worst_margin < 0.0);
        // bound at t = r equals the initial excess exactly
        CHECK(rep.constants.at("value_at_r") == doctest::Approx(0.04 - 0.01));
    }
    SUBCASE("disturbance floor constant") {
        const SimulationTrace tr = short_run(1.0, 0.1, 1.0, 5, 1.0, 2.0, 1e-2);
        const BoundReport rep = check_lyapunov_decay(tr);
        CHECK(rep.constants.at("disturbance_floor") ==
              doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(rep.pass);
    }
}

TEST_CASE("denominator floors with discrete norms") {
    const ControllerConfig cfg = make_controller(1.0, 1.0, 1.0, 1.0);
    SUBCASE("zero window") {
        const BoundReport rep =
            denominator_floor_check(HistoryWindow::constant(0.0, 1e-2, 100), cfg);
        CHECK(rep.pass);
        CHECK(rep.constants.at("lhs") == doctest::Approx(1.0));
        CHECK(rep.constants.at("floor_sup") == doctest::Approx(0.125));
    }
    SUBCASE("window pinned at eps") {
        const BoundReport rep =
            denominator_floor_check(HistoryWindow::constant(1.0, 1e-2, 100), cfg);
        CHECK(rep.pass);
        CHECK(rep.constants.at("floor_sup") == doctest::Approx(1.0 / 8.0));
    }
    SUBCASE("sharpened ramp") {
        const BoundReport rep =
            denominator_floor_check(testing::spike_window(1, 1.0, 1.0, 1000), cfg);
        CHECK(rep.pass);
        CHECK(rep.constants.at("lhs") == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
        CHECK(rep.constants.at("floor_sup") ==
              doctest::Approx(1.0 / (8.0 * (2.0 * std::sqrt(2.0) + 1.0))));
    }
    SUBCASE("random piecewise-linear windows never violate") {
        Rng rng(99);
        for (double eps : {0.1, 1.0, 10.0}) {
            const ControllerConfig c = make_controller(eps, 1.0, 1.0, 1.0);
            for (int trial = 0; trial < 512; ++trial) {
                const int n = rng.uniform_int(4, 128);
                const HistoryWindow w = testing::random_piecewise_linear(
                    rng, 1.0, n, std::abs(rng.signed_log_uniform(1e-3, 1e3)),
                    std::abs(rng.signed_log_uniform(1e-3, 1e3)));
                CHECK(denominator_floor_check(w, c).pass);
            }
        }
    }
}

TEST_CASE("gain Lipschitz check") {
    const ControllerConfig cfg = make_controller(1.0, 1.0, 1.0, 1.0);
    const HistoryWindow x = HistoryWindow::constant(0.5, 1e-2, 100);
    const HistoryWindow u = HistoryWindow::constant(0.3, 1e-2, 100);
    SUBCASE("identical pairs have zero distance") {
        const BoundReport rep = gain_lipschitz_check(x, u, x, u, 1.0, cfg);
        CHECK(rep.pass);
        CHECK(rep.worst_margin >= 0.0);
        CHECK(rep.constants.at("H") == doctest::Approx(19.0));
        CHECK(rep.constants.at("L") == doctest::Approx(11704.0));
    }
    SUBCASE("norm precondition is enforced") {
        const HistoryWindow big = HistoryWindow::constant(5.0, 1e-2, 100);
        CHECK_THROWS_AS(gain_lipschitz_check(big, u, x, u, 1.0, cfg), PreconditionError);
    }
}

TEST_CASE("trajectory continuity in the initial data") {
    const ControllerConfig cfg = make_controller(1.0, 1.0, 1.0, 0.05);
    const int n = 1000;
    const std::vector<double> u0(static_cast<size_t>(n), 0.0);
    const HistoryWindow base = HistoryWindow::constant(0.02, 1e-3, n);
    const SimulationTrace ta = run({1.0}, cfg, DisturbanceSpec::zero(), base, u0, 0.0, 1.0);

    SUBCASE("identical initial data stays identical") {
        const SimulationTrace tb = run({1.0}, cfg, DisturbanceSpec::zero(), base, u0, 0.0, 1.0);
        const BoundReport rep = initial_condition_continuity_check(ta, tb, 1.0);
        CHECK(rep.pass);
        CHECK(rep.constants.at("max_distance") == 0.0);
    }
    SUBCASE("perturbed initial data stays within the factor") {
        const HistoryWindow pert = HistoryWindow::constant(0.02 + 1e-6, 1e-3, n);
        const SimulationTrace tb = run({1.0}, cfg, DisturbanceSpec::zero(), pert, u0, 0.0, 1.0);
        const BoundReport rep = initial_condition_continuity_check(ta, tb, 1.0);
        CHECK(rep.pass);
        CHECK(std::isfinite(rep.constants.at("Q")));
        CHECK(rep.constants.at("initial_distance") > 0.0);
        CHECK(rep.constants.at("amplification") <= rep.constants.at("Q"));
    }
    SUBCASE("the factor grows with the horizon") {
        CHECK(continuity_log_factor(0.1, 2.0, {1.0}, cfg) >
              continuity_log_factor(0.1, 1.0, {1.0}, cfg));
    }
    SUBCASE("mismatched grids are rejected") {
        const HistoryWindow coarse = HistoryWindow::constant(0.02, 2e-3, 500);
        const std::vector<double> u0c(500, 0.0);
        const SimulationTrace tb =
            run({1.0}, cfg, DisturbanceSpec::zero(), coarse, u0c, 0.0, 1.0);
        CHECK_THROWS_AS(initial_condition_continuity_check(ta, tb, 1.0),
                        IncompatibleWindowsError);
    }
}

TEST_CASE("frozen tolerance constants match the committed calibration record") {
    std::ifstream in(std::string(DACSIM_SOURCE_DIR) + "/data/tolerance_calibration.json");
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    const CheckTolerances t = CheckTolerances::calibrated();
    CHECK(j["frozen"]["identity_a"].get<double>() == t.identity_a);
    CHECK(j["frozen"]["identity_b"].get<double>() == t.identity_b);
    CHECK(j["frozen"]["state_a"].get<double>() == t.state_a);
    CHECK(j["frozen"]["state_b"].get<double>() == t.state_b);
    CHECK(j["frozen"]["input_a"].get<double>() == t.input_a);
    CHECK(j["frozen"]["input_b"].get<double>() == t.input_b);
    CHECK(j["frozen"]["lyapunov_a"].get<double>() == t.lyapunov_a);
    CHECK(j["frozen"]["lyapunov_b"].get<double>() == t.lyapunov_b);
}
