#include <cmath>
#include <doctest.h>

#include "dacsim/control_law.hpp"
#include "dacsim/verification.hpp"
#include "support/generators.hpp"

using namespace dacsim;
using dacsim::testing::Rng;

namespace {

ControllerConfig unit_config(double eps = 1.0) {
    ControllerConfig cfg;
    cfg.eps = eps;
    cfg.c = 1.0;
    cfg.r = 1.0;
    cfg.sigma = 0.05;
    cfg.omega = ControllerConfig::default_omega(cfg.c, cfg.r);
    return cfg;
}

}  // namespace

TEST_CASE("controller config validation names the violated constraint") {
    ControllerConfig cfg = unit_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.omega = 1.0;  // exp(1) >= 2
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         "controller omega must satisfy exp(omega*r) < 2", ConfigError);
    cfg = unit_config();
    cfg.eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = unit_config();
    cfg.omega = 2.0 * cfg.c;  // above c but exp fine for small r? r=1 -> exp(2)>2 anyway
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("gain functional reference values") {
    const ControllerConfig cfg = unit_config();
    const int n = 1000;
    const double h = 1e-3;
    const HistoryWindow zero = HistoryWindow::constant(0.0, h, n);

    SUBCASE("constant window") {
        const HistoryWindow x = HistoryWindow::constant(1.0, h, n);
        CHECK(p_functional(x, zero, cfg) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("sharpened ramp reaches large gain values") {
        const HistoryWindow x1 = testing::spike_window(1, 1.0, 1.0, n);
        CHECK(p_functional(x1, zero, cfg) == doctest::Approx(6.0).epsilon(2e-5));
    }
    SUBCASE("zero state gives zero gain") {
        CHECK(p_functional(zero, zero, cfg) == 0.0);
    }
}

TEST_CASE("raw estimate reference values") {
    const int n = 1000;
    const double h = 1e-3;
    const HistoryWindow zero = HistoryWindow::constant(0.0, h, n);

    SUBCASE("constant state estimates zero") {
        const HistoryWindow x = HistoryWindow::constant(3.0, h, n);
        CHECK(q_functional(x, zero) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("open-loop exponential recovers the rate") {
        std::vector<double> s(static_cast<size_t>(n) + 1);
        for (int j = 0; j <= n; ++j) s[static_cast<size_t>(j)] = std::exp((j - n) * h);
        const HistoryWindow x(std::move(s), h, 0.0);
        CHECK(q_functional(x, zero) == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("zero state is rejected") {
        CHECK_THROWS_AS(q_functional(zero, zero), ZeroExcitationError);
    }
}

TEST_CASE("feedback reference values") {
    const ControllerConfig cfg = unit_config();
    const int n = 1000;
    const double h = 1e-3;
    const HistoryWindow zero = HistoryWindow::constant(0.0, h, n);
    const HistoryWindow one = HistoryWindow::constant(1.0, h, n);
    CHECK(feedback(one, zero, cfg) == doctest::Approx(-2.5).epsilon(1e-12));
    CHECK(feedback(zero, zero, cfg) == 0.0);
    const HistoryWindow x1 = testing::spike_window(1, 1.0, 1.0, n);
    CHECK(feedback(x1, zero, cfg) == doctest::Approx(-8.0).epsilon(2e-5));
}

TEST_CASE("gain is nonnegative and the control damps the state") {
    Rng rng(11);
    for (int trial = 0; trial < 512; ++trial) {
        ControllerConfig cfg = unit_config();
        cfg.eps = std::abs(rng.signed_log_uniform(0.1, 10.0));
        cfg.c = std::abs(rng.signed_log_uniform(0.2, 5.0));
        const int n = rng.uniform_int(4, 64);
        const HistoryWindow x = testing::random_piecewise_linear(
            rng, 1.0, n, std::abs(rng.signed_log_uniform(1e-2, 1e3)),
            std::abs(rng.signed_log_uniform(1e-2, 1e3)));
        const HistoryWindow u = testing::random_piecewise_linear(
            rng, 1.0, n, std::abs(rng.signed_log_uniform(1e-2, 1e3)),
            std::abs(rng.signed_log_uniform(1e-2, 1e3)));
        const double p = p_functional(x, u, cfg);
        CHECK(p >= 0.0);
        const double fb = feedback(x, u, cfg);
        const double xv = x.back();
        const double damping = -2.0 * cfg.c * xv * xv;
        CHECK(xv * fb <= damping + 1e-12 * std::abs(damping) + 1e-300);
    }
}

TEST_CASE("gain denominator floor guards only against underflow") {
    ControllerConfig cfg = unit_config(1e-160);
    std::vector<double> s{0.0, 0.0, 1e-200};
    const HistoryWindow x(std::move(s), 0.5, 0.0);
    const HistoryWindow u = HistoryWindow::constant(0.0, 0.5, 2);
    CHECK_THROWS_AS(p_functional(x, u, cfg), DegenerateWindowError);
}

TEST_CASE("gain functional obeys its Lipschitz bound on random pairs") {
    Rng rng(23);
    const ControllerConfig cfg = unit_config();
    for (double R : {0.5, 1.0, 5.0}) {
        for (int trial = 0; trial < 512; ++trial) {
            const int n = rng.uniform_int(4, 64);
            const HistoryWindow x = testing::random_x_within(rng, 1.0, n, R);
            const HistoryWindow u = testing::random_u_within(rng, 1.0, n, R);
            const HistoryWindow y = testing::random_x_within(rng, 1.0, n, R);
            const HistoryWindow w = testing::random_u_within(rng, 1.0, n, R);
            const BoundReport rep = gain_lipschitz_check(x, u, y, w, R, cfg);
            CHECK(rep.pass);
        }
    }
}
