// Measures the discretization-error scales behind the additive check
// tolerances and regenerates data/tolerance_calibration.json.
//
// Procedure: run the reference scenario (theta=1, c=1, r=1, eps=0.1,
// sigma=0.05, x0=1, u0=0, d=0) at h and h/2 and record the identity
// residual, the trajectory differences on the common grid and the
// post-settling estimator error; repeat with unit-amplitude
// piecewise-constant noise held fixed on the base grid. The frozen (a, b)
// pairs in CheckTolerances::calibrated() are these raw slopes times a
// safety factor of eight.
#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "dacsim/scenario.hpp"

using namespace dacsim;

namespace {

struct Measurement {
    double identity_residual = 0.0;
    double x_diff = 0.0;   // max |x_h - x_{h/2}| on the common grid
    double u_diff = 0.0;
    double xsq_diff = 0.0;
    double theta_err = 0.0;  // max |theta_hat - theta| for t >= 2r
};

ScenarioConfig reference_config(double h) {
    ScenarioConfig cfg;
    cfg.plant.theta = 1.0;
    cfg.controller.eps = 0.1;
    cfg.controller.c = 1.0;
    cfg.controller.r = 1.0;
    cfg.controller.sigma = 0.05;
    cfg.x0.kind = InitialSpec::Kind::constant;
    cfg.x0.value = 1.0;
    cfg.u0.kind = InitialSpec::Kind::constant;
    cfg.u0.value = 0.0;
    cfg.theta_hat0 = 0.0;
    cfg.h = h;
    cfg.h_explicit = true;
    cfg.t_final = 10.0;
    cfg.finalize();
    return cfg;
}

Measurement measure(ScenarioConfig coarse) {
    ScenarioConfig fine = coarse;
    fine.h = coarse.h / 2.0;
    fine.finalize();

    const ScenarioResult rc = run_scenario(coarse);
    const ScenarioResult rf = run_scenario(fine);

    Measurement m;
    m.identity_residual = rc.reports.front().constants.at("worst_residual");
    for (long j = 0; j <= rc.trace.steps(); ++j) {
        const TraceRow& a = rc.trace.rows[static_cast<size_t>(j)];
        const TraceRow& b = rf.trace.rows[static_cast<size_t>(2 * j)];
        m.x_diff = std::max(m.x_diff, std::abs(a.x - b.x));
        m.u_diff = std::max(m.u_diff, std::abs(a.u - b.u));
        m.xsq_diff = std::max(m.xsq_diff, std::abs(a.x * a.x - b.x * b.x));
        if (a.t >= 2.0 * coarse.controller.r) {
            m.theta_err = std::max(m.theta_err, std::abs(a.theta_hat - coarse.plant.theta));
        }
    }
    return m;
}

}  // namespace

int main() {
    const double h = 1e-3;
    ScenarioConfig smooth = reference_config(h);
    ScenarioConfig rough = reference_config(h);
    rough.disturbance.kind = "uniform_noise";
    rough.disturbance.amplitude = 1.0;
    // Cells pinned at 4h: both resolutions resolve every jump (cells equal
    // to the step leave nothing between samples to disagree about).
    rough.disturbance.cell_width = 4.0 * h;
    rough.seed = 1;
    rough.finalize();

    const Measurement ms = measure(smooth);
    const Measurement mr = measure(rough);

    // The identity residual grows with |theta| and c, so its constants are
    // calibrated over the whole verification grid rather than the reference
    // scenario alone.
    double identity_smooth_env = 0.0;
    double identity_rough_env = 0.0;
    for (double theta : {-2.0, 0.0, 1.0, 3.0}) {
        for (double c : {1.0, 2.0}) {
            for (double d_sup : {0.0, 0.1, 1.0, 10.0}) {
                for (std::uint64_t seed = 0; seed < 5; ++seed) {
                    ScenarioConfig cfg = reference_config(h);
                    cfg.plant.theta = theta;
                    cfg.controller.c = c;
                    if (d_sup > 0.0) {
                        cfg.disturbance.kind = "uniform_noise";
                        cfg.disturbance.amplitude = d_sup;
                        cfg.seed = seed;
                    }
                    cfg.finalize();
                    const ScenarioResult res = run_scenario(cfg);
                    const double r = res.reports.front().constants.at("worst_residual");
                    if (d_sup == 0.0) {
                        identity_smooth_env = std::max(identity_smooth_env, r);
                    } else {
                        identity_rough_env = std::max(identity_rough_env, r / (h * d_sup));
                    }
                    if (d_sup == 0.0) break;  // seeds only matter with noise
                }
            }
        }
    }

    const double h2 = h * h;
    const auto slope_a = [&](double v) { return v / h2; };
    const auto slope_b = [&](double rough_v, double a_raw) {
        return std::max(0.0, rough_v - a_raw * h2) / h;  // per unit d_sup (amplitude 1)
    };
    const double a_identity_env = identity_smooth_env / h2;
    const double b_identity_env = identity_rough_env / h;

    nlohmann::json j;
    j["procedure"] =
        "reference scenario theta=1 c=1 r=1 eps=0.1 sigma=0.05 x0=1 u0=0 at h=1e-3 vs h/2; "
        "rough variant adds unit uniform noise on cells of 4h (resolved-jump regime); "
        "a = smooth value / h^2, b = (rough value - a h^2) / h; frozen constants are 8x these";
    j["h"] = h;
    j["smooth"] = {{"identity_residual", ms.identity_residual},
                   {"x_diff", ms.x_diff},
                   {"u_diff", ms.u_diff},
                   {"xsq_diff", ms.xsq_diff},
                   {"theta_err", ms.theta_err}};
    j["rough"] = {{"identity_residual", mr.identity_residual},
                  {"x_diff", mr.x_diff},
                  {"u_diff", mr.u_diff},
                  {"xsq_diff", mr.xsq_diff},
                  {"theta_err", mr.theta_err}};

    const double a_identity = slope_a(ms.identity_residual);
    const double a_state = slope_a(ms.x_diff);
    const double a_input = slope_a(ms.u_diff + 10.0 * ms.x_diff);
    const double a_lyapunov = slope_a(2.0 * ms.xsq_diff);
    const double a_identifier = slope_a(ms.theta_err);
    j["raw_a"] = {{"identity", a_identity},
                  {"identity_grid_envelope", a_identity_env},
                  {"state", a_state},
                  {"input", a_input},
                  {"lyapunov", a_lyapunov},
                  {"identifier", a_identifier}};
    j["raw_b"] = {{"identity", slope_b(mr.identity_residual, a_identity)},
                  {"identity_grid_envelope", b_identity_env},
                  {"state", slope_b(mr.x_diff, a_state)},
                  {"input", slope_b(mr.u_diff + 10.0 * mr.x_diff, a_input)},
                  {"lyapunov", slope_b(2.0 * mr.xsq_diff, a_lyapunov)},
                  {"identifier", slope_b(mr.theta_err, a_identifier)}};

    const CheckTolerances frozen = CheckTolerances::calibrated();
    j["frozen"] = {{"identity_a", frozen.identity_a}, {"identity_b", frozen.identity_b},
                   {"state_a", frozen.state_a},       {"state_b", frozen.state_b},
                   {"input_a", frozen.input_a},       {"input_b", frozen.input_b},
                   {"lyapunov_a", frozen.lyapunov_a}, {"lyapunov_b", frozen.lyapunov_b}};
    j["notes"] = {
        "identity constants are frozen from the grid envelope (theta x c x d_sup x seeds), "
        "not the reference scenario alone, since the residual grows with |theta| and c",
        "raw_b.identifier mixes in maximizer jitter between resolutions and is not frozen; "
        "the estimator tolerance is derived from the identity margin divided by 2 sigma^2",
        "raw_a/raw_b for state, input and lyapunov match the cell=h regime within a few "
        "percent (see tools/calibrate.cpp)"};

    std::ofstream out("data/tolerance_calibration.json");
    out << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
}
