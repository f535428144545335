#include "dacsim/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dacsim {

namespace {

// splitmix64; one output per (seed, cell), so values do not depend on
// evaluation order and sweeps stay reproducible under concurrency.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double cell_value(std::uint64_t seed, std::int64_t cell, double amplitude) {
    const std::uint64_t bits = mix64(seed ^ mix64(static_cast<std::uint64_t>(cell) + 0x51ed2701ULL));
    const double u01 = static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
    return amplitude * (2.0 * u01 - 1.0);
}

std::int64_t cell_index(double t, double width) {
    return static_cast<std::int64_t>(std::floor(t / width + 1e-9));
}

}  // namespace

DisturbanceSpec DisturbanceSpec::zero() { return {}; }

DisturbanceSpec DisturbanceSpec::constant(double value) {
    DisturbanceSpec s;
    s.kind = Kind::constant;
    s.amplitude = value;
    s.d_sup = std::abs(value);
    return s;
}

DisturbanceSpec DisturbanceSpec::sinusoid(double amplitude, double frequency, double phase) {
    DisturbanceSpec s;
    s.kind = Kind::sinusoid;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.phase = phase;
    s.d_sup = std::abs(amplitude);
    return s;
}

DisturbanceSpec DisturbanceSpec::uniform_noise(double amplitude, std::uint64_t seed,
                                               double cell_width) {
    if (!(cell_width > 0.0)) {
        throw RejectedInputError("uniform_noise cell width must be positive");
    }
    DisturbanceSpec s;
    s.kind = Kind::uniform_noise;
    s.amplitude = amplitude;
    s.seed = seed;
    s.cell_width = cell_width;
    s.d_sup = std::abs(amplitude);
    return s;
}

DisturbanceSpec DisturbanceSpec::table(std::vector<double> values, double t0, double dt) {
    if (values.empty()) throw RejectedInputError("disturbance table must not be empty");
    if (!(dt > 0.0)) throw RejectedInputError("disturbance table dt must be positive");
    DisturbanceSpec s;
    s.kind = Kind::table;
    s.values = std::move(values);
    s.table_t0 = t0;
    s.table_dt = dt;
    for (double v : s.values) {
        if (!std::isfinite(v)) throw RejectedInputError("disturbance table values must be finite");
        s.d_sup = std::max(s.d_sup, std::abs(v));
    }
    return s;
}

double disturbance_eval(const DisturbanceSpec& spec, double t) {
    switch (spec.kind) {
        case DisturbanceSpec::Kind::zero:
            return 0.0;
        case DisturbanceSpec::Kind::constant:
            return spec.amplitude;
        case DisturbanceSpec::Kind::sinusoid:
            return spec.amplitude *
                   std::sin(2.0 * M_PI * spec.frequency * t + spec.phase);
        case DisturbanceSpec::Kind::uniform_noise:
            return cell_value(spec.seed, cell_index(t, spec.cell_width), spec.amplitude);
        case DisturbanceSpec::Kind::table: {
            const auto i = cell_index(t - spec.table_t0, spec.table_dt);
            if (i < 0 || i >= static_cast<std::int64_t>(spec.values.size())) {
                throw DisturbanceRangeError("disturbance table evaluated outside its range at t=" +
                                            std::to_string(t));
            }
            return spec.values[static_cast<size_t>(i)];
        }
    }
    return 0.0;
}

ClosedLoopState make_initial_state(const HistoryWindow& x0_profile,
                                   std::span<const double> u0_interior, double theta_hat0,
                                   const ControllerConfig& cfg, const PlantParams& plant) {
    cfg.validate();
    if (!std::isfinite(plant.theta)) throw RejectedInputError("plant theta must be finite");
    if (std::abs(x0_profile.t_end()) > 1e-9 * std::max(1.0, cfg.r)) {
        throw PreconditionError("initial x profile must end at t = 0");
    }
    const int n = x0_profile.intervals();
    if (static_cast<int>(u0_interior.size()) != n) {
        throw PreconditionError("u0 interior must supply exactly N samples on [-r, 0)");
    }
    for (double v : u0_interior) {
        if (!std::isfinite(v)) throw RejectedInputError("u0 interior samples must be finite");
    }

    std::vector<double> u_samples(u0_interior.begin(), u0_interior.end());
    u_samples.push_back(0.0);
    HistoryWindow uw(std::move(u_samples), x0_profile.step(), x0_profile.t_end());

    // u0(0) enters p only through the trailing trapezoid weight h/2, so the
    // map below contracts for any reasonable grid.
    double u = -2.0 * cfg.c * x0_profile.back();
    uw.set_back(u);
    double fu = feedback(x0_profile, uw, cfg);
    double resid = std::abs(fu - u);
    int iters = 0;
    while (resid > cfg.fp_tol && iters < cfg.fp_max_iter) {
        u = fu;
        uw.set_back(u);
        fu = feedback(x0_profile, uw, cfg);
        resid = std::abs(fu - u);
        ++iters;
    }
    if (!std::isfinite(fu)) {
        throw CompatibilityError("compatibility iteration diverged");
    }
    if (!(resid <= cfg.fp_tol)) {
        throw CompatibilityError("compatibility equation not solved within fp_max_iter (residual " +
                                 std::to_string(resid) + ")");
    }

    ClosedLoopState st{
        .t = 0.0,
        .step_index = 0,
        .xw = x0_profile,
        .uw = uw,
        .x_dot_last = 0.0,
        .identifier = Identifier(theta_hat0, cfg.r),
        .config = cfg,
        .plant = plant,
        .last_fp_iterations = iters,
        .last_fp_residual = resid,
    };
    st.x_dot_last = plant.theta * st.xw.back() + st.uw.back();
    return st;
}

ClosedLoopState step(ClosedLoopState st, const DisturbanceSpec& spec) {
    const ControllerConfig& cfg = st.config;
    const double h = st.xw.step();
    const double theta = st.plant.theta;
    const double x = st.xw.back();
    const double u = st.uw.back();
    if (std::abs(u) > cfg.blowup_limit) {
        throw BlowUpError("control magnitude exceeded blowup_limit at t=" + std::to_string(st.t),
                          st.t);
    }

    // Stage times come from the step index, not the accumulated clock, so
    // the disturbance samples here are bit-identical to the ones recorded
    // in the trace (a drifting clock can land on the wrong side of a
    // piecewise-constant cell boundary).
    const double t0 = static_cast<double>(st.step_index) * h;
    const double t1 = static_cast<double>(st.step_index + 1) * h;
    const double d0 = disturbance_eval(spec, t0);
    const double d1 = disturbance_eval(spec, t1);
    const double k1 = theta * x + u + d0;
    const double x_pred = x + h * k1;
    // Corrector value is affine in the unknown control at the new point:
    //   x+ = base + (h/2) u+.
    const double base = x + 0.5 * h * (k1 + theta * x_pred + d1);

    double u_next = u;
    st.xw.push_in_place(base + 0.5 * h * u_next);
    st.uw.push_in_place(u_next);

    double fu = feedback(st.xw, st.uw, cfg);
    double resid = std::abs(fu - u_next);
    int iters = 0;
    while (std::isfinite(fu) && resid > cfg.fp_tol && iters < cfg.fp_max_iter) {
        u_next = fu;
        st.xw.set_back(base + 0.5 * h * u_next);
        st.uw.set_back(u_next);
        fu = feedback(st.xw, st.uw, cfg);
        resid = std::abs(fu - u_next);
        ++iters;
    }
    st.step_index += 1;
    st.t = t1;
    if (!std::isfinite(fu) || !std::isfinite(st.xw.back())) {
        throw BlowUpError("state became non-finite at t=" + std::to_string(st.t), st.t);
    }
    if (!(resid <= cfg.fp_tol)) {
        throw StepFailureError("per-step fixed point did not converge at t=" +
                               std::to_string(st.t) + " (residual " + std::to_string(resid) + ")");
    }
    const double x_new = st.xw.back();
    const double u_new = st.uw.back();
    if (std::abs(u_new) > cfg.blowup_limit || std::abs(x_new) > cfg.blowup_limit) {
        throw BlowUpError("blow-up detected at t=" + std::to_string(st.t), st.t);
    }
    st.x_dot_last = theta * x_new + u_new + d1;
    st.last_fp_iterations = iters;
    st.last_fp_residual = resid;
    return st;
}

ClosedLoopState step_frozen_gain(ClosedLoopState st, double gain, const DisturbanceSpec& spec) {
    const double h = st.xw.step();
    const double lambda = st.plant.theta - 2.0 * st.config.c - gain;
    const double x = st.xw.back();
    const double t0 = static_cast<double>(st.step_index) * h;
    const double t1 = static_cast<double>(st.step_index + 1) * h;
    const double d0 = disturbance_eval(spec, t0);
    const double d1 = disturbance_eval(spec, t1);
    const double k1 = lambda * x + d0;
    const double x_pred = x + h * k1;
    const double k2 = lambda * x_pred + d1;
    const double x_new = x + 0.5 * h * (k1 + k2);
    st.xw.push_in_place(x_new);
    st.uw.push_in_place(-(2.0 * st.config.c + gain) * x_new);
    st.step_index += 1;
    st.t = t1;
    st.x_dot_last = lambda * x_new + d1;
    return st;
}

SimulationTrace run(const PlantParams& plant, const ControllerConfig& cfg,
                    const DisturbanceSpec& spec, const HistoryWindow& x0_profile,
                    std::span<const double> u0_interior, double theta_hat0, double t_final,
                    const RunOptions& options) {
    const double h = x0_profile.step();
    if (!(t_final >= 0.0)) throw GridError("t_final must be nonnegative");
    const long steps = std::lround(t_final / h);
    if (std::abs(steps * h - t_final) > 1e-9 * std::max(1.0, t_final)) {
        throw GridError("t_final must be a multiple of the grid step h");
    }
    const int n = x0_profile.intervals();

    ClosedLoopState st = make_initial_state(x0_profile, u0_interior, theta_hat0, cfg, plant);

    SimulationTrace trace;
    trace.config = cfg;
    trace.plant = plant;
    trace.disturbance = spec;
    trace.h = h;
    trace.intervals = n;
    trace.identifier_enabled = options.with_identifier;
    trace.x0_samples.assign(x0_profile.samples().begin(), x0_profile.samples().end());
    trace.u0_samples.assign(st.uw.samples().begin(), st.uw.samples().end());
    trace.init_fp_iterations = st.last_fp_iterations;
    trace.init_fp_residual = st.last_fp_residual;
    trace.rows.reserve(static_cast<size_t>(steps) + 1);

    // Disturbance implied on [-r, 0) by the initial profiles: x0' - theta x0 - u0.
    trace.virtual_d.resize(static_cast<size_t>(n));
    double dsup0 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double slope = (x0_profile[j + 1] - x0_profile[j]) / h;
        dsup0 = std::max(dsup0, std::abs(slope));
        trace.virtual_d[static_cast<size_t>(j)] =
            slope - plant.theta * x0_profile[j] - st.uw[j];
    }
    trace.x0_dot_sup = options.x0_dot_sup.value_or(dsup0);

    const auto record = [&](double t) {
        trace.rows.push_back({t, st.xw.back(), st.uw.back(), p_functional(st.xw, st.uw, cfg),
                              st.identifier.theta_hat(), disturbance_eval(spec, t)});
    };

    if (options.with_identifier) st.identifier.observe(0.0, st.xw, st.uw);
    record(0.0);

    for (long j = 1; j <= steps; ++j) {
        st = step(std::move(st), spec);
        const double t = static_cast<double>(j) * h;
        if (options.with_identifier) {
            st.identifier.observe(t, st.xw, st.uw);
            if (j % n == 0) {
                st.identifier.boundary_update(cfg);
                st.identifier.observe(t, st.xw, st.uw);  // seeds the next interval
            }
        }
        record(t);
        trace.fp_stats.total_iterations += st.last_fp_iterations;
        trace.fp_stats.max_iterations = std::max(trace.fp_stats.max_iterations, st.last_fp_iterations);
        trace.fp_stats.max_residual = std::max(trace.fp_stats.max_residual, st.last_fp_residual);
    }
    trace.update_log = st.identifier.update_log();
    return trace;
}

}  // namespace dacsim
