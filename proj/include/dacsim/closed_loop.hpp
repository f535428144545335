// Method-of-steps integration of the closed loop
//   x' = theta x + u + d,   u(t) = -(2c + p(x_t, u_t)) x(t)
// on a fixed grid: Heun predictor-corrector with an inner scalar fixed
// point for the implicit control value at each new grid point, plus the
// compatibility-enforcing initial-state constructor and blow-up detection.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dacsim/control_law.hpp"
#include "dacsim/history_window.hpp"
#include "dacsim/identifier.hpp"

namespace dacsim {

struct PlantParams {
    double theta = 0.0;  // the unknown parameter, ground truth for the simulator
};

/// Bounded disturbance generator. d_sup is derived in the factories so the
/// invariant |d(t)| <= d_sup holds by construction.
struct DisturbanceSpec {
    enum class Kind { zero, constant, sinusoid, uniform_noise, table };

    Kind kind = Kind::zero;
    double amplitude = 0.0;
    double frequency = 0.0;  // cycles per time unit
    double phase = 0.0;
    std::uint64_t seed = 0;
    double cell_width = 0.0;  // uniform_noise: width of the constant cells
    std::vector<double> values;  // table samples, constant per cell
    double table_t0 = 0.0;
    double table_dt = 0.0;
    double d_sup = 0.0;

    static DisturbanceSpec zero();
    static DisturbanceSpec constant(double value);
    static DisturbanceSpec sinusoid(double amplitude, double frequency, double phase = 0.0);
    static DisturbanceSpec uniform_noise(double amplitude, std::uint64_t seed, double cell_width);
    static DisturbanceSpec table(std::vector<double> values, double t0, double dt);

    /// Piecewise-constant kinds (order of the integrator degrades to one).
    bool rough() const { return kind == Kind::uniform_noise || kind == Kind::table; }
};

/// Pointwise disturbance sample at t >= 0. Values on [-r, 0) are implied by
/// the initial profiles and live in SimulationTrace::virtual_d instead.
double disturbance_eval(const DisturbanceSpec& spec, double t);

struct FixedPointStats {
    long total_iterations = 0;
    int max_iterations = 0;
    double max_residual = 0.0;
};

struct ClosedLoopState {
    double t = 0.0;
    long step_index = 0;
    HistoryWindow xw;
    HistoryWindow uw;
    double x_dot_last = 0.0;
    Identifier identifier;
    ControllerConfig config;
    PlantParams plant;
    int last_fp_iterations = 0;
    double last_fp_residual = 0.0;
};

struct TraceRow {
    double t, x, u, p, theta_hat, d;
};

struct SimulationTrace {
    std::vector<TraceRow> rows;

    ControllerConfig config;
    PlantParams plant;
    DisturbanceSpec disturbance;
    double h = 0.0;
    int intervals = 0;  // N = r/h
    std::vector<double> x0_samples;  // N+1 values on [-r, 0]
    std::vector<double> u0_samples;  // N+1 values, endpoint solved for compatibility
    std::vector<double> virtual_d;   // N values on [-r, 0): x0' - theta x0 - u0
    double x0_dot_sup = 0.0;         // finite differences, or analytic override
    FixedPointStats fp_stats;
    int init_fp_iterations = 0;
    double init_fp_residual = 0.0;
    std::vector<IdentifierUpdate> update_log;
    bool identifier_enabled = true;

    long steps() const { return static_cast<long>(rows.size()) - 1; }
};

struct RunOptions {
    bool with_identifier = true;
    std::optional<double> x0_dot_sup = {};  // analytic override for ||x0'||_inf
};

/// Solve the scalar compatibility equation u0(0) = -(2c + p(x0,u0)) x0(0)
/// and assemble the initial state. x0 must end at t = 0; u0_interior holds
/// the N samples on [-r, 0).
ClosedLoopState make_initial_state(const HistoryWindow& x0_profile,
                                   std::span<const double> u0_interior, double theta_hat0,
                                   const ControllerConfig& cfg, const PlantParams& plant);

/// Advance one grid step. Heun on the plant with the new control value
/// obtained from the fixed point u+ = feedback(x-window(u+), u-window(u+)).
ClosedLoopState step(ClosedLoopState st, const DisturbanceSpec& spec);

/// One Heun step of the frozen-gain system x' = (theta - 2c - a) x + d,
/// u = -(2c + a) x with the gain a held constant. Third-order accurate per
/// step against the exact exponential; used as the integrator consistency
/// reference.
ClosedLoopState step_frozen_gain(ClosedLoopState st, double gain, const DisturbanceSpec& spec);

/// Full trajectory from t = 0 to t_final (a grid multiple), identifier
/// observations at every grid instant and boundary updates every N steps.
SimulationTrace run(const PlantParams& plant, const ControllerConfig& cfg,
                    const DisturbanceSpec& spec, const HistoryWindow& x0_profile,
                    std::span<const double> u0_interior, double theta_hat0, double t_final,
                    const RunOptions& options = {});

}  // namespace dacsim
