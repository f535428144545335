// Scenario configuration (flat sectioned key = value text), initial-profile
// presets, and the experiment drivers: single runs with checks, parameter
// sweeps and step-halving convergence studies.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dacsim/closed_loop.hpp"
#include "dacsim/verification.hpp"

namespace dacsim {

struct InitialSpec {
    enum class Kind { constant, ramp, spike, samples };
    Kind kind = Kind::constant;
    double value = 0.0;           // constant level
    double from = 0.0, to = 0.0;  // ramp endpoints at s = -r and s = 0
    int n = 1;                    // spike sharpness: zero until -r/(n+1), ramp to eps at 0
    std::vector<double> samples;  // inline table
};

struct DisturbanceConfig {
    std::string kind = "zero";
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
    std::optional<double> cell_width;  // uniform_noise; defaults to the grid step
    std::vector<double> values;        // table
    double t0 = 0.0;
    std::optional<double> dt;          // table cell width; defaults to the grid step
};

struct ScenarioConfig {
    PlantParams plant;
    ControllerConfig controller;
    bool omega_explicit = false;
    DisturbanceConfig disturbance;
    InitialSpec x0;
    InitialSpec u0;
    std::optional<double> x0_derivative_sup;  // analytic override for ||x0'||_inf
    double theta_hat0 = 0.0;
    double h = 0.0;
    bool h_explicit = false;
    double t_final = 0.0;
    std::uint64_t seed = 0;
    std::string trace_path = "trace.csv";
    std::string reports_path = "reports";

    int intervals = 0;  // N = r/h, derived
    long steps = 0;     // t_final/h, derived

    /// Fill defaults (omega, h), derive the grid and validate every
    /// invariant. Idempotent; call again after mutating fields.
    void finalize();
};

/// Parse the documented key set; unknown keys, missing required keys and
/// invariant violations raise ConfigError with the offending key path.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

HistoryWindow build_x0(const ScenarioConfig& cfg);
std::vector<double> build_u0_interior(const ScenarioConfig& cfg);
DisturbanceSpec build_disturbance(const ScenarioConfig& cfg);

struct ScenarioResult {
    SimulationTrace trace;
    std::vector<BoundReport> reports;
    bool all_passed = false;
};

/// Simulate and apply every trajectory check.
ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const CheckTolerances& tols = CheckTolerances::calibrated());

struct SweepRow {
    std::string axis;
    double value = 0.0;
    double final_abs_x = 0.0;
    double max_abs_x_after_r = 0.0;
    double theta_err_final = 0.0;
    double identifier_bound = 0.0;  // sqrt(r)/sigma * d_sup
    double asymptotic_gain = 0.0;   // 2^{-1/4}/c
    std::vector<std::pair<std::string, double>> margins;
    bool all_passed = false;
};

/// Axes: theta, c, eps, sigma, d_amplitude, h. Rows in input order.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& axis,
                            const std::vector<double>& values,
                            const CheckTolerances& tols = CheckTolerances::calibrated());

struct ConvergenceRow {
    double h = 0.0;
    double identity_residual = 0.0;
    double self_distance = 0.0;  // sup |x - x_finest| on the common grid; NaN for the finest run
    double identity_order = 0.0;  // vs the next finer run; NaN for the finest
    double self_distance_order = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double observed_order = 0.0;  // identity-residual order of the finest pair
    bool exact = false;           // all residuals were zero
};

/// Integrate at h, h/2, ..., h/2^halvings with the disturbance held fixed
/// on the base grid, and measure the observed orders.
ConvergenceResult convergence_study(const ScenarioConfig& cfg, int halvings);

}  // namespace dacsim
