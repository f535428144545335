// Hybrid parameter estimator: theta_hat is held constant inside each
// interval [i r, (i+1) r) and recomputed at interval boundaries from the
// windows recorded at the latest L2-norm maximizer, provided the norm
// reached the excitation threshold sigma.
#pragma once

#include <optional>
#include <vector>

#include "dacsim/control_law.hpp"
#include "dacsim/history_window.hpp"

namespace dacsim {

/// One boundary event of the identifier.
struct IdentifierUpdate {
    double time = 0.0;       // boundary instant (i+1) r
    int interval = 0;        // index i of the interval just closed
    double theta_hat = 0.0;  // estimate in force after the boundary
    bool updated = false;    // false: excitation below sigma, estimate kept
    double best_norm = 0.0;  // max ||x_s||_2 observed over the interval
    double best_time = 0.0;  // latest attainment of that max (the tau used)
};

/// Sequential state machine; one instance per simulation.
///
/// The estimator never feeds back into the control law: disabling it leaves
/// the (t, x, u) trajectory untouched.
class Identifier {
public:
    Identifier(double theta_hat0, double horizon);

    double theta_hat() const { return theta_hat_; }
    int interval_index() const { return interval_; }
    double best_norm() const { return best_norm_; }
    double best_time() const { return best_time_; }
    const std::vector<IdentifierUpdate>& update_log() const { return log_; }

    /// Record the windows at grid instant t of the current interval
    /// (both boundary instants included). Latest near-maximizer wins;
    /// equality is judged up to a relative tie tolerance.
    void observe(double t, const HistoryWindow& xw, const HistoryWindow& uw);

    /// Close the current interval. Must be called exactly at t = (i+1) r,
    /// after the observation at that instant.
    void boundary_update(const ControllerConfig& cfg);

    static constexpr double kTieTol = 1e-12;

private:
    double theta_hat_;
    double r_;
    int interval_ = 0;
    double best_norm_;
    double best_time_;
    std::optional<HistoryWindow> best_x_;
    std::optional<HistoryWindow> best_u_;
    std::vector<IdentifierUpdate> log_;
};

/// Ultimate estimation error bound sqrt(r)/sigma * ||d||_inf.
double estimation_bound(const ControllerConfig& cfg, double d_sup);

}  // namespace dacsim
