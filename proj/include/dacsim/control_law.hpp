// The delayed-feedback gain functional p, the raw parameter estimate q,
// and the feedback value u = -(2c + p) x computed from history windows.
#pragma once

#include "dacsim/history_window.hpp"

namespace dacsim {

/// Controller design constants and numerical tolerances.
///
/// eps sets the radius of the residual set, c the convergence rate, r the
/// delay horizon, sigma the identifier excitation threshold and omega the
/// decay rate probed by the input bound (0 < omega <= c, exp(omega*r) < 2).
struct ControllerConfig {
    double eps = 0.0;
    double c = 0.0;
    double r = 0.0;
    double sigma = 0.0;
    double omega = 0.0;
    double fp_tol = 1e-12;
    int fp_max_iter = 50;
    double blowup_limit = 1e12;

    /// Throws ConfigError naming the violated constraint.
    void validate() const;

    /// Largest omega the constraints allow for this c and r, with headroom.
    static double default_omega(double c, double r);
};

// Guard against floating underflow only; the analysis guarantees a strictly
// positive denominator for any window with bounded difference quotients.
inline constexpr double kDenomFloor = 1e-300;

/// Gain functional
///   p(x,u) = [ (x(0)^2 - x(-r)^2 - 2<x,u>)^+ + c r x(0)^2 ]
///            / [ 2 (||x||_2^2 + (eps^2 - x(0)^2)^+) ].
/// Always >= 0. Throws DegenerateWindowError if the denominator underflows.
double p_functional(const HistoryWindow& xw, const HistoryWindow& uw, const ControllerConfig& cfg);

/// Raw estimate q(x,u) = (x(0)^2 - x(-r)^2 - 2<x,u>) / (2 ||x||_2^2).
/// Requires ||x||_2 > 0; throws ZeroExcitationError otherwise.
double q_functional(const HistoryWindow& xw, const HistoryWindow& uw);

/// Feedback value u(t) = -(2c + p(x_t, u_t)) x(t).
double feedback(const HistoryWindow& xw, const HistoryWindow& uw, const ControllerConfig& cfg);

}  // namespace dacsim
