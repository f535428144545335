#include "dacsim/control_law.hpp"

#include <algorithm>
#include <cmath>

namespace dacsim {

namespace {
inline double pos(double v) { return std::max(v, 0.0); }
}

void ControllerConfig::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("controller eps must be > 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("controller c must be > 0");
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("controller r must be > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("controller sigma must be > 0");
    if (!(omega > 0.0) || !(omega <= c)) {
        throw ConfigError("controller omega must satisfy 0 < omega <= c");
    }
    if (!(std::exp(omega * r) < 2.0)) {
        throw ConfigError("controller omega must satisfy exp(omega*r) < 2");
    }
    if (!(fp_tol > 0.0)) throw ConfigError("controller fp_tol must be > 0");
    if (fp_max_iter < 0) throw ConfigError("controller fp_max_iter must be >= 0");
    if (!(blowup_limit > 0.0)) throw ConfigError("controller blowup_limit must be > 0");
}

double ControllerConfig::default_omega(double c, double r) {
    // exp(omega*r) = sqrt(2) < 2 at the cap, well inside the constraint.
    return std::min(c, 0.5 * std::log(2.0) / r);
}

double p_functional(const HistoryWindow& xw, const HistoryWindow& uw, const ControllerConfig& cfg) {
    const double x_now = xw.back();
    const double x_old = xw.front();
    const double num = pos(x_now * x_now - x_old * x_old - 2.0 * inner(xw, uw)) +
                       cfg.c * cfg.r * x_now * x_now;
    const double denom = 2.0 * (l2_norm_sq(xw) + pos(cfg.eps * cfg.eps - x_now * x_now));
    if (denom <= kDenomFloor) {
        throw DegenerateWindowError("gain functional denominator underflowed");
    }
    return num / denom;
}

double q_functional(const HistoryWindow& xw, const HistoryWindow& uw) {
    const double n2 = l2_norm_sq(xw);
    if (!(n2 > 0.0)) {
        throw ZeroExcitationError("raw estimate requires a window with nonzero L2 norm");
    }
    const double x_now = xw.back();
    const double x_old = xw.front();
    return (x_now * x_now - x_old * x_old - 2.0 * inner(xw, uw)) / (2.0 * n2);
}

double feedback(const HistoryWindow& xw, const HistoryWindow& uw, const ControllerConfig& cfg) {
    return -(2.0 * cfg.c + p_functional(xw, uw, cfg)) * xw.back();
}

}  // namespace dacsim
