#include "dacsim/identifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dacsim {

Identifier::Identifier(double theta_hat0, double horizon)
    : theta_hat_(theta_hat0),
      r_(horizon),
      best_norm_(-std::numeric_limits<double>::infinity()),
      best_time_(std::numeric_limits<double>::quiet_NaN()) {
    if (!std::isfinite(theta_hat0)) {
        throw RejectedInputError("theta_hat0 must be finite");
    }
    if (!(horizon > 0.0)) {
        throw RejectedInputError("identifier horizon must be positive");
    }
}

void Identifier::observe(double t, const HistoryWindow& xw, const HistoryWindow& uw) {
    const double lo = interval_ * r_;
    const double hi = (interval_ + 1) * r_;
    const double tol = 1e-9 * std::max(1.0, r_);
    if (t < lo - tol || t > hi + tol) {
        throw SequencingError("observation outside the current identifier interval");
    }
    const double norm = std::sqrt(l2_norm_sq(xw));
    if (norm >= best_norm_ - kTieTol * std::max(1.0, best_norm_)) {
        best_time_ = t;
        best_x_ = xw;
        best_u_ = uw;
    }
    best_norm_ = std::max(best_norm_, norm);
}

void Identifier::boundary_update(const ControllerConfig& cfg) {
    bool updated = false;
    if (best_x_.has_value() && best_norm_ >= cfg.sigma) {
        theta_hat_ = q_functional(*best_x_, *best_u_);
        updated = true;
    }
    log_.push_back({(interval_ + 1) * r_, interval_, theta_hat_, updated, best_norm_, best_time_});
    ++interval_;
    best_norm_ = -std::numeric_limits<double>::infinity();
    best_time_ = std::numeric_limits<double>::quiet_NaN();
    best_x_.reset();
    best_u_.reset();
}

double estimation_bound(const ControllerConfig& cfg, double d_sup) {
    if (d_sup < 0.0) {
        throw RejectedInputError("d_sup must be nonnegative");
    }
    return std::sqrt(cfg.r) / cfg.sigma * d_sup;
}

}  // namespace dacsim
