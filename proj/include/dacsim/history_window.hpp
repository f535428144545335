// Fixed-grid sliding window over the last r time units of a signal,
// with the trapezoidal quadrature and discrete norms used by the
// delayed-feedback functionals.
#pragma once

#include <span>
#include <vector>

#include "dacsim/errors.hpp"

namespace dacsim {

/// Uniformly sampled segment of a scalar signal on [t_end - r, t_end].
///
/// The grid is rigid: N intervals of width h, r = N*h, and push() always
/// advances the window by exactly one grid step. All samples are finite.
class HistoryWindow {
public:
    /// samples.size() must be >= 2 (N >= 1); all values finite; step > 0.
    HistoryWindow(std::vector<double> samples, double step, double t_end);

    /// Window filled with a single value.
    static HistoryWindow constant(double value, double step, int intervals, double t_end = 0.0);

    int intervals() const { return static_cast<int>(samples_.size()) - 1; }
    double step() const { return h_; }
    double horizon() const { return h_ * intervals(); }
    double t_end() const { return t_end_; }
    double t_start() const { return t_end_ - horizon(); }

    std::span<const double> samples() const { return samples_; }
    /// Newest sample, value at t_end.
    double back() const { return samples_.back(); }
    /// Oldest sample, value at t_end - r.
    double front() const { return samples_.front(); }
    double operator[](int i) const { return samples_[static_cast<size_t>(i)]; }

    /// Advance by one grid step in place: drop the oldest sample, append v.
    /// Hot-path variant of the value-returning push(); the caller must own
    /// the window exclusively.
    void push_in_place(double v);

    /// Replace the newest sample without advancing time. Used by the
    /// per-step fixed-point iteration, which revises its trailing sample
    /// until the feedback equation holds.
    void set_back(double v);

private:
    std::vector<double> samples_;
    double h_;
    double t_end_;
};

/// Value-semantic push: returns a new window advanced by one step.
HistoryWindow push(const HistoryWindow& w, double v);

/// Trapezoidal approximation of the squared L2 norm over [-r, 0].
double l2_norm_sq(const HistoryWindow& w);

/// Trapezoidal approximation of the L2 inner product on the common grid.
/// Throws IncompatibleWindowsError if the grids differ.
double inner(const HistoryWindow& a, const HistoryWindow& b);

/// Grid maximum of |.| (discrete stand-in for the essential supremum).
double sup_norm(const HistoryWindow& w);

/// Trapezoidal approximation of the L1 norm.
double l1_norm(const HistoryWindow& w);

struct DerivativeNorms {
    double sup;  // max |difference quotient|
    double l2;   // sqrt(sum of squared quotients * h), one term per interval
};

/// First-order finite-difference norms of the derivative.
DerivativeNorms derivative_norms(const HistoryWindow& w);

/// max_i |a_i - b_i| on the common grid.
double sup_diff(const HistoryWindow& a, const HistoryWindow& b);

/// Trapezoidal L1 norm of the sample-wise difference.
double l1_diff(const HistoryWindow& a, const HistoryWindow& b);

}  // namespace dacsim
