#include "dacsim/history_window.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dacsim {

namespace {

void require_same_grid(const HistoryWindow& a, const HistoryWindow& b) {
    if (a.intervals() != b.intervals() || a.step() != b.step()) {
        throw IncompatibleWindowsError("windows do not share the same grid (step or sample count differ)");
    }
    const double scale = std::max(1.0, std::abs(a.t_end()));
    if (std::abs(a.t_end() - b.t_end()) > 1e-9 * scale) {
        throw IncompatibleWindowsError("windows do not share the same grid (end times differ)");
    }
}

}  // namespace

HistoryWindow::HistoryWindow(std::vector<double> samples, double step, double t_end)
    : samples_(std::move(samples)), h_(step), t_end_(t_end) {
    if (samples_.size() < 2) {
        throw RejectedInputError("history window needs at least two samples (N >= 1)");
    }
    if (!(h_ > 0.0) || !std::isfinite(h_)) {
        throw RejectedInputError("history window step must be positive and finite");
    }
    if (!std::isfinite(t_end_)) {
        throw RejectedInputError("history window end time must be finite");
    }
    for (double v : samples_) {
        if (!std::isfinite(v)) {
            throw RejectedInputError("history window samples must be finite");
        }
    }
}

HistoryWindow HistoryWindow::constant(double value, double step, int intervals, double t_end) {
    if (intervals < 1) {
        throw RejectedInputError("history window needs at least one interval");
    }
    return HistoryWindow(std::vector<double>(static_cast<size_t>(intervals) + 1, value), step, t_end);
}

void HistoryWindow::push_in_place(double v) {
    if (!std::isfinite(v)) {
        throw RejectedInputError("pushed sample must be finite");
    }
    std::move(samples_.begin() + 1, samples_.end(), samples_.begin());
    samples_.back() = v;
    t_end_ += h_;
}

void HistoryWindow::set_back(double v) {
    if (!std::isfinite(v)) {
        throw RejectedInputError("sample must be finite");
    }
    samples_.back() = v;
}

HistoryWindow push(const HistoryWindow& w, double v) {
    HistoryWindow out = w;
    out.push_in_place(v);
    return out;
}

double l2_norm_sq(const HistoryWindow& w) {
    const auto s = w.samples();
    const size_t n = s.size();
    double acc = 0.5 * s[0] * s[0];
    for (size_t i = 1; i + 1 < n; ++i) {
        acc += s[i] * s[i];
    }
    acc += 0.5 * s[n - 1] * s[n - 1];
    return acc * w.step();
}

double inner(const HistoryWindow& a, const HistoryWindow& b) {
    require_same_grid(a, b);
    const auto sa = a.samples();
    const auto sb = b.samples();
    const size_t n = sa.size();
    double acc = 0.5 * sa[0] * sb[0];
    for (size_t i = 1; i + 1 < n; ++i) {
        acc += sa[i] * sb[i];
    }
    acc += 0.5 * sa[n - 1] * sb[n - 1];
    return acc * a.step();
}

double sup_norm(const HistoryWindow& w) {
    double m = 0.0;
    for (double v : w.samples()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double l1_norm(const HistoryWindow& w) {
    const auto s = w.samples();
    const size_t n = s.size();
    double acc = 0.5 * std::abs(s[0]);
    for (size_t i = 1; i + 1 < n; ++i) {
        acc += std::abs(s[i]);
    }
    acc += 0.5 * std::abs(s[n - 1]);
    return acc * w.step();
}

DerivativeNorms derivative_norms(const HistoryWindow& w) {
    const auto s = w.samples();
    const double h = w.step();
    double sup = 0.0;
    double sumsq = 0.0;
    for (size_t i = 0; i + 1 < s.size(); ++i) {
        const double q = (s[i + 1] - s[i]) / h;
        sup = std::max(sup, std::abs(q));
        sumsq += q * q;
    }
    return {sup, std::sqrt(sumsq * h)};
}

double sup_diff(const HistoryWindow& a, const HistoryWindow& b) {
    require_same_grid(a, b);
    const auto sa = a.samples();
    const auto sb = b.samples();
    double m = 0.0;
    for (size_t i = 0; i < sa.size(); ++i) {
        m = std::max(m, std::abs(sa[i] - sb[i]));
    }
    return m;
}

double l1_diff(const HistoryWindow& a, const HistoryWindow& b) {
    require_same_grid(a, b);
    const auto sa = a.samples();
    const auto sb = b.samples();
    const size_t n = sa.size();
    double acc = 0.5 * std::abs(sa[0] - sb[0]);
    for (size_t i = 1; i + 1 < n; ++i) {
        acc += std::abs(sa[i] - sb[i]);
    }
    acc += 0.5 * std::abs(sa[n - 1] - sb[n - 1]);
    return acc * a.step();
}

}  // namespace dacsim
