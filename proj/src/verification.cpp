#include "dacsim/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dacsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double pos(double v) { return std::max(v, 0.0); }

// Flat sample arrays over [-r, t_final]: absolute index a holds the sample
// at time (a - N) h, so row i of the trace sits at a = N + i and the window
// ending at row i covers a in [i, i + N].
struct TraceArrays {
    const SimulationTrace& trace;
    int n;
    long steps;
    double h;
    std::vector<double> x, u;

    explicit TraceArrays(const SimulationTrace& tr)
        : trace(tr), n(tr.intervals), steps(tr.steps()), h(tr.h) {
        if (static_cast<int>(tr.x0_samples.size()) != n + 1 ||
            static_cast<int>(tr.u0_samples.size()) != n + 1) {
            throw PreconditionError("trace metadata is missing the initial profiles");
        }
        x.reserve(tr.x0_samples.size() + tr.rows.size());
        u.reserve(x.capacity());
        x.assign(tr.x0_samples.begin(), tr.x0_samples.end());
        u.assign(tr.u0_samples.begin(), tr.u0_samples.end());
        for (size_t i = 1; i < tr.rows.size(); ++i) {
            x.push_back(tr.rows[i].x);
            u.push_back(tr.rows[i].u);
        }
    }

    // Extended disturbance sample: implied values on [-r, 0), logged ones after.
    double d_ext(long a) const {
        return a < n ? trace.virtual_d[static_cast<size_t>(a)]
                     : trace.rows[static_cast<size_t>(a - n)].d;
    }

    double trapezoid_sq(const std::vector<double>& s, long start) const {
        double acc = 0.5 * s[start] * s[start];
        for (long a = start + 1; a < start + n; ++a) acc += s[a] * s[a];
        acc += 0.5 * s[start + n] * s[start + n];
        return acc * h;
    }

    double trapezoid_prod(const std::vector<double>& s, long start,
                          const std::vector<double>& w, long wstart) const {
        double acc = 0.5 * s[start] * w[wstart];
        for (long a = 1; a < n; ++a) acc += s[start + a] * w[wstart + a];
        acc += 0.5 * s[start + n] * w[wstart + n];
        return acc * h;
    }

    double window_sup(const std::vector<double>& s, long start) const {
        double m = 0.0;
        for (long a = start; a <= start + n; ++a) m = std::max(m, std::abs(s[a]));
        return m;
    }

    HistoryWindow window(const std::vector<double>& s, long row) const {
        std::vector<double> v(s.begin() + row, s.begin() + row + n + 1);
        return HistoryWindow(std::move(v), h, static_cast<double>(row) * h);
    }
};

struct WorstTracker {
    double margin = kInf;
    double time = 0.0;
    void update(double m, double t) {
        if (m < margin) {
            margin = m;
            time = t;
        }
    }
};

BoundReport make_report(std::string name, WorstTracker worst, double tolerance,
                        std::map<std::string, double> constants, std::string note = {}) {
    BoundReport rep;
    rep.name = std::move(name);
    rep.constants = std::move(constants);
    rep.worst_margin = worst.margin;
    rep.worst_time = worst.time;
    rep.tolerance = tolerance;
    rep.pass = worst.margin >= -tolerance;
    rep.note = std::move(note);
    return rep;
}

BoundReport vacuous_report(std::string name, std::string note,
                           std::map<std::string, double> constants = {}) {
    BoundReport rep;
    rep.name = std::move(name);
    rep.constants = std::move(constants);
    rep.worst_margin = kInf;
    rep.pass = true;
    rep.vacuous = true;
    rep.note = std::move(note);
    return rep;
}

}  // namespace

double constant_M(const PlantParams& plant, const ControllerConfig& cfg) {
    const double rate = plant.theta + 0.5 * std::sqrt(2.0) * cfg.c * cfg.c - 2.0 * cfg.c;
    return std::exp(pos(rate) * cfg.r);
}

double constant_rho(const PlantParams& plant, const ControllerConfig& cfg) {
    return 2.0 * std::abs(plant.theta) + 1.0 / (2.0 * std::sqrt(2.0) * cfg.r) +
           cfg.c * (cfg.r + 3.0);
}

double lipschitz_h(double R, const ControllerConfig& cfg) {
    const double e2 = cfg.eps * cfg.eps;
    return (e2 * cfg.r + 6.0 * (e2 + 2.0 * cfg.r * R * R)) / (e2 * e2 * cfg.r);
}

double lipschitz_l(double R, const ControllerConfig& cfg) {
    const double H = lipschitz_h(R, cfg);
    return (3.0 + cfg.c * cfg.r) * (1.0 + 2.0 * R * R * (cfg.r + 1.0) * H) * 2.0 * R * H;
}

double continuity_log_factor(double R, double T, const PlantParams& plant,
                             const ControllerConfig& cfg) {
    const double L = lipschitz_l((1.0 + cfg.r) * R, cfg);
    return 2.0 * (2.0 * cfg.c + std::abs(plant.theta) + (2.0 + cfg.r) * R * L) * T;
}

double continuity_factor(double R, double T, const PlantParams& plant,
                         const ControllerConfig& cfg) {
    return std::exp(continuity_log_factor(R, T, plant, cfg));
}

CheckTolerances CheckTolerances::calibrated() {
    // Frozen from tools/calibrate (see data/tolerance_calibration.json):
    // step-halving error measurements on the reference scenario
    // theta=1, c=1, r=1, eps=0.1, sigma=0.05, x0=1, d=0 (smooth) and the
    // same scenario with unit-amplitude piecewise-constant noise (rough),
    // times a safety factor of eight.
    CheckTolerances t;
    t.identity_a = 130.0;
    t.identity_b = 1.4;
    t.state_a = 1400.0;
    t.state_b = 2.0;
    t.input_a = 19000.0;
    t.input_b = 28.0;
    t.lyapunov_a = 2400.0;
    t.lyapunov_b = 5.8;
    return t;
}

double CheckTolerances::roughness(const SimulationTrace& trace) const {
    return trace.disturbance.rough() ? trace.disturbance.d_sup : 0.0;
}

double CheckTolerances::trajectory(double a, double b, const SimulationTrace& trace) const {
    return base + a * trace.h * trace.h + b * trace.h * roughness(trace);
}

double CheckTolerances::identifier(const SimulationTrace& trace, double sigma) const {
    return base + (identity_a * trace.h * trace.h + identity_b * trace.h * roughness(trace)) /
                      (2.0 * sigma * sigma);
}

BoundReport check_state_bound(const SimulationTrace& trace, const CheckTolerances& tols) {
    const ControllerConfig& cfg = trace.config;
    const double M = constant_M(trace.plant, cfg);
    const double gain = std::pow(2.0, -0.25) / cfg.c;
    const double d_sup = trace.disturbance.d_sup;
    const double x00 = std::abs(trace.x0_samples.back());
    const double sqrt_r = std::sqrt(cfg.r);

    WorstTracker worst;
    double final_window_max = 0.0;
    const double t_final = trace.rows.back().t;
    for (const TraceRow& row : trace.rows) {
        const double decay = std::exp(-cfg.c * pos(row.t - cfg.r));
        const double bound = M * decay * x00 + cfg.eps + (1.0 + sqrt_r * M * decay) * gain * d_sup;
        worst.update(bound - std::abs(row.x), row.t);
        if (row.t >= t_final - cfg.r) final_window_max = std::max(final_window_max, std::abs(row.x));
    }
    const double tol = tols.trajectory(tols.state_a, tols.state_b, trace);
    return make_report("state_bound", worst, tol,
                       {{"M", M},
                        {"asymptote", cfg.eps + gain * d_sup},
                        {"asymptotic_gain", gain},
                        {"d_sup", d_sup},
                        {"final_window_max_abs_x", final_window_max}});
}

BoundReport check_input_bound(const SimulationTrace& trace, const CheckTolerances& tols) {
    const ControllerConfig& cfg = trace.config;
    const double theta = trace.plant.theta;
    const double omega = cfg.omega;
    if (!(omega > 0.0) || !(omega <= cfg.c) || !(std::exp(omega * cfg.r) < 2.0)) {
        throw ConfigError("input bound requires 0 < omega <= c with exp(omega*r) < 2");
    }
    const TraceArrays arr(trace);
    const double r = cfg.r;
    const double eps = cfg.eps;
    const double factor = 2.0 / (2.0 - std::exp(omega * r)) * std::exp(4.0 * pos(theta) * r);
    const double K = 16.0 / eps * std::sqrt(2.0) * (r + 3.0) * r *
                     (1.0 + cfg.c * r) * (1.0 + cfg.c * r);
    const double rho = constant_rho(trace.plant, cfg);
    const double fcoef = 4.0 * std::sqrt(2.0) * (r + 3.0) * std::pow(eps, -3.0) * r;
    const double lin = 2.0 * std::abs(theta) + cfg.c * (r + 3.0);
    const double floor_term = eps / (2.0 * std::sqrt(2.0) * r);

    double u0_sup = 0.0;
    for (double v : trace.u0_samples) u0_sup = std::max(u0_sup, std::abs(v));

    WorstTracker worst;
    double running = 0.0;
    const double shrink = std::exp(-omega * arr.h);
    double final_window_max = 0.0;
    const double t_final = trace.rows.back().t;
    for (long i = 0; i <= arr.steps; ++i) {
        const TraceRow& row = trace.rows[static_cast<size_t>(i)];
        double sup_x = 0.0, sup_d = 0.0, sup_dhu = 0.0;
        for (long a = i; a <= i + arr.n; ++a) {
            sup_x = std::max(sup_x, std::abs(arr.x[a]));
            const double dv = arr.d_ext(a);
            sup_d = std::max(sup_d, std::abs(dv));
            // h(t) u(t) contributes only before t = 0, i.e. a < N.
            sup_dhu = std::max(sup_dhu, std::abs(a < arr.n ? dv + arr.u[a] : dv));
        }
        const double mix = sup_d + cfg.c * r * sup_dhu;
        const double f = lin * sup_x + 0.5 * sup_d + floor_term + fcoef * mix * mix * row.x * row.x;
        running = (i == 0) ? f : std::max(running * shrink, f);
        const double bound = 0.5 * std::exp(-omega * (row.t - r)) * u0_sup + factor * running;
        worst.update(bound - std::abs(row.u), row.t);
        if (row.t >= t_final - r) final_window_max = std::max(final_window_max, std::abs(row.u));
    }
    const double tol = tols.trajectory(tols.input_a, tols.input_b, trace);
    return make_report("input_bound", worst, tol,
                       {{"K", K},
                        {"rho", rho},
                        {"eps_rho", eps * rho},
                        {"prefactor", factor},
                        {"u0_sup", u0_sup},
                        {"final_window_max_abs_u", final_window_max}});
}

BoundReport check_identity(const SimulationTrace& trace, const CheckTolerances& tols) {
    if (trace.steps() < trace.intervals) {
        return vacuous_report("identity", "trace shorter than one delay horizon");
    }
    const TraceArrays arr(trace);
    const double theta = trace.plant.theta;

    // d samples as a flat array aligned with rows (window never reaches
    // before t = 0 here since the check starts at t = r).
    std::vector<double> d(trace.rows.size());
    for (size_t i = 0; i < trace.rows.size(); ++i) d[i] = trace.rows[i].d;

    WorstTracker worst;
    double worst_residual = 0.0;
    for (long i = arr.n; i <= arr.steps; ++i) {
        const double x_now = arr.x[i + arr.n];
        const double x_old = arr.x[i];
        const double xu = arr.trapezoid_prod(arr.x, i, arr.u, i);
        const double xx = arr.trapezoid_sq(arr.x, i);
        const double xd = arr.trapezoid_prod(arr.x, i, d, i - arr.n);
        const double res =
            std::abs(x_now * x_now - x_old * x_old - 2.0 * xu - 2.0 * theta * xx - 2.0 * xd);
        worst_residual = std::max(worst_residual, res);
        worst.update(-res, static_cast<double>(i) * arr.h);
    }
    const double tol = tols.trajectory(tols.identity_a, tols.identity_b, trace);
    return make_report("identity", worst, tol, {{"worst_residual", worst_residual}});
}

BoundReport check_identifier_bound(const SimulationTrace& trace, const CheckTolerances& tols) {
    const ControllerConfig& cfg = trace.config;
    if (!trace.identifier_enabled) {
        return vacuous_report("identifier_bound", "identifier disabled for this run");
    }
    const TraceArrays arr(trace);
    const double bound = estimation_bound(cfg, trace.disturbance.d_sup);
    const double tol = tols.identifier(trace, cfg.sigma);

    long first_excited = -1;
    bool excited_before_r = false;
    for (long i = 0; i <= arr.steps; ++i) {
        const double norm = std::sqrt(arr.trapezoid_sq(arr.x, i));
        if (norm >= cfg.sigma) {
            if (i >= arr.n) {
                first_excited = i;
                break;
            }
            excited_before_r = true;
        }
    }
    if (first_excited < 0) {
        if (!excited_before_r) {
            // No excitation anywhere: the estimate must never move.
            WorstTracker worst;
            const double theta_hat0 = trace.rows.front().theta_hat;
            for (const TraceRow& row : trace.rows) {
                worst.update(-std::abs(row.theta_hat - theta_hat0), row.t);
            }
            auto rep = make_report("identifier_bound", worst, 0.0, {{"bound", bound}},
                                   "no excitation; estimate must stay at its initial value");
            rep.vacuous = true;  // the error bound itself is not claimed
            return rep;
        }
        return vacuous_report("identifier_bound",
                              "excitation only before t = r; no error bound claimed",
                              {{"bound", bound}});
    }

    const long first_boundary_row = ((first_excited + arr.n - 1) / arr.n) * arr.n;
    // Certify from the first boundary whose update window lies in t >= 0;
    // an update at t = r may draw on the initial profile, whose implied
    // disturbance is not covered by d_sup.
    long t_check_row = -1;
    const double grid_tol = 0.5 * arr.h;
    for (const IdentifierUpdate& up : trace.update_log) {
        if (up.updated && up.best_time >= cfg.r - grid_tol) {
            t_check_row = static_cast<long>(up.interval + 1) * arr.n;
            break;
        }
    }
    std::map<std::string, double> constants{
        {"bound", bound},
        {"T", t_check_row >= 0 ? static_cast<double>(t_check_row) * arr.h : -1.0},
        {"T_first_excited_boundary", static_cast<double>(first_boundary_row) * arr.h},
        {"first_excited_time", static_cast<double>(first_excited) * arr.h}};
    if (t_check_row < 0 || t_check_row > arr.steps) {
        return vacuous_report("identifier_bound",
                              "trace too short to reach an update free of initial-profile data",
                              constants);
    }

    WorstTracker worst;
    const double theta = trace.plant.theta;
    for (long i = t_check_row; i <= arr.steps; ++i) {
        const TraceRow& row = trace.rows[static_cast<size_t>(i)];
        worst.update(bound - std::abs(row.theta_hat - theta), row.t);
    }
    std::string note;
    if (t_check_row > first_boundary_row) {
        note = "first excited boundary skipped: its update window reaches into the initial profile";
    }
    return make_report("identifier_bound", worst, tol, std::move(constants), std::move(note));
}

BoundReport check_lyapunov_decay(const SimulationTrace& trace, const CheckTolerances& tols) {
    if (trace.steps() < trace.intervals) {
        return vacuous_report("lyapunov_decay", "trace shorter than one delay horizon");
    }
    const ControllerConfig& cfg = trace.config;
    const double e2 = cfg.eps * cfg.eps;
    const double d_sup = trace.disturbance.d_sup;
    const double floor = d_sup * d_sup / (std::sqrt(2.0) * cfg.c * cfg.c);
    const double xr = trace.rows[static_cast<size_t>(trace.intervals)].x;
    const double at_r = pos(xr * xr - e2);
    const double t_r = trace.rows[static_cast<size_t>(trace.intervals)].t;

    WorstTracker worst;
    for (long i = trace.intervals; i <= trace.steps(); ++i) {
        const TraceRow& row = trace.rows[static_cast<size_t>(i)];
        const double lhs = pos(row.x * row.x - e2);
        const double bound = std::exp(-2.0 * cfg.c * (row.t - t_r)) * at_r + floor;
        worst.update(bound - lhs, row.t);
    }
    const double tol = tols.trajectory(tols.lyapunov_a, tols.lyapunov_b, trace);
    return make_report("lyapunov_decay", worst, tol,
                       {{"disturbance_floor", floor}, {"value_at_r", at_r}});
}

BoundReport denominator_floor_check(const HistoryWindow& xw, const ControllerConfig& cfg) {
    const double x_now = xw.back();
    const double lhs = l2_norm_sq(xw) + pos(cfg.eps * cfg.eps - x_now * x_now);
    const DerivativeNorms dn = derivative_norms(xw);
    const double e = cfg.eps;
    const double r = cfg.r;
    const double rhs_sup =
        r * e * e * e / (2.0 * (3.0 + r) * (r * std::sqrt(2.0) * dn.sup + e));
    const double rhs_l2 =
        e * e * e * e * r / (2.0 * e * e * r + 12.0 * (e * e + 2.0 * r * dn.l2 * dn.l2));
    WorstTracker worst;
    worst.update(lhs - rhs_sup, xw.t_end());
    worst.update(lhs - rhs_l2, xw.t_end());
    return make_report("denominator_floor", worst, 0.0,
                       {{"lhs", lhs},
                        {"floor_sup", rhs_sup},
                        {"floor_l2", rhs_l2},
                        {"deriv_sup", dn.sup},
                        {"deriv_l2", dn.l2}});
}

BoundReport gain_lipschitz_check(const HistoryWindow& xw, const HistoryWindow& uw,
                                 const HistoryWindow& yw, const HistoryWindow& ww, double R,
                                 const ControllerConfig& cfg, double lipschitz_rel) {
    const double slack = 1.0 + 1e-12;
    const auto within = [&](const HistoryWindow& sw, const HistoryWindow& cw) {
        return sup_norm(sw) <= R * slack && derivative_norms(sw).l2 <= R * slack &&
               l1_norm(cw) <= R * slack;
    };
    if (!within(xw, uw) || !within(yw, ww)) {
        throw PreconditionError("window pair norms exceed the stated radius R");
    }
    const double L = lipschitz_l(R, cfg);
    const double lhs = std::abs(p_functional(xw, uw, cfg) - p_functional(yw, ww, cfg));
    const double rhs = L * (sup_diff(xw, yw) + l1_diff(uw, ww));
    WorstTracker worst;
    worst.update(rhs - lhs, xw.t_end());
    return make_report("gain_lipschitz", worst, lipschitz_rel * L,
                       {{"L", L}, {"H", lipschitz_h(R, cfg)}, {"R", R}});
}

BoundReport initial_condition_continuity_check(const SimulationTrace& a,
                                               const SimulationTrace& b, double T) {
    if (a.h != b.h || a.intervals != b.intervals) {
        throw IncompatibleWindowsError("paired traces do not share the same grid");
    }
    if (a.plant.theta != b.plant.theta) {
        throw PreconditionError("paired traces must share the plant parameter");
    }
    const DisturbanceSpec& da = a.disturbance;
    const DisturbanceSpec& db = b.disturbance;
    if (da.kind != db.kind || da.amplitude != db.amplitude || da.frequency != db.frequency ||
        da.phase != db.phase || da.seed != db.seed || da.cell_width != db.cell_width ||
        da.values != db.values) {
        throw PreconditionError("paired traces must share the disturbance");
    }
    const long t_rows = std::lround(T / a.h);
    if (t_rows > a.steps() || t_rows > b.steps()) {
        throw PreconditionError("traces shorter than the requested horizon T");
    }

    const TraceArrays aa(a), ab(b);
    double R = da.d_sup;
    R = std::max(R, std::max(a.x0_dot_sup, b.x0_dot_sup));
    for (long i = 0; i <= t_rows + 0; ++i) {
        const TraceRow& ra = a.rows[static_cast<size_t>(i)];
        const TraceRow& rb = b.rows[static_cast<size_t>(i)];
        R = std::max({R, std::abs(ra.x), std::abs(rb.x), std::abs(ra.u), std::abs(rb.u),
                      std::abs(a.plant.theta * ra.x + ra.u + ra.d),
                      std::abs(b.plant.theta * rb.x + rb.u + rb.d)});
    }
    for (long j = 0; j <= aa.n; ++j) {
        R = std::max({R, std::abs(aa.x[j]), std::abs(ab.x[j]), std::abs(aa.u[j]),
                      std::abs(ab.u[j])});
    }

    const double log_q = continuity_log_factor(R, T, a.plant, a.config);
    const double q = std::exp(log_q);

    double dist0 = 0.0;
    {
        double sup0 = 0.0, l10 = 0.5 * std::abs(aa.u[0] - ab.u[0]);
        for (long j = 0; j <= aa.n; ++j) sup0 = std::max(sup0, std::abs(aa.x[j] - ab.x[j]));
        for (long j = 1; j < aa.n; ++j) l10 += std::abs(aa.u[j] - ab.u[j]);
        l10 += 0.5 * std::abs(aa.u[aa.n] - ab.u[aa.n]);
        dist0 = sup0 + l10 * aa.h;
    }

    WorstTracker worst;
    double max_dist = 0.0;
    const bool log_space = !std::isfinite(q);
    for (long i = 0; i <= t_rows; ++i) {
        double sup = 0.0;
        double l1 = 0.5 * std::abs(aa.u[i] - ab.u[i]);
        for (long j = 1; j < aa.n; ++j) l1 += std::abs(aa.u[i + j] - ab.u[i + j]);
        l1 += 0.5 * std::abs(aa.u[i + aa.n] - ab.u[i + aa.n]);
        for (long j = 0; j <= aa.n; ++j) sup = std::max(sup, std::abs(aa.x[i + j] - ab.x[i + j]));
        const double dist = sup + l1 * aa.h;
        max_dist = std::max(max_dist, dist);
        const double t = static_cast<double>(i) * aa.h;
        if (dist0 == 0.0) {
            worst.update(-dist, t);  // identical data must stay identical
        } else if (log_space) {
            worst.update(dist > 0.0 ? log_q + std::log(dist0) - std::log(dist) : kInf, t);
        } else {
            worst.update(q * dist0 - dist, t);
        }
    }
    std::string note;
    if (log_space) note = "factor overflows; margins compared in log space";
    return make_report("initial_condition_continuity", worst, 0.0,
                       {{"R", R},
                        {"log_Q", log_q},
                        {"Q", q},
                        {"initial_distance", dist0},
                        {"max_distance", max_dist},
                        {"amplification", dist0 > 0.0 ? max_dist / dist0 : 0.0}},
                       std::move(note));
}

std::vector<BoundReport> run_trace_checks(const SimulationTrace& trace,
                                          const CheckTolerances& tols) {
    std::vector<BoundReport> reports;
    reports.push_back(check_identity(trace, tols));
    reports.push_back(check_state_bound(trace, tols));
    reports.push_back(check_input_bound(trace, tols));
    reports.push_back(check_lyapunov_decay(trace, tols));
    reports.push_back(check_identifier_bound(trace, tols));
    return reports;
}

}  // namespace dacsim
