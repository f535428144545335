#include "dacsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace dacsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ConfigError("invalid number for key " + key + ": '" + text + "'");
    }
    return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ConfigError("invalid unsigned integer for key " + key + ": '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_number(key, item));
    }
    if (out.empty()) throw ConfigError("empty list for key " + key);
    return out;
}

using Section = std::map<std::string, std::string>;

// Consumes entries as they are read so leftovers can be reported as unknown.
struct SectionReader {
    std::string name;
    Section entries;

    std::optional<std::string> take(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        std::string v = it->second;
        entries.erase(it);
        return v;
    }
    double number(const std::string& key, double fallback) {
        auto v = take(key);
        return v ? parse_number(name + "." + key, *v) : fallback;
    }
    double required_number(const std::string& key) {
        auto v = take(key);
        if (!v) throw ConfigError("missing required key " + name + "." + key);
        return parse_number(name + "." + key, *v);
    }
    void finish() const {
        if (!entries.empty()) {
            throw ConfigError("unknown key " + name + "." + entries.begin()->first);
        }
    }
};

}  // namespace

void ScenarioConfig::finalize() {
    if (!(controller.r > 0.0)) throw ConfigError("controller.r must be > 0");
    if (!h_explicit && !(h > 0.0)) h = 1e-3 * controller.r;
    if (!(h > 0.0)) throw GridError("simulation.h must be > 0");
    const double ratio = controller.r / h;
    const long n = std::lround(ratio);
    if (n < 1 || std::abs(static_cast<double>(n) * h - controller.r) >
                     1e-9 * std::max(1.0, controller.r)) {
        throw GridError("simulation.h must divide controller.r");
    }
    intervals = static_cast<int>(n);
    h = controller.r / static_cast<double>(n);

    if (!(t_final >= 0.0)) throw ConfigError("simulation.t_final must be >= 0");
    steps = std::lround(t_final / h);
    if (std::abs(static_cast<double>(steps) * h - t_final) > 1e-9 * std::max(1.0, t_final)) {
        throw GridError("simulation.t_final must be a multiple of simulation.h");
    }

    if (!omega_explicit) {
        controller.omega = ControllerConfig::default_omega(controller.c, controller.r);
    }
    controller.validate();

    static const std::set<std::string> kinds{"zero", "constant", "sinusoid", "uniform_noise",
                                             "table"};
    if (!kinds.count(disturbance.kind)) {
        throw ConfigError("disturbance.kind must be one of zero, constant, sinusoid, "
                          "uniform_noise, table");
    }
    if (disturbance.kind == "table" && disturbance.values.empty()) {
        throw ConfigError("disturbance.values is required for the table kind");
    }
    if (x0.kind == InitialSpec::Kind::samples &&
        static_cast<int>(x0.samples.size()) != intervals + 1) {
        throw ConfigError("initial.x0_samples must hold exactly N+1 values");
    }
    if (u0.kind == InitialSpec::Kind::samples &&
        static_cast<int>(u0.samples.size()) != intervals) {
        throw ConfigError("initial.u0_samples must hold exactly N values (the endpoint is solved)");
    }
    if (x0.kind == InitialSpec::Kind::spike && x0.n < 1) {
        throw ConfigError("initial.x0_n must be >= 1");
    }
    if (!std::isfinite(theta_hat0)) throw ConfigError("initial.theta_hat0 must be finite");
    if (!std::isfinite(plant.theta)) throw ConfigError("plant.theta must be finite");
}

ScenarioConfig parse_config(const std::string& text) {
    std::map<std::string, Section> sections;
    std::string current;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            }
            current = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known{"plant", "controller", "disturbance",
                                                     "initial", "simulation", "output"};
            if (!known.count(current)) {
                throw ConfigError("unknown section [" + current + "]");
            }
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        }
        if (current.empty()) {
            throw ConfigError("key outside any section at line " + std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        if (sections[current].count(key)) {
            throw ConfigError("duplicate key " + current + "." + key);
        }
        sections[current][key] = trim(line.substr(eq + 1));
    }

    ScenarioConfig cfg;
    {
        SectionReader plant{"plant", sections["plant"]};
        cfg.plant.theta = plant.required_number("theta");
        plant.finish();
    }
    {
        SectionReader ctl{"controller", sections["controller"]};
        cfg.controller.eps = ctl.required_number("eps");
        cfg.controller.c = ctl.required_number("c");
        cfg.controller.r = ctl.required_number("r");
        cfg.controller.sigma = ctl.required_number("sigma");
        if (auto v = ctl.take("omega")) {
            cfg.controller.omega = parse_number("controller.omega", *v);
            cfg.omega_explicit = true;
        }
        cfg.controller.fp_tol = ctl.number("fp_tol", 1e-12);
        cfg.controller.fp_max_iter = static_cast<int>(ctl.number("fp_max_iter", 50));
        cfg.controller.blowup_limit = ctl.number("blowup_limit", 1e12);
        ctl.finish();
    }
    {
        SectionReader dist{"disturbance", sections["disturbance"]};
        if (auto v = dist.take("kind")) cfg.disturbance.kind = trim(*v);
        cfg.disturbance.amplitude = dist.number("amplitude", 0.0);
        cfg.disturbance.frequency = dist.number("frequency", 0.0);
        cfg.disturbance.phase = dist.number("phase", 0.0);
        if (auto v = dist.take("cell_width")) {
            cfg.disturbance.cell_width = parse_number("disturbance.cell_width", *v);
        }
        if (auto v = dist.take("values")) {
            cfg.disturbance.values = parse_list("disturbance.values", *v);
        }
        cfg.disturbance.t0 = dist.number("t0", 0.0);
        if (auto v = dist.take("dt")) {
            cfg.disturbance.dt = parse_number("disturbance.dt", *v);
        }
        dist.finish();
    }
    {
        SectionReader init{"initial", sections["initial"]};
        const auto parse_kind = [&](const std::string& key, const std::string& v) {
            if (v == "constant") return InitialSpec::Kind::constant;
            if (v == "ramp") return InitialSpec::Kind::ramp;
            if (v == "spike") return InitialSpec::Kind::spike;
            if (v == "samples") return InitialSpec::Kind::samples;
            throw ConfigError(key + " must be one of constant, ramp, spike, samples");
        };
        if (auto v = init.take("x0_kind")) cfg.x0.kind = parse_kind("initial.x0_kind", trim(*v));
        cfg.x0.value = init.number("x0_value", 0.0);
        cfg.x0.from = init.number("x0_from", 0.0);
        cfg.x0.to = init.number("x0_to", 0.0);
        cfg.x0.n = static_cast<int>(init.number("x0_n", 1));
        if (auto v = init.take("x0_samples")) {
            cfg.x0.samples = parse_list("initial.x0_samples", *v);
        }
        if (auto v = init.take("u0_kind")) cfg.u0.kind = parse_kind("initial.u0_kind", trim(*v));
        cfg.u0.value = init.number("u0_value", 0.0);
        cfg.u0.from = init.number("u0_from", 0.0);
        cfg.u0.to = init.number("u0_to", 0.0);
        if (auto v = init.take("u0_samples")) {
            cfg.u0.samples = parse_list("initial.u0_samples", *v);
        }
        if (auto v = init.take("x0_derivative_sup")) {
            cfg.x0_derivative_sup = parse_number("initial.x0_derivative_sup", *v);
        }
        auto th0 = init.take("theta_hat0");
        if (!th0) throw ConfigError("missing required key initial.theta_hat0");
        cfg.theta_hat0 = parse_number("initial.theta_hat0", *th0);
        init.finish();
    }
    {
        SectionReader sim{"simulation", sections["simulation"]};
        if (auto v = sim.take("h")) {
            cfg.h = parse_number("simulation.h", *v);
            cfg.h_explicit = true;
        }
        cfg.t_final = sim.required_number("t_final");
        if (auto v = sim.take("seed")) cfg.seed = parse_seed("simulation.seed", *v);
        sim.finish();
    }
    {
        SectionReader out{"output", sections["output"]};
        if (auto v = out.take("trace")) cfg.trace_path = trim(*v);
        if (auto v = out.take("reports")) cfg.reports_path = trim(*v);
        out.finish();
    }
    cfg.finalize();
    return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

HistoryWindow build_x0(const ScenarioConfig& cfg) {
    const int n = cfg.intervals;
    const double r = cfg.controller.r;
    std::vector<double> s(static_cast<size_t>(n) + 1);
    switch (cfg.x0.kind) {
        case InitialSpec::Kind::constant:
            std::fill(s.begin(), s.end(), cfg.x0.value);
            break;
        case InitialSpec::Kind::ramp:
            for (int j = 0; j <= n; ++j) {
                s[static_cast<size_t>(j)] =
                    cfg.x0.from + (cfg.x0.to - cfg.x0.from) * (static_cast<double>(j) / n);
            }
            break;
        case InitialSpec::Kind::spike:
            // Zero on [-r, -r/(n+1)], then linear up to eps at s = 0. The
            // ramp gets steeper with the sharpness index.
            for (int j = 0; j <= n; ++j) {
                const double t = (static_cast<double>(j) - n) * cfg.h;
                s[static_cast<size_t>(j)] =
                    std::max(0.0, cfg.controller.eps * ((cfg.x0.n + 1) / r * t + 1.0));
            }
            break;
        case InitialSpec::Kind::samples:
            s = cfg.x0.samples;
            break;
    }
    return HistoryWindow(std::move(s), cfg.h, 0.0);
}

std::vector<double> build_u0_interior(const ScenarioConfig& cfg) {
    const int n = cfg.intervals;
    switch (cfg.u0.kind) {
        case InitialSpec::Kind::constant:
            return std::vector<double>(static_cast<size_t>(n), cfg.u0.value);
        case InitialSpec::Kind::ramp: {
            std::vector<double> s(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) {
                s[static_cast<size_t>(j)] =
                    cfg.u0.from + (cfg.u0.to - cfg.u0.from) * (static_cast<double>(j) / n);
            }
            return s;
        }
        case InitialSpec::Kind::samples:
            return cfg.u0.samples;
        case InitialSpec::Kind::spike:
            throw ConfigError("initial.u0_kind does not support spike");
    }
    return {};
}

DisturbanceSpec build_disturbance(const ScenarioConfig& cfg) {
    const DisturbanceConfig& d = cfg.disturbance;
    if (d.kind == "zero") return DisturbanceSpec::zero();
    if (d.kind == "constant") return DisturbanceSpec::constant(d.amplitude);
    if (d.kind == "sinusoid") return DisturbanceSpec::sinusoid(d.amplitude, d.frequency, d.phase);
    if (d.kind == "uniform_noise") {
        return DisturbanceSpec::uniform_noise(d.amplitude, cfg.seed,
                                              d.cell_width.value_or(cfg.h));
    }
    return DisturbanceSpec::table(d.values, d.t0, d.dt.value_or(cfg.h));
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const CheckTolerances& tols) {
    RunOptions opts;
    opts.x0_dot_sup = cfg.x0_derivative_sup;
    const HistoryWindow x0 = build_x0(cfg);
    const std::vector<double> u0 = build_u0_interior(cfg);
    ScenarioResult result{
        run(cfg.plant, cfg.controller, build_disturbance(cfg), x0, u0, cfg.theta_hat0,
            cfg.t_final, opts),
        {},
        false};
    result.reports = run_trace_checks(result.trace, tols);
    result.all_passed = std::all_of(result.reports.begin(), result.reports.end(),
                                    [](const BoundReport& r) { return r.pass; });
    return result;
}

namespace {

void apply_axis(ScenarioConfig& cfg, const std::string& axis, double value) {
    if (axis == "theta") {
        cfg.plant.theta = value;
    } else if (axis == "c") {
        cfg.controller.c = value;
    } else if (axis == "eps") {
        cfg.controller.eps = value;
    } else if (axis == "sigma") {
        cfg.controller.sigma = value;
    } else if (axis == "d_amplitude") {
        if (cfg.disturbance.kind == "zero") {
            throw ConfigError("axis d_amplitude needs a non-zero disturbance kind");
        }
        cfg.disturbance.amplitude = value;
    } else if (axis == "h") {
        cfg.h = value;
        cfg.h_explicit = true;
    } else {
        throw ConfigError("axis '" + axis +
                          "' is not sweepable (use theta, c, eps, sigma, d_amplitude or h)");
    }
    cfg.finalize();
}

}  // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& axis,
                            const std::vector<double>& values, const CheckTolerances& tols) {
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        ScenarioConfig cfg = base;
        apply_axis(cfg, axis, v);
        ScenarioResult res = run_scenario(cfg, tols);
        SweepRow row;
        row.axis = axis;
        row.value = v;
        row.final_abs_x = std::abs(res.trace.rows.back().x);
        double mx = 0.0;
        for (const TraceRow& tr : res.trace.rows) {
            if (tr.t >= cfg.controller.r) mx = std::max(mx, std::abs(tr.x));
        }
        row.max_abs_x_after_r = mx;
        row.theta_err_final = std::abs(res.trace.rows.back().theta_hat - cfg.plant.theta);
        row.identifier_bound = estimation_bound(cfg.controller, res.trace.disturbance.d_sup);
        row.asymptotic_gain = std::pow(2.0, -0.25) / cfg.controller.c;
        for (const BoundReport& rep : res.reports) {
            row.margins.emplace_back(rep.name, rep.worst_margin);
        }
        row.all_passed = res.all_passed;
        rows.push_back(std::move(row));
    }
    return rows;
}

ConvergenceResult convergence_study(const ScenarioConfig& cfg, int halvings) {
    if (halvings < 2) throw ConfigError("convergence study needs halvings >= 2");
    if (cfg.x0.kind == InitialSpec::Kind::samples || cfg.u0.kind == InitialSpec::Kind::samples) {
        throw ConfigError("convergence study needs formula initial profiles, not sample tables");
    }

    // Pin the disturbance to the base grid so every refinement integrates
    // the same right-hand side.
    ScenarioConfig base = cfg;
    if (base.disturbance.kind == "uniform_noise" && !base.disturbance.cell_width) {
        base.disturbance.cell_width = base.h;
    }
    if (base.disturbance.kind == "table" && !base.disturbance.dt) {
        base.disturbance.dt = base.h;
    }

    std::vector<SimulationTrace> traces;
    std::vector<double> residuals;
    for (int k = 0; k <= halvings; ++k) {
        ScenarioConfig level = base;
        level.h = base.h / std::pow(2.0, k);
        level.h_explicit = true;
        level.finalize();
        ScenarioResult res = run_scenario(level);
        residuals.push_back(res.reports.front().vacuous
                                ? 0.0
                                : res.reports.front().constants.at("worst_residual"));
        traces.push_back(std::move(res.trace));
    }

    // Compare on the common (base) grid: time j h sits at row j 2^k of run k.
    const SimulationTrace& finest = traces.back();
    const long base_steps = traces.front().steps();
    std::vector<double> self_dist(traces.size(), kNaN);
    for (size_t k = 0; k + 1 < traces.size(); ++k) {
        const long stride_k = 1L << k;
        const long stride_f = 1L << halvings;
        double m = 0.0;
        for (long j = 0; j <= base_steps; ++j) {
            const double xk = traces[k].rows[static_cast<size_t>(j * stride_k)].x;
            const double xf = finest.rows[static_cast<size_t>(j * stride_f)].x;
            m = std::max(m, std::abs(xk - xf));
        }
        self_dist[k] = m;
    }

    ConvergenceResult out;
    out.exact = std::all_of(residuals.begin(), residuals.end(), [](double r) { return r == 0.0; });
    for (size_t k = 0; k < traces.size(); ++k) {
        ConvergenceRow row;
        row.h = traces[k].h;
        row.identity_residual = residuals[k];
        row.self_distance = self_dist[k];
        row.identity_order = (k + 1 < residuals.size() && residuals[k + 1] > 0.0)
                                 ? std::log2(residuals[k] / residuals[k + 1])
                                 : kNaN;
        row.self_distance_order =
            (k + 2 < traces.size() && self_dist[k + 1] > 0.0)
                ? std::log2(self_dist[k] / self_dist[k + 1])
                : kNaN;
        out.rows.push_back(row);
    }
    out.observed_order =
        out.exact ? kNaN : out.rows[static_cast<size_t>(halvings) - 1].identity_order;
    return out;
}

}  // namespace dacsim
