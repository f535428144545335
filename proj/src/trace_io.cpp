#include "dacsim/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dacsim {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_field(const std::string& field, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw PreconditionError("malformed CSV number at " + where + ": '" + field + "'");
    }
    return v;
}

}  // namespace

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
    out << "t,x,u,p,theta_hat,d\n";
    for (const TraceRow& r : trace.rows) {
        out << format_double(r.t) << ',' << format_double(r.x) << ',' << format_double(r.u) << ','
            << format_double(r.p) << ',' << format_double(r.theta_hat) << ','
            << format_double(r.d) << '\n';
    }
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open trace output file " + path);
    write_trace_csv(trace, out);
}

std::vector<TraceRow> read_trace_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file " + path);
    std::string line;
    if (!std::getline(in, line) || line != "t,x,u,p,theta_hat,d") {
        throw PreconditionError("trace file " + path + " does not start with the expected header");
    }
    std::vector<TraceRow> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        double vals[6];
        for (int k = 0; k < 6; ++k) {
            if (!std::getline(ss, field, ',')) {
                throw PreconditionError("short CSV row at line " + std::to_string(lineno));
            }
            vals[k] = parse_field(field, path + ":" + std::to_string(lineno));
        }
        rows.push_back({vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]});
    }
    return rows;
}

SimulationTrace reconstruct_trace(const std::vector<TraceRow>& rows, const ScenarioConfig& cfg) {
    if (rows.empty()) throw PreconditionError("trace has no rows");
    const HistoryWindow x0 = build_x0(cfg);
    const std::vector<double> u0 = build_u0_interior(cfg);
    ClosedLoopState init = make_initial_state(x0, u0, cfg.theta_hat0, cfg.controller, cfg.plant);

    const double h = cfg.h;
    const int n = cfg.intervals;
    const double tol = 1e-9 * std::max(1.0, std::abs(rows.back().t));
    if (std::abs(rows.front().t) > tol) {
        throw PreconditionError("trace must start at t = 0");
    }
    for (size_t i = 1; i < rows.size(); ++i) {
        if (std::abs(rows[i].t - static_cast<double>(i) * h) > tol) {
            throw PreconditionError("trace rows are not spaced by the configured step h");
        }
    }
    if (std::abs(rows.front().x - x0.back()) > 1e-9 ||
        std::abs(rows.front().u - init.uw.back()) > 1e-6) {
        throw PreconditionError("trace initial row does not match the configured initial profiles");
    }

    SimulationTrace trace;
    trace.rows = rows;
    trace.config = cfg.controller;
    trace.plant = cfg.plant;
    trace.disturbance = build_disturbance(cfg);
    trace.h = h;
    trace.intervals = n;
    trace.x0_samples.assign(x0.samples().begin(), x0.samples().end());
    trace.u0_samples.assign(init.uw.samples().begin(), init.uw.samples().end());
    trace.init_fp_iterations = init.last_fp_iterations;
    trace.init_fp_residual = init.last_fp_residual;

    trace.virtual_d.resize(static_cast<size_t>(n));
    double dsup0 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double slope = (x0[j + 1] - x0[j]) / h;
        dsup0 = std::max(dsup0, std::abs(slope));
        trace.virtual_d[static_cast<size_t>(j)] = slope - cfg.plant.theta * x0[j] - init.uw[j];
    }
    trace.x0_dot_sup = cfg.x0_derivative_sup.value_or(dsup0);

    // Replay the identifier over the stored trajectory to recover the
    // update log (boundary times, maximizers, estimates).
    Identifier ident(cfg.theta_hat0, cfg.controller.r);
    HistoryWindow xw = x0;
    HistoryWindow uw = init.uw;
    ident.observe(0.0, xw, uw);
    for (size_t i = 1; i < rows.size(); ++i) {
        xw.push_in_place(rows[i].x);
        uw.push_in_place(rows[i].u);
        const double t = static_cast<double>(i) * h;
        ident.observe(t, xw, uw);
        if (i % static_cast<size_t>(n) == 0) {
            ident.boundary_update(cfg.controller);
            ident.observe(t, xw, uw);
        }
        if (std::abs(ident.theta_hat() - rows[i].theta_hat) >
            1e-9 * std::max(1.0, std::abs(ident.theta_hat()))) {
            throw PreconditionError(
                "stored theta_hat column disagrees with the replayed identifier at t=" +
                std::to_string(t));
        }
    }
    trace.update_log = ident.update_log();
    return trace;
}

std::string report_line(const BoundReport& r) {
    std::ostringstream out;
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
    if (r.vacuous) {
        out << " (vacuous)";
    } else {
        out << " worst_margin=" << format_double(r.worst_margin)
            << " at t=" << format_double(r.worst_time)
            << " tolerance=" << format_double(r.tolerance);
    }
    if (!r.note.empty()) out << " -- " << r.note;
    return out.str();
}

std::string reports_to_json(const std::vector<BoundReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BoundReport& r : reports) {
        nlohmann::json item{{"name", r.name},
                            {"pass", r.pass},
                            {"vacuous", r.vacuous},
                            {"worst_margin", r.worst_margin},
                            {"worst_time", r.worst_time},
                            {"tolerance", r.tolerance},
                            {"note", r.note}};
        nlohmann::json constants = nlohmann::json::object();
        for (const auto& [k, v] : r.constants) constants[k] = v;
        item["constants"] = constants;
        arr.push_back(item);
    }
    return arr.dump(2);
}

std::string run_outputs_json(const SimulationTrace& trace,
                             const std::vector<BoundReport>& reports) {
    nlohmann::json j;
    j["reports"] = nlohmann::json::parse(reports_to_json(reports));
    nlohmann::json updates = nlohmann::json::array();
    for (const IdentifierUpdate& up : trace.update_log) {
        updates.push_back({{"time", up.time},
                           {"interval", up.interval},
                           {"theta_hat", up.theta_hat},
                           {"updated", up.updated},
                           {"best_norm", up.best_norm},
                           {"best_time", up.best_time}});
    }
    j["identifier_updates"] = updates;
    j["fixed_point"] = {{"max_iterations", trace.fp_stats.max_iterations},
                        {"max_residual", trace.fp_stats.max_residual},
                        {"initial_residual", trace.init_fp_residual}};
    return j.dump(2);
}

void write_reports(const std::vector<BoundReport>& reports, const std::string& path_base) {
    {
        std::ofstream out(path_base + ".txt", std::ios::binary);
        if (!out) throw Error("cannot open report file " + path_base + ".txt");
        for (const BoundReport& r : reports) out << report_line(r) << '\n';
    }
    {
        std::ofstream out(path_base + ".json", std::ios::binary);
        if (!out) throw Error("cannot open report file " + path_base + ".json");
        out << reports_to_json(reports) << '\n';
    }
}

void write_run_outputs(const SimulationTrace& trace, const std::vector<BoundReport>& reports,
                       const std::string& path_base) {
    {
        std::ofstream out(path_base + ".txt", std::ios::binary);
        if (!out) throw Error("cannot open report file " + path_base + ".txt");
        for (const BoundReport& r : reports) out << report_line(r) << '\n';
    }
    {
        std::ofstream out(path_base + ".json", std::ios::binary);
        if (!out) throw Error("cannot open report file " + path_base + ".json");
        out << run_outputs_json(trace, reports) << '\n';
    }
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "axis,value,final_abs_x,max_abs_x_after_r,theta_err_final,identifier_bound,"
           "asymptotic_gain";
    if (!rows.empty()) {
        for (const auto& [name, margin] : rows.front().margins) out << ",margin_" << name;
    }
    out << ",all_passed\n";
    for (const SweepRow& r : rows) {
        out << r.axis << ',' << format_double(r.value) << ',' << format_double(r.final_abs_x)
            << ',' << format_double(r.max_abs_x_after_r) << ','
            << format_double(r.theta_err_final) << ',' << format_double(r.identifier_bound)
            << ',' << format_double(r.asymptotic_gain);
        for (const auto& [name, margin] : r.margins) out << ',' << format_double(margin);
        out << ',' << (r.all_passed ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string convergence_table_csv(const ConvergenceResult& result) {
    std::ostringstream out;
    out << "h,identity_residual,self_distance,identity_order,self_distance_order\n";
    for (const ConvergenceRow& r : result.rows) {
        out << format_double(r.h) << ',' << format_double(r.identity_residual) << ','
            << format_double(r.self_distance) << ',' << format_double(r.identity_order) << ','
            << format_double(r.self_distance_order) << '\n';
    }
    if (result.exact) {
        out << "# observed order: exact (all residuals zero)\n";
    } else {
        out << "# observed order: " << format_double(result.observed_order) << '\n';
    }
    return out.str();
}

}  // namespace dacsim
