#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dacsim/scenario.hpp"
#include "dacsim/trace_io.hpp"

namespace py = pybind11;
using namespace dacsim;

PYBIND11_MODULE(_dacsim, m) {
    m.doc() = "delay-adaptive control loop simulator and bound checker";

    py::register_exception<Error>(m, "DacsimError");

    py::class_<HistoryWindow>(m, "HistoryWindow")
        .def(py::init<std::vector<double>, double, double>(), py::arg("samples"), py::arg("step"),
             py::arg("t_end") = 0.0)
        .def_static("constant", &HistoryWindow::constant, py::arg("value"), py::arg("step"),
                    py::arg("intervals"), py::arg("t_end") = 0.0)
        .def_property_readonly("intervals", &HistoryWindow::intervals)
        .def_property_readonly("step", &HistoryWindow::step)
        .def_property_readonly("horizon", &HistoryWindow::horizon)
        .def_property_readonly("t_end", &HistoryWindow::t_end)
        .def("samples",
             [](const HistoryWindow& w) {
                 return std::vector<double>(w.samples().begin(), w.samples().end());
             })
        .def("push", [](const HistoryWindow& w, double v) { return push(w, v); });

    m.def("l2_norm_sq", &l2_norm_sq);
    m.def("inner", &inner);
    m.def("sup_norm", &sup_norm);
    m.def("l1_norm", &l1_norm);
    m.def("derivative_norms", [](const HistoryWindow& w) {
        const DerivativeNorms n = derivative_norms(w);
        return py::make_tuple(n.sup, n.l2);
    });

    py::class_<ControllerConfig>(m, "ControllerConfig")
        .def(py::init([](double eps, double c, double r, double sigma, double omega, double fp_tol,
                         int fp_max_iter, double blowup_limit) {
                 ControllerConfig cfg{eps, c, r, sigma,
                                      omega > 0.0 ? omega : ControllerConfig::default_omega(c, r),
                                      fp_tol, fp_max_iter, blowup_limit};
                 cfg.validate();
                 return cfg;
             }),
             py::arg("eps"), py::arg("c"), py::arg("r"), py::arg("sigma"), py::arg("omega") = 0.0,
             py::arg("fp_tol") = 1e-12, py::arg("fp_max_iter") = 50,
             py::arg("blowup_limit") = 1e12)
        .def_readonly("eps", &ControllerConfig::eps)
        .def_readonly("c", &ControllerConfig::c)
        .def_readonly("r", &ControllerConfig::r)
        .def_readonly("sigma", &ControllerConfig::sigma)
        .def_readonly("omega", &ControllerConfig::omega);

    py::class_<PlantParams>(m, "PlantParams")
        .def(py::init<double>(), py::arg("theta"))
        .def_readonly("theta", &PlantParams::theta);

    py::class_<DisturbanceSpec>(m, "DisturbanceSpec")
        .def_static("zero", &DisturbanceSpec::zero)
        .def_static("constant", &DisturbanceSpec::constant, py::arg("value"))
        .def_static("sinusoid", &DisturbanceSpec::sinusoid, py::arg("amplitude"),
                    py::arg("frequency"), py::arg("phase") = 0.0)
        .def_static("uniform_noise", &DisturbanceSpec::uniform_noise, py::arg("amplitude"),
                    py::arg("seed"), py::arg("cell_width"))
        .def_static("table", &DisturbanceSpec::table, py::arg("values"), py::arg("t0"),
                    py::arg("dt"))
        .def_readonly("d_sup", &DisturbanceSpec::d_sup);

    m.def("disturbance_eval", &disturbance_eval);
    m.def("p_functional", &p_functional);
    m.def("q_functional", &q_functional);
    m.def("feedback", &feedback);
    m.def("estimation_bound", &estimation_bound);
    m.def("constant_M", &constant_M);
    m.def("constant_rho", &constant_rho);
    m.def("lipschitz_h", &lipschitz_h);
    m.def("lipschitz_l", &lipschitz_l);
    m.def("continuity_log_factor", &continuity_log_factor);

    py::class_<TraceRow>(m, "TraceRow")
        .def_readonly("t", &TraceRow::t)
        .def_readonly("x", &TraceRow::x)
        .def_readonly("u", &TraceRow::u)
        .def_readonly("p", &TraceRow::p)
        .def_readonly("theta_hat", &TraceRow::theta_hat)
        .def_readonly("d", &TraceRow::d);

    py::class_<SimulationTrace>(m, "SimulationTrace")
        .def_readonly("rows", &SimulationTrace::rows)
        .def_readonly("h", &SimulationTrace::h)
        .def_readonly("intervals", &SimulationTrace::intervals)
        .def_property_readonly("steps", &SimulationTrace::steps)
        .def("to_csv", [](const SimulationTrace& tr) {
            std::ostringstream out;
            write_trace_csv(tr, out);
            return out.str();
        });

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("name", &BoundReport::name)
        .def_readonly("constants", &BoundReport::constants)
        .def_readonly("worst_margin", &BoundReport::worst_margin)
        .def_readonly("worst_time", &BoundReport::worst_time)
        .def_readonly("tolerance", &BoundReport::tolerance)
        .def_readonly("pass_", &BoundReport::pass)
        .def_readonly("vacuous", &BoundReport::vacuous)
        .def_readonly("note", &BoundReport::note)
        .def("__repr__", [](const BoundReport& r) { return report_line(r); });

    m.def(
        "run",
        [](const PlantParams& plant, const ControllerConfig& cfg, const DisturbanceSpec& spec,
           const HistoryWindow& x0, const std::vector<double>& u0_interior, double theta_hat0,
           double t_final, bool with_identifier) {
            RunOptions opts;
            opts.with_identifier = with_identifier;
            return run(plant, cfg, spec, x0, u0_interior, theta_hat0, t_final, opts);
        },
        py::arg("plant"), py::arg("config"), py::arg("disturbance"), py::arg("x0"),
        py::arg("u0_interior"), py::arg("theta_hat0"), py::arg("t_final"),
        py::arg("with_identifier") = true);

    m.def("check_state_bound",
          [](const SimulationTrace& tr) { return check_state_bound(tr); });
    m.def("check_input_bound",
          [](const SimulationTrace& tr) { return check_input_bound(tr); });
    m.def("check_identity", [](const SimulationTrace& tr) { return check_identity(tr); });
    m.def("check_identifier_bound",
          [](const SimulationTrace& tr) { return check_identifier_bound(tr); });
    m.def("check_lyapunov_decay",
          [](const SimulationTrace& tr) { return check_lyapunov_decay(tr); });
    m.def("run_trace_checks", [](const SimulationTrace& tr) { return run_trace_checks(tr); });
    m.def("denominator_floor_check", &denominator_floor_check);
    m.def("gain_lipschitz_check", &gain_lipschitz_check, py::arg("xw"), py::arg("uw"),
          py::arg("yw"), py::arg("ww"), py::arg("R"), py::arg("config"),
          py::arg("lipschitz_rel") = 1e-9);
    m.def("initial_condition_continuity_check", &initial_condition_continuity_check);

    m.def("parse_config", &parse_config);
    m.def("run_scenario", [](const std::string& text) {
        const ScenarioConfig cfg = parse_config(text);
        const ScenarioResult res = run_scenario(cfg);
        return py::make_tuple(res.trace, res.reports, res.all_passed);
    });
}
