// Command-line front end: scenario configs in, traces/reports/tables out.
//
// Exit status: 0 ok, 1 check failure, 2 configuration error, 3 simulation
// error.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dacsim/scenario.hpp"
#include "dacsim/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSimulationError = 3;

fs::path output_dir(const std::string& cli_override) {
    if (!cli_override.empty()) return cli_override;
    if (const char* env = std::getenv("DACSIM_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

std::vector<double> split_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw dacsim::ConfigError("--values needs a comma-separated list of numbers");
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    const dacsim::ScenarioConfig cfg = dacsim::parse_config_file(config_path);
    const dacsim::ScenarioResult result = dacsim::run_scenario(cfg);
    const fs::path dir = output_dir(out_dir);
    fs::create_directories(dir);
    dacsim::write_trace_csv(result.trace, (dir / cfg.trace_path).string());
    dacsim::write_run_outputs(result.trace, result.reports, (dir / cfg.reports_path).string());
    for (const dacsim::BoundReport& rep : result.reports) {
        std::cout << dacsim::report_line(rep) << '\n';
    }
    std::cout << "trace: " << (dir / cfg.trace_path).string() << '\n';
    return result.all_passed ? kExitOk : kExitCheckFailure;
}

int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values,
              const std::string& out_dir) {
    const dacsim::ScenarioConfig cfg = dacsim::parse_config_file(config_path);
    const auto rows = dacsim::sweep(cfg, axis, split_values(values));
    const std::string table = dacsim::sweep_table_csv(rows);
    std::cout << table;
    const fs::path dir = output_dir(out_dir);
    fs::create_directories(dir);
    std::ofstream out(dir / "sweep.csv", std::ios::binary);
    out << table;
    const bool ok = std::all_of(rows.begin(), rows.end(),
                                [](const dacsim::SweepRow& r) { return r.all_passed; });
    return ok ? kExitOk : kExitCheckFailure;
}

int cmd_converge(const std::string& config_path, int halvings, const std::string& out_dir) {
    const dacsim::ScenarioConfig cfg = dacsim::parse_config_file(config_path);
    const dacsim::ConvergenceResult result = dacsim::convergence_study(cfg, halvings);
    const std::string table = dacsim::convergence_table_csv(result);
    std::cout << table;
    const fs::path dir = output_dir(out_dir);
    fs::create_directories(dir);
    std::ofstream out(dir / "converge.csv", std::ios::binary);
    out << table;
    return kExitOk;
}

int cmd_check(const std::string& trace_path, const std::string& config_path,
              const std::string& out_dir) {
    const dacsim::ScenarioConfig cfg = dacsim::parse_config_file(config_path);
    const auto rows = dacsim::read_trace_rows(trace_path);
    const dacsim::SimulationTrace trace = dacsim::reconstruct_trace(rows, cfg);
    const auto reports = dacsim::run_trace_checks(trace);
    const fs::path dir = output_dir(out_dir);
    fs::create_directories(dir);
    dacsim::write_run_outputs(trace, reports, (dir / cfg.reports_path).string());
    bool ok = true;
    for (const dacsim::BoundReport& rep : reports) {
        std::cout << dacsim::report_line(rep) << '\n';
        ok = ok && rep.pass;
    }
    return ok ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delay-adaptive control loop simulator and bound checker"};
    app.require_subcommand(1);

    std::string out_dir;
    app.add_option("--out-dir", out_dir,
                   "output directory (overrides DACSIM_OUTPUT_DIR; default: cwd)");

    std::string run_config;
    CLI::App* run_cmd = app.add_subcommand("run", "simulate a scenario and check every bound");
    run_cmd->add_option("config", run_config, "scenario config file")->required();

    std::string sweep_config, sweep_axis, sweep_values;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a scenario across one parameter axis");
    sweep_cmd->add_option("config", sweep_config, "scenario config file")->required();
    sweep_cmd->add_option("--axis", sweep_axis, "theta, c, eps, sigma, d_amplitude or h")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();

    std::string conv_config;
    int halvings = 2;
    CLI::App* conv_cmd = app.add_subcommand("converge", "step-halving convergence study");
    conv_cmd->add_option("config", conv_config, "scenario config file")->required();
    conv_cmd->add_option("--halvings", halvings, "number of halvings (>= 2)")->required();

    std::string check_trace, check_config;
    CLI::App* check_cmd = app.add_subcommand("check", "re-run verification on a stored trace");
    check_cmd->add_option("trace", check_trace, "trace CSV file")->required();
    check_cmd->add_option("config", check_config, "scenario config file")->required();

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed()) return cmd_run(run_config, out_dir);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, sweep_axis, sweep_values, out_dir);
        if (conv_cmd->parsed()) return cmd_converge(conv_config, halvings, out_dir);
        if (check_cmd->parsed()) return cmd_check(check_trace, check_config, out_dir);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    } catch (const dacsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const dacsim::BlowUpError& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return kExitSimulationError;
    } catch (const dacsim::Error& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return kExitSimulationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSimulationError;
    }
    return kExitConfigError;
}
