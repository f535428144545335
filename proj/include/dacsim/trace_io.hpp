// CSV trace serialization (shortest round-trip decimals, bit-exact on
// re-read), report formatting, and reconstruction of a full trace from a
// stored CSV plus its scenario configuration.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dacsim/scenario.hpp"

namespace dacsim {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void write_trace_csv(const SimulationTrace& trace, std::ostream& out);
void write_trace_csv(const SimulationTrace& trace, const std::string& path);

/// Columns: t, x, u, p, theta_hat, d.
std::vector<TraceRow> read_trace_rows(const std::string& path);

/// Rebuild the metadata a stored CSV cannot carry (initial profiles, the
/// implied disturbance on [-r, 0), the identifier update log) from the
/// scenario configuration, replaying the identifier over the stored rows.
/// Throws PreconditionError if the rows are inconsistent with the config.
SimulationTrace reconstruct_trace(const std::vector<TraceRow>& rows, const ScenarioConfig& cfg);

std::string report_line(const BoundReport& report);
std::string reports_to_json(const std::vector<BoundReport>& reports);

/// JSON object with one record per bound plus the identifier update log
/// (boundary time, estimate, whether it updated, the maximizer used).
std::string run_outputs_json(const SimulationTrace& trace,
                             const std::vector<BoundReport>& reports);

/// Writes <path_base>.txt (one line per bound) and <path_base>.json.
void write_reports(const std::vector<BoundReport>& reports, const std::string& path_base);

/// Same, with the update log embedded in the JSON file.
void write_run_outputs(const SimulationTrace& trace, const std::vector<BoundReport>& reports,
                       const std::string& path_base);

std::string sweep_table_csv(const std::vector<SweepRow>& rows);
std::string convergence_table_csv(const ConvergenceResult& result);

}  // namespace dacsim
