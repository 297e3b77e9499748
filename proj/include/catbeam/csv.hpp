#pragma once

// CSV emission with a stable schema: comment lines echoing the resolved
// configuration and the artifact version, then
// time,event_index,fidelity,purity,n_a,n_b,parity,trace_error
// with 12-significant-digit decimal floats and LF line endings.

#include "catbeam/config.hpp"
#include "catbeam/observables.hpp"

#include <string>
#include <vector>

namespace catbeam {

std::string format_trajectory_csv(const RunConfig& cfg, const TrajectoryRecord& record);

struct SweepRow {
  std::string value_token;  // literal value string from the command line
  double value = 0.0;
  double peak_fidelity = 0.0;
  double peak_time = 0.0;
  double final_fidelity = 0.0;
};

// Summary schema: <key>,peak_fidelity,time_of_peak,final_fidelity, rows in
// ascending order of the swept value.
std::string format_sweep_summary(const RunConfig& base_cfg, const std::string& key,
                                 std::vector<SweepRow> rows);

// Writes through a temp file in the same directory, then renames.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace catbeam
