#include "catbeam/csv.hpp"

#include "catbeam/version.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace catbeam {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void echo_header(std::ostringstream& out, const RunConfig& cfg) {
  out << "# catbeam " << kVersion << "\n";
  std::istringstream lines(echo_config(cfg));
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << "\n";
}

}  // namespace

std::string format_trajectory_csv(const RunConfig& cfg, const TrajectoryRecord& record) {
  std::ostringstream out;
  echo_header(out, cfg);
  out << "# events_applied = " << record.events_applied << "\n";
  out << "# dropped_overlaps = " << record.dropped_overlaps << "\n";
  out << "# truncation_warnings = " << record.truncation_warnings << "\n";
  for (const auto& w : record.warnings) out << "# warning: " << w << "\n";
  out << "time,event_index,fidelity,purity,n_a,n_b,parity,trace_error\n";
  for (const auto& s : record.samples) {
    out << fmt(s.time) << ',' << s.event_index << ',' << fmt(s.fidelity) << ','
        << fmt(s.purity) << ',' << fmt(s.n_a) << ',' << fmt(s.n_b) << ',' << fmt(s.parity)
        << ',' << fmt(s.trace_error) << "\n";
  }
  return out.str();
}

std::string format_sweep_summary(const RunConfig& base_cfg, const std::string& key,
                                 std::vector<SweepRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
  std::ostringstream out;
  echo_header(out, base_cfg);
  out << "# swept_key = " << key << "\n";
  out << key << ",peak_fidelity,time_of_peak,final_fidelity\n";
  for (const auto& r : rows)
    out << r.value_token << ',' << fmt(r.peak_fidelity) << ',' << fmt(r.peak_time) << ','
        << fmt(r.final_fidelity) << "\n";
  return out.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
}

}  // namespace catbeam
