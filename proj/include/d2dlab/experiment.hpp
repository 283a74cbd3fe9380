#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "d2dlab/config.hpp"

namespace d2dlab {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "v1";

// Runs the configured experiment and writes its CSV files plus manifest.json
// under cfg.out_dir (created if missing). `log` gets one line per file.
// Returns the paths written. Replications run in parallel; rows are written
// in replication order by the calling thread, so outputs are byte-stable.
std::vector<std::string> run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Digest of every CSV under `dir`, recursively: row counts and per-numeric-
// column mean with a 95% interval once there are two or more rows. Returns
// false (after printing "no data") when no data rows were found.
bool report_summary(const std::string& dir, std::ostream& out);

}  // namespace d2dlab
