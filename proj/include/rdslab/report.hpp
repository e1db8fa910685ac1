#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rdslab/config.hpp"
#include "rdslab/experiments.hpp"

namespace rdslab {

/// Serialized run: config hash, toolkit version, one verdict block per test,
/// the series file names, and wall-clock timings (kept in a separate field so
/// reports are byte-identical across reruns modulo "timings").
struct ReportEntry {
  std::string command;
  ExperimentResult result;
  double wall_seconds = 0.0;
};

Json make_report(const ExperimentConfig& config, const std::vector<ReportEntry>& entries);

/// Writes report.json and every CSV under out_dir; creates the directory.
void write_report(const std::filesystem::path& out_dir, const Json& report,
                  const std::vector<ReportEntry>& entries);

/// One-screen human summary: chain, maps, mixing fit, conditioned density,
/// s^2 and norms. Flags the degenerate (coboundary) case.
std::string describe(const ExperimentConfig& config, Workspace& workspace);

/// True iff every verdict in every entry passed.
bool all_passed(const std::vector<ReportEntry>& entries);

inline const char* toolkit_version() { return "0.1.0"; }

}  // namespace rdslab
