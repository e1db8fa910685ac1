#pragma once

#include <string>
#include <vector>

#include "rdslab/config.hpp"

namespace rdslab {

/// One pass/fail statement with its statistical resolution attached.
struct Verdict {
  std::string test;
  Json params = Json::object();
  double statistic = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // statistical resolution (CI radius, DKW band, ...)
  bool pass = false;
  Json extra = Json::object();
};

struct SeriesFile {
  std::string name;  // file name, e.g. "decay_exp1.csv"
  std::string csv;   // full content including header line
};

struct ExperimentResult {
  std::vector<Verdict> verdicts;
  std::vector<SeriesFile> series;
};

/// The commands the runner accepts, in canonical order ("all" not included).
const std::vector<std::string>& experiment_names();

/// Run one named experiment. Throws Error on config/runtime problems.
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config,
                                Workspace& workspace);

}  // namespace rdslab
