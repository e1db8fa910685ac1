// Experiment runner: parse a config, orchestrate the requested experiments,
// emit report.json and per-series CSVs. Exit 0 when all verdicts pass, 2 on
// any FAIL, 1 on config or runtime errors.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <iostream>

#include "rdslab/errors.hpp"
#include "rdslab/report.hpp"

using namespace rdslab;

int main(int argc, char** argv) {
  CLI::App app{"rdslab: annealed limit-theorem laboratory for random expanding maps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  int threads = -1;
  std::string tolerance_profile;

  app.add_option("--config", config_path, "experiment config JSON")->required();
  app.add_option("--out", out_dir, "output directory for report.json and CSVs");
  app.add_option("--seed", seed_flag, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--threads", threads, "worker threads (default: config, then RDS_LIMITLAB_THREADS)");
  app.add_option("--tolerance-profile", tolerance_profile, "default | strict");

  std::vector<std::string> commands = experiment_names();
  commands.push_back("all");
  commands.push_back("describe");
  for (const std::string& name : commands) app.add_subcommand(name, "")->fallthrough();

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig config = load_config(config_path);
    if (seed_set) config.seed = seed_flag;
    if (threads >= 0) {
      config.threads = threads;
    } else if (config.threads == 0) {
      if (const char* env = std::getenv("RDS_LIMITLAB_THREADS")) config.threads = std::atoi(env);
    }
    if (!tolerance_profile.empty()) {
      if (tolerance_profile != "default" && tolerance_profile != "strict")
        throw Error(ErrorCode::ConfigInvalid, "tolerance-profile: must be 'default' or 'strict'");
      config.tolerance_profile = tolerance_profile;
    }

    Workspace ws = Workspace::build(config);

    if (command == "describe") {
      std::cout << describe(config, ws);
      return 0;
    }

    std::vector<std::string> to_run;
    if (command == "all") to_run = experiment_names();
    else to_run.push_back(command);

    std::vector<ReportEntry> entries;
    for (const std::string& name : to_run) {
      auto start = std::chrono::steady_clock::now();
      ReportEntry entry;
      entry.command = name;
      entry.result = run_experiment(name, config, ws);
      entry.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (const Verdict& v : entry.result.verdicts)
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.test << "  statistic=" << v.statistic
                  << " bound=" << v.bound << " slack=" << v.slack << "\n";
      entries.push_back(std::move(entry));
    }

    Json report = make_report(config, entries);
    write_report(out_dir, report, entries);
    std::cout << "report written to " << out_dir << "/report.json\n";
    return all_passed(entries) ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
