#include "rdslab/report.hpp"

#include <fstream>
#include <sstream>

#include "rdslab/errors.hpp"

namespace rdslab {

Json make_report(const ExperimentConfig& config, const std::vector<ReportEntry>& entries) {
  Json report;
  std::ostringstream hash_hex;
  hash_hex << std::hex << config.hash();
  report["config_hash"] = hash_hex.str();
  report["toolkit_version"] = toolkit_version();
  report["seed"] = config.seed;
  report["tolerance_profile"] = config.tolerance_profile;

  Json verdicts = Json::array();
  Json series = Json::array();
  for (const ReportEntry& entry : entries) {
    for (const Verdict& v : entry.result.verdicts) {
      verdicts.push_back({{"command", entry.command},
                          {"test", v.test},
                          {"params", v.params},
                          {"statistic", v.statistic},
                          {"bound", v.bound},
                          {"slack", v.slack},
                          {"pass", v.pass},
                          {"extra", v.extra}});
    }
    for (const SeriesFile& s : entry.result.series) series.push_back(s.name);
  }
  report["verdicts"] = verdicts;
  report["series_files"] = series;

  Json timings = Json::object();
  for (const ReportEntry& entry : entries) timings[entry.command] = entry.wall_seconds;
  report["timings"] = timings;
  return report;
}

void write_report(const std::filesystem::path& out_dir, const Json& report,
                  const std::vector<ReportEntry>& entries) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::ConfigInvalid, "cannot create output directory " + out_dir.string());
  {
    std::ofstream out(out_dir / "report.json");
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write report.json");
    out << report.dump(2) << "\n";
  }
  for (const ReportEntry& entry : entries) {
    for (const SeriesFile& s : entry.result.series) {
      std::ofstream out(out_dir / s.name);
      if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write " + s.name);
      out << s.csv;
    }
  }
}

bool all_passed(const std::vector<ReportEntry>& entries) {
  for (const ReportEntry& entry : entries)
    for (const Verdict& v : entry.result.verdicts)
      if (!v.pass) return false;
  return true;
}

std::string describe(const ExperimentConfig& config, Workspace& ws) {
  std::ostringstream os;
  os.precision(6);
  const SymbolChain& chain = config.chain;
  os << "chain: " << chain.size() << " states (";
  for (int s = 0; s < chain.size(); ++s) os << (s ? " " : "") << chain.states[static_cast<std::size_t>(s)];
  os << ")" << (chain.iid ? " [iid]" : "") << "\n";
  os << "  pi = (";
  for (int s = 0; s < chain.size(); ++s) os << (s ? ", " : "") << chain.pi(s);
  os << ")\n";

  MixingProfile profile = mixing_profile(chain, 20);
  MixingRateFit fit = fit_mixing_rate(profile.alpha);
  if (fit.all_zero)
    os << "  mixing: iid (alpha_n = 0 for n >= 1)\n";
  else
    os << "  mixing fit: alpha_n <= " << fit.c1 << " exp(-" << fit.c2 << " n^" << fit.eta
       << "), gamma = " << fit.gamma << "\n";

  os << "maps: base partition M = " << config.maps.front().base_partition() << ", resolution N = "
     << config.resolution << "\n";
  for (int s = 0; s < chain.size(); ++s) {
    const PiecewiseMap& map = config.maps[static_cast<std::size_t>(s)];
    os << "  " << chain.states[static_cast<std::size_t>(s)] << ": slopes (";
    for (std::size_t b = 0; b < map.branches().size(); ++b)
      os << (b ? " " : "") << map.branches()[b].slope;
    os << ")" << (map.uniformly_expanding() ? "" : " [not uniformly expanding]") << "\n";
  }

  const SymbolField& h = ws.system->conditioned_density();
  double hmin = 1e300, hmax = 0.0;
  for (int s = 0; s < h.symbol_count(); ++s)
    for (int i = 0; i < h.resolution(); ++i) {
      hmin = std::min(hmin, h[s][i]);
      hmax = std::max(hmax, h[s][i]);
    }
  os << "conditioned density hhat: range [" << hmin << ", " << hmax << "], fixpoint residual "
     << ws.system->fixpoint_residual() << "\n";

  if (ws.components.size() > 1) {
    CovarianceResult cov = ws.system->covariance_matrix(ws.components, 60);
    os << "vector observable: d = " << ws.components.size() << ", Sigma^2 eigenvalues (";
    for (int i = 0; i < cov.eigenvalues.size(); ++i) os << (i ? ", " : "") << cov.eigenvalues(i);
    os << ")\n";
    if (!cov.null_directions.empty())
      os << "  degenerate directions detected: " << cov.null_directions.size()
         << " (coboundary candidates)\n";
  } else {
    VarianceResult var = ws.system->asymptotic_variance(ws.observable, 60);
    ObservableFamily fam = ObservableFamily::from(ws.observable, *ws.cocycle);
    os << "observable: sup = " << fam.sup << ", max BV = " << fam.max_bv
       << ", scaled norm = " << fam.scaled_norm << "\n";
    os << "  s^2 = " << var.s2 << " (tail bound " << var.tail_bound << ")";
    if (var.s2 < 1e-8) os << "  [degenerate: coboundary candidate]";
    os << "\n";
  }
  return os.str();
}

}  // namespace rdslab
