#include "rdslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rdslab/errors.hpp"
#include "rdslab/martingale.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/sampler.hpp"
#include "rdslab/stats.hpp"

namespace rdslab {

namespace {

// "strict" tightens every statistical tolerance; exact identities keep their
// machine-level thresholds either way.
double tol_scale(const ExperimentConfig& config) {
  return config.tolerance_profile == "strict" ? 0.7 : 1.0;
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    out += cells[i];
  }
  out += "\n";
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> mixing_gamma(const ExperimentConfig& config, bool phi_regime, int n_max) {
  MixingProfile profile = mixing_profile(config.chain, n_max);
  return phi_regime ? profile.phi_reverse : profile.psi;
}

double gamma_at(const std::vector<double>& gamma, int n) {
  int idx = n / 2;  // gamma_{floor(n/2)}, gamma_0 := 1
  if (idx == 0) return 1.0;
  if (idx - 1 < static_cast<int>(gamma.size())) return gamma[static_cast<std::size_t>(idx - 1)];
  return gamma.empty() ? 0.0 : gamma.back();
}

/// Decide which mixing coefficient drives the martingale bounds: phi_R needs
/// the fiber densities bounded below, otherwise fall back to psi.
bool detect_phi_regime(const ExperimentConfig& config, Workspace& ws) {
  double essinf = 1e300;
  for (int p = 0; p < 20; ++p) {
    std::vector<int> past = sample_path(config.chain, 40, derive_seed(config.seed ^ 0xe55, p));
    GridFunction h = path_density(*ws.cocycle, past);
    for (int i = 0; i < h.resolution(); ++i) essinf = std::min(essinf, h[i]);
  }
  for (int s = 0; s < ws.system->conditioned_density().symbol_count(); ++s)
    for (int i = 0; i < ws.system->conditioned_density()[s].resolution(); ++i)
      essinf = std::min(essinf, ws.system->conditioned_density()[s][i]);
  return essinf > 1e-3;
}

double observable_scale(const Workspace& ws) {
  VarianceResult var = ws.system->asymptotic_variance(ws.observable, 60);
  if (var.s2 <= 1e-12)
    throw Error(ErrorCode::ZeroVariance, "observable is degenerate (s^2 = 0); distributional tests need s > 0");
  return std::sqrt(var.s2);
}

int threads_of(const ExperimentConfig& config) { return config.threads; }

// ---------------------------------------------------------------------------

ExperimentResult run_mix_coeffs(const ExperimentConfig& config, Workspace&) {
  ExperimentResult result;
  const int n_max = static_cast<int>(config.param("mix-coeffs", "n_max", 30));
  MixingProfile profile = mixing_profile(config.chain, n_max);

  bool ordered = true, monotone = true;
  for (std::size_t k = 0; k < profile.alpha.size(); ++k) {
    ordered = ordered && profile.alpha[k] <= profile.phi_reverse[k] + 1e-12 &&
              profile.phi_reverse[k] <= profile.psi[k] + 1e-12;
    if (k > 0)
      monotone = monotone && profile.alpha[k] <= profile.alpha[k - 1] + 1e-12 &&
                 profile.phi_reverse[k] <= profile.phi_reverse[k - 1] + 1e-12 &&
                 profile.psi[k] <= profile.psi[k - 1] + 1e-12;
  }
  MixingRateFit fit = fit_mixing_rate(profile.alpha);

  Verdict ordering{"mix-coeffs.ordering", {{"n_max", n_max}}, 0.0, 0.0, 1e-12, ordered, {}};
  Verdict mono{"mix-coeffs.monotone", {{"n_max", n_max}}, 0.0, 0.0, 1e-12, monotone, {}};
  Verdict rate{"mix-coeffs.rate",
               {{"n_max", n_max}},
               fit.residual,
               0.0,
               0.0,
               true,
               {{"eta", fit.eta}, {"gamma", fit.gamma}, {"c1", fit.c1}, {"c2", fit.c2},
                {"all_zero", fit.all_zero}}};
  result.verdicts = {ordering, mono, rate};

  std::string csv = csv_join({"n", "alpha", "phi_reverse", "psi"});
  for (std::size_t k = 0; k < profile.alpha.size(); ++k)
    csv += csv_join({num(static_cast<double>(k + 1)), num(profile.alpha[k]),
                     num(profile.phi_reverse[k]), num(profile.psi[k])});
  result.series.push_back({"mixing_coefficients.csv", csv});
  return result;
}

ExperimentResult run_decay(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int n_max = static_cast<int>(config.param("decay", "n_max", 15));
  const int n_paths = static_cast<int>(config.param("decay", "n_paths", 100));
  const double r2_min = 0.95 * tol_scale(config) + (1.0 - tol_scale(config));  // strict: 0.965

  DecaySeries exp1 = decay_exp1(*ws.cocycle, n_max, n_paths, config.seed);
  Verdict v1;
  v1.test = "decay.exp1_fit";
  v1.params = {{"n_max", n_max}, {"n_paths", n_paths}};
  v1.statistic = exp1.identically_zero ? 1.0 : exp1.r_squared;
  v1.bound = r2_min;
  v1.pass = exp1.identically_zero || exp1.r_squared >= r2_min;
  v1.extra = {{"lambda_est", exp1.lambda_est}, {"K_est", exp1.K_est},
              {"identically_zero", exp1.identically_zero}};
  result.verdicts.push_back(v1);

  DecaySeries exp2 = decay_exp2(*ws.cocycle, ws.observable[0], n_max, n_paths, config.seed + 1);
  Verdict v2 = v1;
  v2.test = "decay.exp2_fit";
  v2.statistic = exp2.identically_zero ? 1.0 : exp2.r_squared;
  v2.pass = exp2.identically_zero || exp2.r_squared >= r2_min;
  v2.extra = {{"lambda_est", exp2.lambda_est}, {"K_est", exp2.K_est},
              {"identically_zero", exp2.identically_zero}};
  result.verdicts.push_back(v2);

  Verdict v3;
  v3.test = "decay.tempered";
  if (exp1.identically_zero) {
    v3.statistic = 0.0;
    v3.bound = 0.0;
    v3.pass = true;
    v3.extra = {{"note", "exact cocycle, K constant"}};
  } else {
    std::vector<double> K =
        estimate_K_along_shifts(*ws.cocycle, 60, n_max, exp1.lambda_est, config.seed + 2);
    TemperednessReport rep = temperedness_check(K, exp1.lambda_est);
    v3.statistic = rep.tail_statistic;
    v3.bound = rep.epsilon;
    v3.pass = rep.tempered;
  }
  result.verdicts.push_back(v3);

  for (const auto& [tag, series] : {std::pair<const char*, const DecaySeries&>{"exp1", exp1},
                                    std::pair<const char*, const DecaySeries&>{"exp2", exp2}}) {
    std::string csv = csv_join({"n", "median", "q10", "q90"});
    for (std::size_t i = 0; i < series.n.size(); ++i)
      csv += csv_join({num(series.n[i]), num(series.median[i]), num(series.q10[i]), num(series.q90[i])});
    result.series.push_back({std::string("decay_") + tag + ".csv", csv});
  }
  return result;
}

ExperimentResult run_variance(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int n_tail = static_cast<int>(config.param("variance", "n_tail", 60));
  const int l3_max = static_cast<int>(config.param("variance", "l3_n_max", 200));

  std::vector<double> b = ws.system->correlation_series(ws.observable, n_tail);
  VarianceResult var = ws.system->asymptotic_variance(ws.observable, n_tail);
  double weighted_tail = 0.0;
  for (std::size_t k = 1; k < b.size(); ++k) weighted_tail += static_cast<double>(k) * std::abs(b[k]);

  double worst_margin = -1e300;
  bool all_hold = true;
  for (int n = 10; n <= l3_max; n += 10) {
    double lhs = std::abs(ws.system->exact_sn2(b, n) / n - var.s2);
    double rhs = 2.0 * weighted_tail / n + var.tail_bound;
    worst_margin = std::max(worst_margin, lhs - rhs);
    all_hold = all_hold && lhs <= rhs + 1e-12;
  }
  Verdict l3{"variance.l3",
             {{"n_max", l3_max}},
             worst_margin,
             0.0,
             1e-12,
             all_hold,
             {{"s2", var.s2}, {"tail_bound", var.tail_bound}, {"weighted_tail", weighted_tail}}};
  result.verdicts.push_back(l3);

  Verdict s2{"variance.s2", {{"n_tail", n_tail}}, var.s2, 0.0, var.tail_bound, true,
             {{"fitted_rate", var.fitted_rate}, {"b0", b[0]}}};
  result.verdicts.push_back(s2);

  std::string csv = csv_join({"k", "b_k"});
  for (std::size_t k = 0; k < b.size(); ++k)
    csv += csv_join({num(static_cast<double>(k)), num(b[k])});
  result.series.push_back({"correlations.csv", csv});
  return result;
}

ExperimentResult run_cumulants(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  std::vector<double> n_grid = config.param_list("cumulants", "n_grid", {25, 50, 100, 200});
  const int k_max = static_cast<int>(config.param("cumulants", "k_max", 6));
  MixingRateFit rate = fit_mixing_rate(mixing_profile(config.chain, 25).alpha);
  const double gamma = rate.all_zero ? 0.0 : rate.gamma;

  std::vector<MomentsResult> rows;
  for (double nd : n_grid) rows.push_back(ws.system->moments_cumulants(ws.observable, static_cast<int>(nd), k_max));

  bool bounded = true;
  double c0 = 0.0;
  for (int k = 3; k <= k_max; ++k) {
    double first = std::abs(rows.front().cumulants[static_cast<std::size_t>(k)]) / n_grid.front();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double per_n = std::abs(rows[i].cumulants[static_cast<std::size_t>(k)]) / n_grid[i];
      bounded = bounded && per_n <= std::max(2.0 * first, 1e-9);
      double kfac = std::tgamma(static_cast<double>(k) + 1.0);
      double denom = std::pow(kfac, 1.0 + gamma);
      c0 = std::max(c0, std::pow(per_n / denom, 1.0 / (k - 2)));
    }
  }
  Verdict v{"cumulants.bounded",
            {{"k_max", k_max}, {"gamma", gamma}},
            0.0,
            0.0,
            1e-9,
            bounded,
            {{"fitted_c0", c0}, {"c0_certified", false}}};
  result.verdicts.push_back(v);

  std::string csv = csv_join({"n", "Gamma2", "Gamma3", "Gamma4", "Gamma5", "Gamma6"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> cells{num(n_grid[i])};
    for (int k = 2; k <= 6; ++k)
      cells.push_back(k <= k_max ? num(rows[i].cumulants[static_cast<std::size_t>(k)]) : "");
    csv += csv_join(cells);
  }
  result.series.push_back({"cumulants.csv", csv});
  return result;
}

ExperimentResult run_multicorr(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int n_random = static_cast<int>(config.param("multicorr", "n_random", 50));
  const int gap_max = static_cast<int>(config.param("multicorr", "gap_max", 12));
  const double safety = config.param("multicorr", "safety", 1.5);

  // two-block calibration of (A, delta0)
  std::vector<double> rs, lhss;
  std::vector<MultiCorrelationResult> twoblock;
  for (int gap = 1; gap <= gap_max; ++gap) {
    MultiCorrelationResult mc = ws.system->multi_correlation(ws.observable, {{0, 1}, {2 + gap, 3 + gap}});
    twoblock.push_back(mc);
    rs.push_back(static_cast<double>(mc.r[0]));
    lhss.push_back(mc.lhs);
  }
  LogLinearFit fit = fit_log_linear(rs, lhss, 1e-13);
  double delta0 = (fit.points >= 2) ? std::clamp(std::exp(fit.slope), 1e-6, 0.95) : 0.5;
  double A = 0.0;
  for (std::size_t i = 0; i < twoblock.size(); ++i) {
    double env = std::pow(delta0, rs[i]) + twoblock[i].alpha_r[0];
    if (env > 0.0) A = std::max(A, lhss[i] / env);
  }
  A = std::max(A, 1e-12) * safety;

  // verification on random block configurations
  std::mt19937_64 rng(derive_seed(config.seed, 0x6b1));
  int violations = 0;
  std::string csv = csv_join({"case", "blocks", "lhs", "rhs"});
  for (int trial = 0; trial < n_random; ++trial) {
    int m_blocks = 2 + static_cast<int>(uniform01(rng) * 3);
    std::vector<std::vector<int>> blocks;
    int cursor = 0;
    for (int bidx = 0; bidx < m_blocks; ++bidx) {
      if (bidx > 0) cursor += 1 + static_cast<int>(uniform01(rng) * gap_max);
      int len = 1 + static_cast<int>(uniform01(rng) * 3);
      std::vector<int> block;
      for (int k = 0; k < len; ++k) block.push_back(cursor++);
      blocks.push_back(block);
      if (cursor > 55) break;
    }
    MultiCorrelationResult mc = ws.system->multi_correlation(ws.observable, blocks);
    double rhs = 0.0;
    for (std::size_t j = 0; j < mc.r.size(); ++j)
      rhs += A * (std::pow(delta0, mc.r[j]) + mc.alpha_r[j]);
    if (mc.lhs > rhs) ++violations;
    std::string desc;
    for (const auto& blk : blocks) desc += "[" + std::to_string(blk.front()) + ".." + std::to_string(blk.back()) + "]";
    csv += csv_join({std::to_string(trial), desc, num(mc.lhs), num(rhs)});
  }
  Verdict v{"multicorr.envelope",
            {{"n_random", n_random}, {"A", A}, {"delta0", delta0}},
            static_cast<double>(violations),
            0.0,
            0.0,
            violations == 0,
            {{"fit_r2", fit.r_squared}}};
  result.verdicts.push_back(v);
  result.series.push_back({"multicorr.csv", csv});
  return result;
}

ExperimentResult run_martingale(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int n_max = static_cast<int>(config.param("martingale", "k_decay_n_max", 25));
  const int so_max = static_cast<int>(config.param("martingale", "second_order_max", 12));
  const int so_fit = static_cast<int>(config.param("martingale", "second_order_fit", 4));
  const double tol = config.param("martingale", "chi_tol", 1e-10);
  const double envelope_safety = config.param("martingale", "envelope_safety", 1.5);

  bool phi_regime = detect_phi_regime(config, ws);
  std::vector<double> gamma = mixing_gamma(config, phi_regime, n_max);

  KDecaySeries kd = k_decay(*ws.system, ws.observable, n_max, gamma, phi_regime,
                            /*fit_up_to=*/std::max(6, n_max / 2));
  bool dominated = true;
  for (int n = 1; n <= n_max; ++n) {
    double env = kd.envelope_C * (std::pow(kd.envelope_delta, n) + gamma_at(gamma, n));
    dominated = dominated && kd.sup_norms[static_cast<std::size_t>(n)] <= env * envelope_safety + 1e-13;
  }
  Verdict vk{"martingale.k_decay",
             {{"n_max", n_max}, {"phi_regime", phi_regime}},
             kd.sup_norms.back(),
             0.0,
             1e-13,
             dominated && kd.summable,
             {{"envelope_C", kd.envelope_C}, {"envelope_delta", kd.envelope_delta}}};
  result.verdicts.push_back(vk);

  // duality certificate on random fields
  std::mt19937_64 rng(derive_seed(config.seed, 0xdead));
  double worst_duality = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    SymbolField f(config.chain.size(), ws.system->conditioned_density().resolution(), 0.0);
    for (int s = 0; s < f.symbol_count(); ++s)
      for (int i = 0; i < f.resolution(); ++i) f[s][i] = 2.0 * uniform01(rng) - 1.0;
    worst_duality = std::max(worst_duality, duality_certificate(*ws.system, f));
  }
  result.verdicts.push_back(
      {"martingale.duality", {{"trials", 10}}, worst_duality, 1e-11, 0.0, worst_duality <= 1e-11, {}});

  MartingaleDecomposition dec = build_decomposition(*ws.system, ws.observable, tol);
  Verdict vres{"martingale.residual",
               {{"tol", tol}},
               dec.residual,
               dec.tail_bound + 1e-12,
               1e-12,
               dec.residual <= dec.tail_bound + 1e-12,
               {{"truncation", dec.truncation}, {"chi_sup", dec.chi_sup}, {"u_sup", dec.u_sup},
                {"u_mean", dec.u_mean}, {"a1", dec.a1}, {"a3", dec.a3}}};
  result.verdicts.push_back(vres);

  VarianceResult var = ws.system->asymptotic_variance(ws.observable, 80);
  PairField u2 = dec.u;
  u2 *= dec.u;
  double eu2 = ws.system->expectation(u2);
  double combined = 4.0 * dec.u_sup * dec.tail_bound + dec.tail_bound * dec.tail_bound +
                    var.tail_bound + 1e-9;
  result.verdicts.push_back({"martingale.u2_vs_s2",
                             {},
                             std::abs(eu2 - var.s2),
                             combined,
                             combined,
                             std::abs(eu2 - var.s2) <= combined,
                             {{"Eu2", eu2}, {"s2", var.s2}}});

  // second-order table with envelope fitted on the small corner
  std::vector<double> gamma2 = mixing_gamma(config, phi_regime, 2 * so_max);
  double C2 = 0.0;
  for (int i = 0; i <= so_fit; ++i)
    for (int j = 0; j <= so_fit; ++j) {
      int n = std::max(i, j);
      double env = std::pow(kd.envelope_delta, n) + gamma_at(gamma2, n);
      if (env > 0.0) C2 = std::max(C2, second_order(*ws.system, ws.observable, i, j) / env);
    }
  bool so_ok = true;
  std::string so_csv = csv_join({"i", "j", "value", "envelope"});
  for (int i = 0; i <= so_max; ++i) {
    for (int j = 0; j <= so_max; ++j) {
      double value = second_order(*ws.system, ws.observable, i, j);
      int n = std::max(i, j);
      double env = C2 * (std::pow(kd.envelope_delta, n) + gamma_at(gamma2, n));
      so_ok = so_ok && value <= env * envelope_safety + 1e-12;
      so_csv += csv_join({std::to_string(i), std::to_string(j), num(value), num(env)});
    }
  }
  result.verdicts.push_back({"martingale.second_order",
                             {{"max", so_max}, {"fit", so_fit}},
                             0.0,
                             0.0,
                             1e-12,
                             so_ok,
                             {{"C2", C2}}});
  result.series.push_back({"second_order.csv", so_csv});

  std::string kd_csv = csv_join({"n", "sup_norm", "envelope"});
  for (int n = 0; n <= n_max; ++n) {
    double env = (n == 0) ? kd.sup_norms[0]
                          : kd.envelope_C * (std::pow(kd.envelope_delta, n) + gamma_at(gamma, n));
    kd_csv += csv_join({std::to_string(n), num(kd.sup_norms[static_cast<std::size_t>(n)]), num(env)});
  }
  result.series.push_back({"k_decay.csv", kd_csv});
  return result;
}

Verdict sampling_gate(const ExperimentConfig& config, Workspace& ws, int n, int count) {
  MomentsResult exact = ws.system->moments_cumulants(ws.observable, n, 4);
  SamplerOptions options;
  options.threads = threads_of(config);
  SampleBatch batch = sample_Sn(*ws.system, ws.observable, n, count, config.seed ^ 0x9a7e, options);
  bool pass = true;
  double worst = 0.0;
  Json details = Json::array();
  for (int p = 1; p <= 4; ++p) {
    MomentEstimate est = sample_moment(batch.values, p);
    double gap = std::abs(est.value - exact.moments[static_cast<std::size_t>(p)]);
    double allowed = 4.0 * tol_scale(config) * est.se;
    pass = pass && gap <= allowed;
    worst = std::max(worst, allowed > 0 ? gap / allowed : 0.0);
    details.push_back({{"p", p}, {"exact", exact.moments[static_cast<std::size_t>(p)]},
                       {"sample", est.value}, {"se", est.se}});
  }
  return {"gate.moments", {{"n", n}, {"count", count}}, worst, 1.0, 0.0, pass, details};
}

ExperimentResult run_clt(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  std::vector<double> n_grid = config.param_list("clt", "n_grid", {200, 500, 2000});
  const int count = static_cast<int>(config.param("clt", "count", 100000));
  const int gate_count = static_cast<int>(config.param("clt", "gate_count", 1000000));
  const double ks_tol = config.param("clt", "ks_tol", 0.05) * tol_scale(config);
  const double alpha = 0.01;

  result.verdicts.push_back(sampling_gate(config, ws, static_cast<int>(config.param("clt", "gate_n", 20)), gate_count));

  const double s = observable_scale(ws);
  MixingRateFit rate = fit_mixing_rate(mixing_profile(config.chain, 25).alpha);
  const double gamma = rate.all_zero ? 0.0 : rate.gamma;
  const double exponent = 1.0 / (2.0 + 4.0 * gamma);

  std::vector<double> ks_values, dkw_values;
  double fitted_C = 0.0;
  std::string csv = csv_join({"n", "ks", "dkw", "rate_bound_exponent"});
  for (double nd : n_grid) {
    const int n = static_cast<int>(nd);
    SamplerOptions options;
    options.threads = threads_of(config);
    SampleBatch batch = sample_Sn(*ws.system, ws.observable, n, count, config.seed + n, options);
    std::vector<double> scaled;
    scaled.reserve(batch.values.size());
    for (double v : batch.values) scaled.push_back(v / (s * std::sqrt(static_cast<double>(n))));
    double ks = ks_distance_vs_normal(scaled);
    double dkw = dkw_radius(scaled.size(), alpha);
    ks_values.push_back(ks);
    dkw_values.push_back(dkw);
    fitted_C = std::max(fitted_C, std::max(0.0, ks - dkw) * std::pow(nd, exponent));
    csv += csv_join({num(nd), num(ks), num(dkw), num(exponent)});
  }
  result.series.push_back({"clt_ks.csv", csv});

  Verdict final_ks{"clt.ks_final",
                   {{"n", n_grid.back()}, {"count", count}},
                   ks_values.back(),
                   ks_tol,
                   dkw_values.back(),
                   ks_values.back() <= ks_tol,
                   {{"scale_s", s}}};
  result.verdicts.push_back(final_ks);

  bool decreasing = true;
  for (std::size_t i = 1; i < ks_values.size(); ++i)
    decreasing = decreasing && ks_values[i] <= ks_values[i - 1] + dkw_values[i] + dkw_values[i - 1];
  decreasing = decreasing && ks_values.back() < ks_values.front();
  result.verdicts.push_back({"clt.ks_decreasing",
                             {{"n_grid", n_grid}},
                             ks_values.back() - ks_values.front(),
                             0.0,
                             dkw_values.front() + dkw_values.back(),
                             decreasing,
                             {{"fitted_C", fitted_C}, {"exponent", exponent}}});
  return result;
}

ExperimentResult run_concentration(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  std::vector<double> n_grid = config.param_list("concentration", "n_grid", {200, 500});
  std::vector<double> t_grid =
      config.param_list("concentration", "t_grid", {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4});
  const int count = static_cast<int>(config.param("concentration", "count", 1000000));
  const double delta = 0.05;

  MartingaleDecomposition dec =
      build_decomposition(*ws.system, ws.observable, config.param("martingale", "chi_tol", 1e-10));
  const double resolution_floor = clopper_pearson_upper(0, count, delta);

  bool all_pass = true;
  std::string csv = csv_join({"n", "t", "threshold", "hits", "empirical", "cp_upper", "bound", "pass"});
  for (double nd : n_grid) {
    const int n = static_cast<int>(nd);
    SamplerOptions options;
    options.threads = threads_of(config);
    SampleBatch batch = sample_Sn(*ws.system, ws.observable, n, count, config.seed + 31 * n, options);
    for (double t : t_grid) {
      const double threshold = t * n + dec.a1;
      std::int64_t hits = 0;
      for (double v : batch.values)
        if (std::abs(v) >= threshold) ++hits;
      double cp = clopper_pearson_upper(hits, count, delta);
      double bound = azuma_bound(dec, n, t);
      // Within MC resolution: a bound below the zero-hit CP radius cannot be
      // resolved; zero observed exceedances is then the strongest statement.
      bool pass = (cp <= bound) || (hits == 0 && bound <= resolution_floor);
      all_pass = all_pass && pass;
      csv += csv_join({num(nd), num(t), num(threshold), std::to_string(hits),
                       num(static_cast<double>(hits) / count), num(cp), num(bound),
                       pass ? "1" : "0"});
    }
  }
  result.series.push_back({"concentration.csv", csv});
  result.verdicts.push_back({"concentration.azuma",
                             {{"count", count}, {"a1", dec.a1}, {"a3", dec.a3}},
                             0.0,
                             0.0,
                             resolution_floor,
                             all_pass,
                             {{"u_sup", dec.u_sup}}});
  return result;
}

ExperimentResult run_moddev(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int n = static_cast<int>(config.param("moddev", "n", 10000));
  const double theta = config.param("moddev", "a_exponent", 0.1);
  const double lo = config.param("moddev", "interval_lo", 1.0);
  const double hi = config.param("moddev", "interval_hi", 2.0);
  const int count = static_cast<int>(config.param("moddev", "count", 200000));
  const double tol = config.param("moddev", "tolerance", 0.15) * tol_scale(config);

  const double s = observable_scale(ws);
  const double a_n = std::pow(static_cast<double>(n), theta);
  const double inf_rate = [&] {
    if (lo <= 0.0 && hi >= 0.0) return 0.0;
    double edge = std::min(std::abs(lo), std::abs(hi));
    return 0.5 * edge * edge;
  }();

  // Exact-Gaussian benchmark at the same (a_n, interval): removes the
  // universal finite-n offset, leaving dynamics-specific deviation + noise.
  double p_gauss = normal_cdf(hi * a_n) - normal_cdf(lo * a_n);
  if (count * p_gauss < 200)
    throw Error(ErrorCode::TooFewHits,
                "expected interval hits " + std::to_string(count * p_gauss) + " < 200");
  const double rate_gauss = std::log(p_gauss) / (a_n * a_n);

  SamplerOptions options;
  options.threads = threads_of(config);
  SampleBatch batch = sample_Sn(*ws.system, ws.observable, n, count, config.seed + 0x3dd, options);
  std::int64_t hits = 0;
  for (double v : batch.values) {
    double w = v / (a_n * s * std::sqrt(static_cast<double>(n)));
    if (w >= lo && w <= hi) ++hits;
  }
  if (hits == 0) throw Error(ErrorCode::TooFewHits, "no samples landed in the interval");
  const double p_hat = static_cast<double>(hits) / count;
  const double rate_emp = std::log(p_hat) / (a_n * a_n);
  const double calibrated = rate_emp - rate_gauss - inf_rate;
  const double ci_lo = std::log(clopper_pearson_lower(hits, count, 0.025)) / (a_n * a_n);
  const double ci_hi = std::log(clopper_pearson_upper(hits, count, 0.025)) / (a_n * a_n);

  result.verdicts.push_back({"moddev.rate",
                             {{"n", n}, {"a_exponent", theta}, {"interval", {lo, hi}}, {"count", count}},
                             calibrated,
                             -inf_rate,
                             std::max(std::abs(rate_emp - ci_lo), std::abs(ci_hi - rate_emp)),
                             std::abs(calibrated - (-inf_rate)) <= tol,
                             {{"rate_emp", rate_emp}, {"rate_gauss_benchmark", rate_gauss},
                              {"hits", hits}, {"tolerance", tol}}});

  // ratio diagnostic (ModDev3): ln(P(Z_n >= x) / normal_tail(x)) against the
  // fitted a5 (1 + x^3) n^{-1/(2+4 gamma)} envelope; a5 is fitted, not certified.
  MixingRateFit rate_fit = fit_mixing_rate(mixing_profile(config.chain, 25).alpha);
  const double gamma = rate_fit.all_zero ? 0.0 : rate_fit.gamma;
  const double n_pow = std::pow(static_cast<double>(n), -1.0 / (2.0 + 4.0 * gamma));
  std::vector<double> b = ws.system->correlation_series(ws.observable, 60);
  const double v_n = std::sqrt(ws.system->exact_sn2(b, n));
  double a5 = 0.0;
  std::string csv = csv_join({"x", "p_emp", "p_normal", "log_ratio", "envelope_unit"});
  for (double x : {0.5, 1.0, 1.5, 2.0}) {
    std::int64_t tail_hits = 0;
    for (double v : batch.values)
      if (v / v_n >= x) ++tail_hits;
    if (tail_hits == 0) continue;
    double ratio = std::log((static_cast<double>(tail_hits) / count) / normal_tail(x));
    double unit = (1.0 + x * x * x) * n_pow;
    a5 = std::max(a5, std::abs(ratio) / unit);
    csv += csv_join({num(x), num(static_cast<double>(tail_hits) / count), num(normal_tail(x)),
                     num(ratio), num(unit)});
  }
  result.verdicts.push_back({"moddev.ratio_envelope",
                             {{"n", n}},
                             a5,
                             0.0,
                             0.0,
                             std::isfinite(a5),
                             {{"fitted_a5", a5}, {"certified", false}}});
  result.series.push_back({"moddev_ratio.csv", csv});
  return result;
}

ExperimentResult run_fclt(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int n = static_cast<int>(config.param("fclt", "n", 2000));
  const int count = static_cast<int>(config.param("fclt", "count", 100000));
  std::vector<double> grid = config.param_list("fclt", "time_grid", {0.2, 0.4, 0.6, 0.8, 1.0});
  const double se_mult = 4.0 * tol_scale(config);

  const double s = observable_scale(ws);
  SamplerOptions options;
  options.threads = threads_of(config);
  options.time_grid = grid;
  SampleBatch batch = sample_Sn(*ws.system, ws.observable, n, count, config.seed + 0xfc17, options);

  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<std::vector<double>> paths(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    paths[g].reserve(batch.snapshots[g].size());
    for (double v : batch.snapshots[g]) paths[g].push_back(v / root_n);
  }

  bool cov_ok = true;
  std::string csv = csv_join({"t_i", "t_j", "cov", "se", "target"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      CovarianceEstimate cov = sample_covariance(paths[i], paths[j]);
      double target = s * s * std::min(grid[i], grid[j]);
      cov_ok = cov_ok && std::abs(cov.value - target) <= se_mult * cov.se;
      csv += csv_join({num(grid[i]), num(grid[j]), num(cov.value), num(cov.se), num(target)});
    }
  }
  result.series.push_back({"fclt_cov.csv", csv});
  result.verdicts.push_back({"fclt.covariance",
                             {{"n", n}, {"count", count}},
                             0.0,
                             0.0,
                             se_mult,
                             cov_ok,
                             {{"s2", s * s}}});

  // disjoint increment decorrelation
  bool incr_ok = true;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    for (std::size_t j = i + 1; j + 1 < grid.size(); ++j) {
      std::vector<double> inc1(paths[i + 1].size()), inc2(paths[j + 1].size());
      for (std::size_t k = 0; k < inc1.size(); ++k) {
        inc1[k] = paths[i + 1][k] - paths[i][k];
        inc2[k] = paths[j + 1][k] - paths[j][k];
      }
      CovarianceEstimate cov = sample_covariance(inc1, inc2);
      incr_ok = incr_ok && std::abs(cov.value) <= se_mult * cov.se;
    }
  }
  result.verdicts.push_back({"fclt.increments", {}, 0.0, 0.0, se_mult, incr_ok, {}});

  // fourth-moment tightness: fit C on even-indexed tuples, verify on all
  struct Tuple { std::size_t t1, t2, r1, r2; };
  std::vector<Tuple> tuples;
  for (std::size_t t1 = 0; t1 < grid.size(); ++t1)
    for (std::size_t t2 = t1 + 1; t2 < grid.size(); ++t2)
      for (std::size_t r1 = t2; r1 < grid.size(); ++r1)
        for (std::size_t r2 = r1 + 1; r2 < grid.size(); ++r2) tuples.push_back({t1, t2, r1, r2});
  auto tightness_lhs = [&](const Tuple& tp) {
    double acc = 0.0;
    for (std::size_t k = 0; k < paths[0].size(); ++k) {
      double a = paths[tp.r2][k] - paths[tp.r1][k];
      double b = paths[tp.t2][k] - paths[tp.t1][k];
      acc += a * a * b * b;
    }
    return acc / static_cast<double>(paths[0].size());
  };
  auto span_of = [&](const Tuple& tp) {
    double span = (std::floor(grid[tp.r2] * n) - std::floor(grid[tp.t1] * n)) / n;
    return span * span;
  };
  double C_tight = 0.0;
  for (std::size_t idx = 0; idx < tuples.size(); idx += 2)
    C_tight = std::max(C_tight, tightness_lhs(tuples[idx]) / span_of(tuples[idx]));
  bool tight_ok = true;
  for (const Tuple& tp : tuples)
    tight_ok = tight_ok && tightness_lhs(tp) <= 2.0 * C_tight * span_of(tp) + 1e-12;
  result.verdicts.push_back({"fclt.tightness",
                             {{"tuples", tuples.size()}},
                             C_tight,
                             0.0,
                             0.0,
                             tight_ok,
                             {{"fitted_C", C_tight}}});
  return result;
}

ExperimentResult run_rosenthal(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  std::vector<double> n_grid = config.param_list("rosenthal", "n_grid", {50, 100, 200, 400});
  const double max_variation = config.param("rosenthal", "max_variation", 0.20) * tol_scale(config);

  std::string csv = csv_join({"n", "p", "ratio"});
  bool all_ok = true;
  Json detail = Json::array();
  for (int p : {2, 4, 6}) {
    double lo = 1e300, hi = 0.0;
    for (double nd : n_grid) {
      MomentsResult mom = ws.system->moments_cumulants(ws.observable, static_cast<int>(nd), p);
      double ratio = std::pow(std::abs(mom.moments[static_cast<std::size_t>(p)]), 1.0 / p) / std::sqrt(nd);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      csv += csv_join({num(nd), std::to_string(p), num(ratio)});
    }
    double variation = (lo > 0.0) ? (hi - lo) / lo : 0.0;
    all_ok = all_ok && variation < max_variation;
    detail.push_back({{"p", p}, {"variation", variation}});
  }
  result.series.push_back({"rosenthal_exact.csv", csv});
  result.verdicts.push_back({"rosenthal.exact",
                             {{"n_grid", n_grid}},
                             0.0,
                             max_variation,
                             0.0,
                             all_ok,
                             detail});

  // Monte Carlo maximal-moment diagnostic
  std::vector<double> mc_grid = config.param_list("rosenthal", "mc_n_grid", {100, 1000, 10000});
  const int count = static_cast<int>(config.param("rosenthal", "mc_count", 20000));
  std::string mc_csv = csv_join({"n", "p", "ratio", "ci_lo", "ci_hi"});
  bool mc_ok = true;
  for (int p : {2, 4}) {
    std::vector<double> ratios, his, los;
    for (double nd : mc_grid) {
      SamplerOptions options;
      options.threads = threads_of(config);
      options.track_max = true;
      SampleBatch batch =
          sample_Sn(*ws.system, ws.observable, static_cast<int>(nd), count, config.seed + 7 * static_cast<int>(nd) + p, options);
      LpEstimate est = lp_norm_bootstrap(batch.max_abs, p, 200, config.seed + p);
      double root = std::sqrt(nd);
      ratios.push_back(est.value / root);
      los.push_back(est.lo / root);
      his.push_back(est.hi / root);
      mc_csv += csv_join({num(nd), std::to_string(p), num(est.value / root), num(est.lo / root),
                          num(est.hi / root)});
    }
    // bounded trendwise: the last ratio must not exceed the first by more
    // than 30% plus CI slack
    mc_ok = mc_ok && ratios.back() <= 1.3 * ratios.front() + (his.front() - los.front());
  }
  result.series.push_back({"rosenthal_mc.csv", mc_csv});
  result.verdicts.push_back({"rosenthal.maximal_mc",
                             {{"count", count}},
                             0.0,
                             0.0,
                             0.0,
                             mc_ok,
                             {}});
  return result;
}

ExperimentResult run_nonconv(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int n = static_cast<int>(config.param("nonconv", "n", 50));
  const int count = static_cast<int>(config.param("nonconv", "count", 20000));
  std::vector<std::vector<long long>> polys;
  if (config.raw.contains("experiments") && config.raw["experiments"].contains("nonconv") &&
      config.raw["experiments"]["nonconv"].contains("polynomials")) {
    polys = config.raw["experiments"]["nonconv"]["polynomials"]
                .get<std::vector<std::vector<long long>>>();
  } else {
    polys = {{0, 1}, {0, 2}};  // q1(m) = m, q2(m) = 2m
  }

  SampleBatch batch =
      sample_nonconventional(*ws.system, ws.observable, polys, n, count, config.seed + 0xac3,
                             threads_of(config));

  // reduction regression: ell = 1, q(m) = m-1 must reproduce sample_Sn bitwise
  SampleBatch plain = sample_Sn(*ws.system, ws.observable, n, 500, config.seed + 0xac4,
                                SamplerOptions{.track_max = false, .time_grid = {}, .threads = threads_of(config)});
  SampleBatch reduced = sample_nonconventional(*ws.system, ws.observable, {{-1, 1}}, n, 500,
                                               config.seed + 0xac4, threads_of(config));
  bool reduction_ok = plain.values == reduced.values;

  double sup = ws.observable.sup_norm();
  double trivial_bound = static_cast<double>(n) * std::pow(sup, static_cast<double>(polys.size()));
  bool bound_ok = true;
  for (double v : batch.values) bound_ok = bound_ok && std::abs(v) <= trivial_bound + 1e-9;

  // exploratory normality diagnostic on the standardized batch
  double mu = mean(batch.values);
  double sd = std::sqrt(variance(batch.values));
  double ks = 0.0;
  if (sd > 0) {
    std::vector<double> standardized;
    standardized.reserve(batch.values.size());
    for (double v : batch.values) standardized.push_back((v - mu) / sd);
    ks = ks_distance_vs_normal(standardized);
  }

  result.verdicts.push_back({"nonconv.reduction", {{"n", n}}, 0.0, 0.0, 0.0, reduction_ok, {}});
  result.verdicts.push_back({"nonconv.bound",
                             {{"n", n}, {"count", count}},
                             trivial_bound,
                             trivial_bound,
                             0.0,
                             bound_ok,
                             {}});
  result.verdicts.push_back({"nonconv.ks_diagnostic",
                             {{"n", n}},
                             ks,
                             0.0,
                             dkw_radius(batch.values.size(), 0.01),
                             true,  // exploratory: reported, not asserted
                             {{"note", "exploratory; variance theory out of exact scope"}}});
  return result;
}

ExperimentResult run_chf_decor(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  const int count = static_cast<int>(config.param("chf-decor", "count", 100000));
  const double t_mag = config.param("chf-decor", "t", 0.4);
  const int block_len = static_cast<int>(config.param("chf-decor", "block_len", 2));
  std::vector<double> k_grid = config.param_list("chf-decor", "k_grid", {2, 4, 6, 8, 12, 16, 20});
  const int groups = 20;

  const int d = static_cast<int>(ws.components.size());
  std::vector<std::vector<double>> t1{std::vector<double>(static_cast<std::size_t>(d), t_mag)};
  std::vector<std::vector<double>> t2 = t1;
  std::vector<BlockSpec> g1{{0, block_len}}, g2{{0, block_len}};

  // sanity: t = 0 gives exactly zero gap
  {
    std::vector<std::vector<double>> zero{std::vector<double>(static_cast<std::size_t>(d), 0.0)};
    auto phases = sample_phase_pairs(*ws.system, ws.components, g1, zero, g2, zero, 4, 200,
                                     config.seed + 0xcf0, threads_of(config));
    double gap = 0.0;
    for (auto [a, b] : phases) gap = std::max(gap, std::abs(a) + std::abs(b));
    result.verdicts.push_back({"chf.zero_t", {}, gap, 0.0, 0.0, gap == 0.0, {}});
  }

  std::string csv = csv_join({"k", "gap", "ci"});
  std::vector<double> ks, gaps;
  double noise_floor = 0.0;
  for (double kd : k_grid) {
    const int k = static_cast<int>(kd);
    auto phases = sample_phase_pairs(*ws.system, ws.components, g1, t1, g2, t2, k, count,
                                     config.seed + 0xcf1 + k, threads_of(config));
    // group-based estimate of |E e^{i(A+B)} - E e^{iA} E e^{iB}|
    std::vector<double> group_stats;
    const std::size_t per = phases.size() / groups;
    for (int g = 0; g < groups; ++g) {
      std::size_t lo_i = static_cast<std::size_t>(g) * per;
      std::size_t hi_i = (g == groups - 1) ? phases.size() : lo_i + per;
      double re_ab = 0, im_ab = 0, re_a = 0, im_a = 0, re_b = 0, im_b = 0;
      for (std::size_t i = lo_i; i < hi_i; ++i) {
        auto [a, b] = phases[i];
        re_ab += std::cos(a + b); im_ab += std::sin(a + b);
        re_a += std::cos(a); im_a += std::sin(a);
        re_b += std::cos(b); im_b += std::sin(b);
      }
      double cnt = static_cast<double>(hi_i - lo_i);
      re_ab /= cnt; im_ab /= cnt; re_a /= cnt; im_a /= cnt; re_b /= cnt; im_b /= cnt;
      double gr = re_ab - (re_a * re_b - im_a * im_b);
      double gi = im_ab - (re_a * im_b + im_a * re_b);
      group_stats.push_back(std::hypot(gr, gi));
    }
    double gap = mean(group_stats);
    double ci = 2.0 * std::sqrt(variance(group_stats) / groups);
    noise_floor = std::max(noise_floor, ci);
    ks.push_back(kd);
    gaps.push_back(gap);
    csv += csv_join({num(kd), num(gap), num(ci)});
  }
  result.series.push_back({"chf_decorrelation.csv", csv});

  LogLinearFit fit = fit_log_linear(ks, gaps, noise_floor);
  bool decreasing = (fit.points < 3) || fit.slope < 0.0;  // all-noise counts as decorrelated
  result.verdicts.push_back({"chf.decay_trend",
                             {{"count", count}, {"t", t_mag}},
                             fit.slope,
                             0.0,
                             noise_floor,
                             decreasing,
                             {{"points_above_noise", fit.points}}});
  return result;
}

ExperimentResult run_gate(const ExperimentConfig& config, Workspace& ws) {
  ExperimentResult result;
  result.verdicts.push_back(sampling_gate(config, ws,
                                          static_cast<int>(config.param("gate", "n", 20)),
                                          static_cast<int>(config.param("gate", "count", 1000000))));
  return result;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "mix-coeffs", "decay",     "variance", "cumulants", "clt",     "concentration",
      "moddev",     "fclt",      "martingale", "multicorr", "rosenthal", "nonconv",
      "chf-decor",  "gate"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config,
                                Workspace& workspace) {
  if (name == "mix-coeffs") return run_mix_coeffs(config, workspace);
  if (name == "decay") return run_decay(config, workspace);
  if (name == "variance") return run_variance(config, workspace);
  if (name == "cumulants") return run_cumulants(config, workspace);
  if (name == "clt") return run_clt(config, workspace);
  if (name == "concentration") return run_concentration(config, workspace);
  if (name == "moddev") return run_moddev(config, workspace);
  if (name == "fclt") return run_fclt(config, workspace);
  if (name == "martingale") return run_martingale(config, workspace);
  if (name == "multicorr") return run_multicorr(config, workspace);
  if (name == "rosenthal") return run_rosenthal(config, workspace);
  if (name == "nonconv") return run_nonconv(config, workspace);
  if (name == "chf-decor") return run_chf_decor(config, workspace);
  if (name == "gate") return run_gate(config, workspace);
  throw Error(ErrorCode::ConfigInvalid, "unknown command '" + name + "'");
}

}  // namespace rdslab
