#include "rdslab/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {

constexpr int kProductHorizonCap = 60;
constexpr int kMomentHorizonCap = 500;
constexpr int kMomentOrderCap = 6;

long long binomial(int n, int k) {
  long long out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

}  // namespace

AnnealedSystem::AnnealedSystem(const Cocycle& cocycle, double fixpoint_tol, int max_iterations)
    : cocycle_(&cocycle) {
  solve_fixpoint(fixpoint_tol, max_iterations);
}

AnnealedSystem::AnnealedSystem(Cocycle&& cocycle, double fixpoint_tol, int max_iterations)
    : owned_(std::make_unique<Cocycle>(std::move(cocycle))), cocycle_(owned_.get()) {
  solve_fixpoint(fixpoint_tol, max_iterations);
}

void AnnealedSystem::solve_fixpoint(double fixpoint_tol, int max_iterations) {
  const Cocycle& cocycle = *cocycle_;
  const int m = cocycle.symbol_count();
  const int N = cocycle.resolution();
  const SymbolChain& chain = cocycle.chain();

  SymbolField h(m, N, 1.0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    SymbolField next(m, N, 0.0);
    for (int s = 0; s < m; ++s) {
      GridFunction acc(N, 0.0);
      for (int s1 = 0; s1 < m; ++s1) {
        double q = chain.reverse(s, s1);
        if (q == 0.0) continue;
        acc += cocycle.apply_transfer(s1, h[s1]) * q;
      }
      next[s] = std::move(acc);
    }
    double residual = 0.0;
    for (int s = 0; s < m; ++s) residual = std::max(residual, (next[s] - h[s]).bv_norm());
    h = std::move(next);
    fixpoint_iterations_ = iter + 1;
    fixpoint_residual_ = residual;
    if (residual < fixpoint_tol) {
      hhat_ = std::move(h);
      return;
    }
  }
  throw Error(ErrorCode::NoConvergence, "conditioned density did not reach the fixed point");
}

double AnnealedSystem::expectation(const SymbolField& f) const {
  const SymbolChain& chain = cocycle_->chain();
  double out = 0.0;
  for (int s = 0; s < f.symbol_count(); ++s)
    out += chain.pi(s) * (f[s] * hhat_[s]).integral();
  return out;
}

double AnnealedSystem::expectation(const PairField& f) const {
  const SymbolChain& chain = cocycle_->chain();
  double out = 0.0;
  for (int s = 0; s < f.symbol_count(); ++s)
    for (int s1 = 0; s1 < f.symbol_count(); ++s1)
      out += chain.pi(s) * chain.P(s, s1) * (f.at(s, s1) * hhat_[s]).integral();
  return out;
}

SymbolField AnnealedSystem::centered(const SymbolField& f) const {
  SymbolField out = f;
  out += -expectation(f);
  return out;
}

double AnnealedSystem::product_expectation(const std::vector<ProductSlot>& slots) const {
  for (const ProductSlot& slot : slots)
    if (slot.time > kProductHorizonCap)
      throw Error(ErrorCode::HorizonTooLarge,
                  "product horizon capped at " + std::to_string(kProductHorizonCap));
  return product_expectation_impl(slots);
}

double AnnealedSystem::product_expectation_impl(const std::vector<ProductSlot>& slots) const {
  const SymbolChain& chain = cocycle_->chain();
  const int m = cocycle_->symbol_count();
  if (slots.empty()) return 1.0;
  for (std::size_t i = 0; i + 1 < slots.size(); ++i)
    if (slots[i].time >= slots[i + 1].time)
      throw Error(ErrorCode::OutOfRange, "slot times must be strictly increasing");
  if (slots.front().time < 0) throw Error(ErrorCode::OutOfRange, "slot times must be >= 0");

  // working resolution: common refinement of hhat and every slot observable
  long long res = hhat_.resolution();
  for (const ProductSlot& slot : slots)
    res = std::lcm<long long>(res, slot.observable->resolution());
  const int N = static_cast<int>(res);

  std::vector<GridFunction> w;
  w.reserve(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s)
    w.push_back(hhat_[s].refine(N / hhat_.resolution()) * chain.pi(s));

  std::size_t next_slot = 0;
  const int t_max = slots.back().time;
  for (int t = 0; t <= t_max; ++t) {
    if (next_slot < slots.size() && slots[next_slot].time == t) {
      const SymbolField& obs = *slots[next_slot].observable;
      for (int s = 0; s < m; ++s)
        w[static_cast<std::size_t>(s)] *= obs[s].refine(N / obs.resolution());
      ++next_slot;
    }
    if (t == t_max) break;
    std::vector<GridFunction> pushed;
    pushed.reserve(static_cast<std::size_t>(m));
    for (int s = 0; s < m; ++s)
      pushed.push_back(cocycle_->apply_transfer(s, w[static_cast<std::size_t>(s)]));
    std::vector<GridFunction> next(static_cast<std::size_t>(m), GridFunction(N, 0.0));
    for (int s1 = 0; s1 < m; ++s1) {
      for (int s = 0; s < m; ++s) {
        double p = chain.P(s, s1);
        if (p == 0.0) continue;
        next[static_cast<std::size_t>(s1)] += pushed[static_cast<std::size_t>(s)] * p;
      }
    }
    w = std::move(next);
  }

  double out = 0.0;
  for (int s = 0; s < m; ++s) out += w[static_cast<std::size_t>(s)].integral();
  return out;
}

double AnnealedSystem::correlation(const SymbolField& phi, int k) const {
  if (k < 0) throw Error(ErrorCode::OutOfRange, "lag must be >= 0");
  if (k > kMomentHorizonCap)
    throw Error(ErrorCode::HorizonTooLarge, "correlation lag capped at 500");
  if (k == 0) {
    SymbolField sq = phi * phi;
    return expectation(sq);
  }
  std::vector<ProductSlot> slots{{0, &phi}, {k, &phi}};
  return product_expectation_impl(slots);
}

std::vector<double> AnnealedSystem::correlation_series(const SymbolField& phi, int k_max) const {
  std::vector<double> b;
  b.reserve(static_cast<std::size_t>(k_max + 1));
  int tiny_run = 0;
  for (int k = 0; k <= k_max; ++k) {
    b.push_back(correlation(phi, k));
    tiny_run = (k > 0 && std::abs(b.back()) < 1e-15) ? tiny_run + 1 : 0;
    if (tiny_run >= 5) break;  // series has reached the exact-arithmetic floor
  }
  return b;
}

VarianceResult AnnealedSystem::asymptotic_variance(const SymbolField& phi, int n_tail) const {
  std::vector<double> b = correlation_series(phi, n_tail);
  VarianceResult out;
  out.n_tail = static_cast<int>(b.size()) - 1;
  out.s2 = b[0];
  for (std::size_t k = 1; k < b.size(); ++k) out.s2 += 2.0 * b[k];

  // geometric envelope of the computed tail for the truncation bound
  double ratio = 0.0;
  int pairs = 0;
  for (std::size_t k = 2; k < b.size(); ++k) {
    double prev = std::abs(b[k - 1]), cur = std::abs(b[k]);
    if (prev > 1e-14 && cur > 1e-14) {
      ratio = std::max(ratio, cur / prev);
      ++pairs;
    }
  }
  if (pairs > 0 && ratio < 1.0) {
    double last = std::abs(b.back());
    out.fitted_rate = ratio;
    out.tail_bound = 2.0 * last * ratio / (1.0 - ratio);
  } else {
    out.fitted_rate = ratio;
    out.tail_bound = (pairs == 0) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return out;
}

double AnnealedSystem::exact_sn2(const std::vector<double>& b, int n) const {
  double out = n * b[0];
  for (int k = 1; k < n; ++k) {
    double bk = (k < static_cast<int>(b.size())) ? b[static_cast<std::size_t>(k)] : 0.0;
    out += 2.0 * (n - k) * bk;
  }
  return out;
}

MomentsResult AnnealedSystem::moments_cumulants(const SymbolField& phi, int n, int p_max) const {
  if (n < 1 || n > kMomentHorizonCap)
    throw Error(ErrorCode::HorizonTooLarge, "moment recursion capped at n <= 500");
  if (p_max < 1 || p_max > kMomentOrderCap)
    throw Error(ErrorCode::OrderTooLarge, "cumulant order capped at p <= 6");

  const SymbolChain& chain = cocycle_->chain();
  const int m = cocycle_->symbol_count();
  const long long res = std::lcm<long long>(hhat_.resolution(), phi.resolution());
  const int N = static_cast<int>(res);

  std::vector<SymbolField> phi_pow;  // phi^r at working resolution, r = 0..p_max
  phi_pow.reserve(static_cast<std::size_t>(p_max + 1));
  SymbolField phiN = phi.refine(N / phi.resolution());
  phi_pow.emplace_back(m, N, 1.0);
  for (int r = 1; r <= p_max; ++r) phi_pow.push_back(phi_pow.back() * phiN);

  // D[q][s]: weighted density carrying S_t^q at the current time, per symbol.
  std::vector<std::vector<GridFunction>> D(
      static_cast<std::size_t>(p_max + 1),
      std::vector<GridFunction>(static_cast<std::size_t>(m), GridFunction(N, 0.0)));
  for (int s = 0; s < m; ++s)
    D[0][static_cast<std::size_t>(s)] = hhat_[s].refine(N / hhat_.resolution()) * chain.pi(s);

  for (int t = 0; t < n; ++t) {
    // multiply step: (S_t + phi o tau^t)^q expanded binomially
    std::vector<std::vector<GridFunction>> mul(
        static_cast<std::size_t>(p_max + 1),
        std::vector<GridFunction>(static_cast<std::size_t>(m), GridFunction(N, 0.0)));
    for (int q = 0; q <= p_max; ++q) {
      for (int s = 0; s < m; ++s) {
        GridFunction acc(N, 0.0);
        for (int r = 0; r <= q; ++r) {
          GridFunction term = phi_pow[static_cast<std::size_t>(r)][s] *
                              D[static_cast<std::size_t>(q - r)][static_cast<std::size_t>(s)];
          acc += term * static_cast<double>(binomial(q, r));
        }
        mul[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)] = std::move(acc);
      }
    }
    if (t == n - 1) {
      D = std::move(mul);
      break;  // mass is preserved by the push, so the last one is redundant
    }
    for (int q = 0; q <= p_max; ++q) {
      std::vector<GridFunction> pushed;
      pushed.reserve(static_cast<std::size_t>(m));
      for (int s = 0; s < m; ++s)
        pushed.push_back(
            cocycle_->apply_transfer(s, mul[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)]));
      for (int s1 = 0; s1 < m; ++s1) {
        GridFunction acc(N, 0.0);
        for (int s = 0; s < m; ++s) {
          double p = chain.P(s, s1);
          if (p == 0.0) continue;
          acc += pushed[static_cast<std::size_t>(s)] * p;
        }
        D[static_cast<std::size_t>(q)][static_cast<std::size_t>(s1)] = std::move(acc);
      }
    }
  }

  MomentsResult out;
  out.n = n;
  out.moments.assign(static_cast<std::size_t>(p_max + 1), 0.0);
  for (int q = 0; q <= p_max; ++q)
    for (int s = 0; s < m; ++s)
      out.moments[static_cast<std::size_t>(q)] +=
          D[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)].integral();

  // Gamma_k = m_k - sum_{j<k} C(k-1, j-1) Gamma_j m_{k-j}
  out.cumulants.assign(static_cast<std::size_t>(p_max + 1), 0.0);
  for (int k = 1; k <= p_max; ++k) {
    double g = out.moments[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j)
      g -= static_cast<double>(binomial(k - 1, j - 1)) * out.cumulants[static_cast<std::size_t>(j)] *
           out.moments[static_cast<std::size_t>(k - j)];
    out.cumulants[static_cast<std::size_t>(k)] = g;
  }
  return out;
}

MultiCorrelationResult AnnealedSystem::multi_correlation(
    const SymbolField& phi, const std::vector<std::vector<int>>& blocks) const {
  MultiCorrelationResult out;
  std::vector<int> all_times;
  int prev_end = -1;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const std::vector<int>& block = blocks[j];
    if (block.empty()) throw Error(ErrorCode::OutOfRange, "empty block");
    for (std::size_t i = 0; i + 1 < block.size(); ++i)
      if (block[i] >= block[i + 1])
        throw Error(ErrorCode::OutOfRange, "block times must be strictly increasing");
    if (block.front() <= prev_end)
      throw Error(ErrorCode::OverlappingBlocks, "blocks must be disjoint and ordered");
    if (j > 0) {
      int gap = block.front() - prev_end - 1;
      out.r.push_back(gap / 3);
    }
    prev_end = block.back();
    all_times.insert(all_times.end(), block.begin(), block.end());
  }
  if (all_times.back() - all_times.front() > kProductHorizonCap)
    throw Error(ErrorCode::HorizonTooLarge, "total block span capped at 60");

  auto slots_for = [&](const std::vector<int>& times, int shift) {
    std::vector<ProductSlot> slots;
    slots.reserve(times.size());
    for (int t : times) slots.push_back({t - shift, &phi});
    return slots;
  };

  out.joint_expectation = product_expectation_impl(slots_for(all_times, all_times.front()));
  out.product_of_expectations = 1.0;
  for (const std::vector<int>& block : blocks)
    out.product_of_expectations *= product_expectation_impl(slots_for(block, block.front()));
  out.lhs = std::abs(out.joint_expectation - out.product_of_expectations);

  for (int r : out.r)
    out.alpha_r.push_back(r >= 1 ? mixing_alpha(cocycle_->chain(), r, true) : 1.0);
  return out;
}

CovarianceResult AnnealedSystem::covariance_matrix(const std::vector<SymbolField>& components,
                                                   int n_tail) const {
  const int d = static_cast<int>(components.size());
  CovarianceResult out;
  out.sigma2.resize(d, d);
  std::vector<double> diagonal(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i)
    diagonal[static_cast<std::size_t>(i)] = asymptotic_variance(components[static_cast<std::size_t>(i)], n_tail).s2;
  for (int i = 0; i < d; ++i) {
    out.sigma2(i, i) = diagonal[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < d; ++j) {
      SymbolField sum = components[static_cast<std::size_t>(i)];
      sum += components[static_cast<std::size_t>(j)];
      double s_sum = asymptotic_variance(sum, n_tail).s2;
      double value = 0.5 * (s_sum - diagonal[static_cast<std::size_t>(i)] - diagonal[static_cast<std::size_t>(j)]);
      out.sigma2(i, j) = value;
      out.sigma2(j, i) = value;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.sigma2);
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  for (int i = 0; i < d; ++i)
    if (out.eigenvalues(i) < 1e-8) out.null_directions.push_back(i);
  return out;
}

SymbolField coboundary_observable(const Cocycle& cocycle, const GridFunction& r) {
  const int m = cocycle.symbol_count();
  std::vector<GridFunction> members;
  members.reserve(static_cast<std::size_t>(m));
  int fine = r.resolution() * cocycle.slope_lcm();
  for (int s = 0; s < m; ++s) {
    GridFunction pulled = cocycle.map(s).pullback(r);
    if (pulled.resolution() != fine) pulled = pulled.refine(fine / pulled.resolution());
    members.push_back(pulled - r.refine(fine / r.resolution()));
  }
  return SymbolField(std::move(members));
}

double product_expectation_enumeration(const AnnealedSystem& system,
                                       const std::vector<ProductSlot>& slots) {
  if (slots.empty()) return 1.0;
  const Cocycle& cocycle = system.cocycle();
  const SymbolChain& chain = cocycle.chain();
  const int m = cocycle.symbol_count();
  const int t_max = slots.back().time;

  long long res = system.conditioned_density().resolution();
  for (const ProductSlot& slot : slots) res = std::lcm<long long>(res, slot.observable->resolution());
  const int N = static_cast<int>(res);

  double total = 0.0;
  std::vector<int> path(static_cast<std::size_t>(t_max + 1), 0);
  while (true) {
    double prob = chain.pi(path[0]);
    for (int t = 1; t <= t_max; ++t)
      prob *= chain.P(path[static_cast<std::size_t>(t - 1)], path[static_cast<std::size_t>(t)]);
    if (prob > 0.0) {
      GridFunction density =
          system.conditioned_density()[path[0]].refine(N / system.conditioned_density().resolution());
      std::size_t next_slot = 0;
      for (int t = 0; t <= t_max; ++t) {
        int s = path[static_cast<std::size_t>(t)];
        if (next_slot < slots.size() && slots[next_slot].time == t) {
          const SymbolField& obs = *slots[next_slot].observable;
          density *= obs[s].refine(N / obs.resolution());
          ++next_slot;
        }
        if (t < t_max) density = cocycle.apply_transfer(s, density);
      }
      total += prob * density.integral();
    }
    // next path in lexicographic order
    int pos = t_max;
    while (pos >= 0 && path[static_cast<std::size_t>(pos)] == m - 1) {
      path[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++path[static_cast<std::size_t>(pos)];
  }
  return total;
}

double moment_enumeration(const AnnealedSystem& system, const SymbolField& phi, int n, int p) {
  // sum over p-tuples of times; collapse each tuple into slots with powers
  std::vector<int> tuple(static_cast<std::size_t>(p), 0);
  double total = 0.0;
  std::vector<SymbolField> powers;  // phi^r, r = 0..p
  powers.emplace_back(phi.symbol_count(), phi.resolution(), 1.0);
  for (int r = 1; r <= p; ++r) powers.push_back(powers.back() * phi);

  while (true) {
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (int v : tuple) ++count[static_cast<std::size_t>(v)];
    std::vector<ProductSlot> slots;
    for (int t = 0; t < n; ++t)
      if (count[static_cast<std::size_t>(t)] > 0)
        slots.push_back({t, &powers[static_cast<std::size_t>(count[static_cast<std::size_t>(t)])]});
    total += product_expectation_enumeration(system, slots);

    int pos = p - 1;
    while (pos >= 0 && tuple[static_cast<std::size_t>(pos)] == n - 1) {
      tuple[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++tuple[static_cast<std::size_t>(pos)];
  }
  return total;
}

}  // namespace rdslab
