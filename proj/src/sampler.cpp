#include "rdslab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Flattened immutable tables for the hot sampling loop.
struct SamplerTables {
  int symbols = 0;
  std::vector<std::vector<double>> pi_cdf_row;       // single row: stationary CDF
  std::vector<std::vector<double>> transition_cdf;   // per symbol, CDF over next symbol
  std::vector<std::vector<double>> density_cdf;      // per symbol, CDF over hhat cells
  std::vector<const PiecewiseMap*> maps;

  explicit SamplerTables(const AnnealedSystem& system) {
    const Cocycle& cocycle = system.cocycle();
    const SymbolChain& chain = cocycle.chain();
    symbols = cocycle.symbol_count();
    pi_cdf_row.resize(1);
    for (int s = 0; s < symbols; ++s)
      pi_cdf_row[0].push_back((s ? pi_cdf_row[0].back() : 0.0) + chain.pi(s));
    transition_cdf.resize(static_cast<std::size_t>(symbols));
    density_cdf.resize(static_cast<std::size_t>(symbols));
    for (int s = 0; s < symbols; ++s) {
      for (int j = 0; j < symbols; ++j)
        transition_cdf[static_cast<std::size_t>(s)].push_back(
            (j ? transition_cdf[static_cast<std::size_t>(s)].back() : 0.0) + chain.P(s, j));
      const GridFunction& h = system.conditioned_density()[s];
      double acc = 0.0;
      for (int c = 0; c < h.resolution(); ++c) {
        acc += h[c] / h.resolution();
        density_cdf[static_cast<std::size_t>(s)].push_back(acc);
      }
      maps.push_back(&cocycle.map(s));
    }
  }

  static int draw_from_cdf(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int idx = static_cast<int>(it - cdf.begin());
    return std::min(idx, static_cast<int>(cdf.size()) - 1);
  }

  int draw_initial_symbol(std::mt19937_64& rng) const {
    return draw_from_cdf(pi_cdf_row[0], uniform01(rng));
  }
  int draw_next_symbol(int s, std::mt19937_64& rng) const {
    return draw_from_cdf(transition_cdf[static_cast<std::size_t>(s)], uniform01(rng));
  }

  /// Exact inverse CDF for the step density hhat(s): pick the cell, then
  /// place the point uniformly inside it.
  double draw_initial_point(int s, std::mt19937_64& rng) const {
    const std::vector<double>& cdf = density_cdf[static_cast<std::size_t>(s)];
    double u = uniform01(rng);
    int cell = draw_from_cdf(cdf, u);
    int N = static_cast<int>(cdf.size());
    double lo = cell > 0 ? cdf[static_cast<std::size_t>(cell - 1)] : 0.0;
    double w = cdf[static_cast<std::size_t>(cell)] - lo;
    double frac = w > 0.0 ? (u - lo) / w : 0.5;
    if (frac >= 1.0) frac = std::nextafter(1.0, 0.0);
    double x = (cell + frac) / N;
    if (x >= 1.0) x = std::nextafter(1.0, 0.0);
    return x;
  }
};

template <class Work>
void parallel_samples(int count, int threads, Work work) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([=]() {
      for (int i = t; i < count; i += threads) work(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace

SampleBatch sample_Sn(const AnnealedSystem& system, const SymbolField& phi, int n, int count,
                      std::uint64_t seed, const SamplerOptions& options) {
  if (n < 1 || count < 1) throw Error(ErrorCode::OutOfRange, "need n >= 1 and count >= 1");
  SamplerTables tables(system);

  SampleBatch batch;
  batch.n = n;
  batch.seed = seed;
  batch.values.assign(static_cast<std::size_t>(count), 0.0);
  if (options.track_max) batch.max_abs.assign(static_cast<std::size_t>(count), 0.0);
  batch.time_grid = options.time_grid;
  batch.snapshots.assign(batch.time_grid.size(),
                         std::vector<double>(static_cast<std::size_t>(count), 0.0));
  std::vector<int> snapshot_steps;
  for (double t : batch.time_grid)
    snapshot_steps.push_back(std::clamp(static_cast<int>(n * t), 0, n));

  parallel_samples(count, resolve_threads(options.threads), [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    int s = tables.draw_initial_symbol(rng);
    double x = tables.draw_initial_point(s, rng);
    double sum = 0.0;
    double max_abs = 0.0;
    std::size_t next_snap = 0;
    std::vector<double> snaps(batch.time_grid.size(), 0.0);
    // snapshot at step 0 (S_0 = 0) when the grid starts at t = 0
    while (next_snap < snapshot_steps.size() &&
           snapshot_steps[static_cast<std::size_t>(next_snap)] == 0)
      snaps[next_snap++] = 0.0;
    for (int j = 0; j < n; ++j) {
      sum += phi[s].eval(x);
      max_abs = std::max(max_abs, std::abs(sum));
      while (next_snap < snapshot_steps.size() &&
             snapshot_steps[static_cast<std::size_t>(next_snap)] == j + 1)
        snaps[next_snap++] = sum;
      if (j + 1 < n) {
        x = tables.maps[static_cast<std::size_t>(s)]->apply(x);
        s = tables.draw_next_symbol(s, rng);
      }
    }
    batch.values[static_cast<std::size_t>(i)] = sum;
    if (options.track_max) batch.max_abs[static_cast<std::size_t>(i)] = max_abs;
    for (std::size_t g = 0; g < snaps.size(); ++g)
      batch.snapshots[g][static_cast<std::size_t>(i)] = snaps[g];
  });
  return batch;
}

long long evaluate_polynomial(const std::vector<long long>& coefficients, long long m) {
  long long out = 0;
  for (std::size_t k = coefficients.size(); k-- > 0;) out = out * m + coefficients[k];
  return out;
}

SampleBatch sample_nonconventional(const AnnealedSystem& system, const SymbolField& phi,
                                   const std::vector<std::vector<long long>>& polynomials, int n,
                                   int count, std::uint64_t seed, int threads) {
  if (n < 1 || count < 1) throw Error(ErrorCode::OutOfRange, "need n >= 1 and count >= 1");
  if (polynomials.empty()) throw Error(ErrorCode::OutOfRange, "need at least one polynomial");
  constexpr long long kOrbitCap = 100000;

  long long horizon = 0;
  for (const auto& q : polynomials) {
    long long prev = -1;
    for (long long m = 1; m <= n; ++m) {
      long long v = evaluate_polynomial(q, m);
      if (v < 0) throw Error(ErrorCode::OutOfRange, "polynomial time index must be >= 0");
      if (v <= prev && m > 1)
        throw Error(ErrorCode::OutOfRange, "polynomial must be increasing on 1..n");
      prev = v;
      horizon = std::max(horizon, v);
    }
  }
  if (horizon > kOrbitCap)
    throw Error(ErrorCode::HorizonTooLarge, "orbit horizon exceeds 1e5");

  // time tables: q_j(m) for each m, j
  const int orbit_len = static_cast<int>(horizon) + 1;
  std::vector<std::vector<int>> times(static_cast<std::size_t>(n));
  for (int m = 1; m <= n; ++m)
    for (const auto& q : polynomials)
      times[static_cast<std::size_t>(m - 1)].push_back(
          static_cast<int>(evaluate_polynomial(q, m)));

  SamplerTables tables(system);
  SampleBatch batch;
  batch.n = n;
  batch.seed = seed;
  batch.values.assign(static_cast<std::size_t>(count), 0.0);

  parallel_samples(count, resolve_threads(threads), [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::vector<double> observed(static_cast<std::size_t>(orbit_len));
    int s = tables.draw_initial_symbol(rng);
    double x = tables.draw_initial_point(s, rng);
    for (int j = 0; j < orbit_len; ++j) {
      observed[static_cast<std::size_t>(j)] = phi[s].eval(x);
      if (j + 1 < orbit_len) {
        x = tables.maps[static_cast<std::size_t>(s)]->apply(x);
        s = tables.draw_next_symbol(s, rng);
      }
    }
    double sum = 0.0;
    for (const auto& ts : times) {
      double prod = 1.0;
      for (int t : ts) prod *= observed[static_cast<std::size_t>(t)];
      sum += prod;
    }
    batch.values[static_cast<std::size_t>(i)] = sum;
  });
  return batch;
}

std::vector<std::pair<double, double>> sample_phase_pairs(
    const AnnealedSystem& system, const std::vector<SymbolField>& components,
    const std::vector<BlockSpec>& group1, const std::vector<std::vector<double>>& t1,
    const std::vector<BlockSpec>& group2, const std::vector<std::vector<double>>& t2, int shift,
    int count, std::uint64_t seed, int threads) {
  const int d = static_cast<int>(components.size());
  if (group1.size() != t1.size() || group2.size() != t2.size())
    throw Error(ErrorCode::OutOfRange, "one t vector per block required");
  int orbit_len = 0;
  for (const BlockSpec& b : group1) orbit_len = std::max(orbit_len, b.end);
  for (const BlockSpec& b : group2) orbit_len = std::max(orbit_len, b.end + shift);

  SamplerTables tables(system);
  std::vector<std::pair<double, double>> phases(static_cast<std::size_t>(count));

  parallel_samples(count, resolve_threads(threads), [&](int i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::vector<double> observed(static_cast<std::size_t>(orbit_len * d));
    int s = tables.draw_initial_symbol(rng);
    double x = tables.draw_initial_point(s, rng);
    for (int j = 0; j < orbit_len; ++j) {
      for (int c = 0; c < d; ++c)
        observed[static_cast<std::size_t>(j * d + c)] = components[static_cast<std::size_t>(c)][s].eval(x);
      if (j + 1 < orbit_len) {
        x = tables.maps[static_cast<std::size_t>(s)]->apply(x);
        s = tables.draw_next_symbol(s, rng);
      }
    }
    auto phase_of = [&](const std::vector<BlockSpec>& blocks,
                        const std::vector<std::vector<double>>& ts, int offset) {
      double phase = 0.0;
      for (std::size_t j = 0; j < blocks.size(); ++j) {
        for (int c = 0; c < d; ++c) {
          double block_sum = 0.0;
          for (int l = blocks[j].begin; l < blocks[j].end; ++l)
            block_sum += observed[static_cast<std::size_t>((l + offset) * d + c)];
          phase += ts[j][static_cast<std::size_t>(c)] * block_sum;
        }
      }
      return phase;
    };
    phases[static_cast<std::size_t>(i)] = {phase_of(group1, t1, 0), phase_of(group2, t2, shift)};
  });
  return phases;
}

}  // namespace rdslab
