#pragma once

#include <cstdint>
#include <vector>

#include "rdslab/annealed.hpp"

namespace rdslab {

/// Batch of annealed draws of S_n (and optional path functionals).
/// Reproducible bit-for-bit from (inputs, seed) for any thread count: sample
/// i always uses the derived stream derive_seed(seed, i).
struct SampleBatch {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;                   // S_n per sample
  std::vector<double> max_abs;                  // max_{1<=k<=n} |S_k| (if tracked)
  std::vector<double> time_grid;                // snapshot times in [0,1]
  std::vector<std::vector<double>> snapshots;   // snapshots[g][i] = S_{floor(n t_g)} of sample i
};

struct SamplerOptions {
  bool track_max = false;
  std::vector<double> time_grid;
  int threads = 0;  // 0 = hardware concurrency
};

/// Draw (w_{0..n-1}, x) from the annealed law (x ~ hhat(w_0) by exact
/// inverse-CDF on the grid) and accumulate S_n = sum phi_{w_j}(x_j).
/// Under Markov driving this sampling law equals the annealed law of S_n
/// exactly; the moment gate against the exact annealed moments certifies it.
SampleBatch sample_Sn(const AnnealedSystem& system, const SymbolField& phi, int n, int count,
                      std::uint64_t seed, const SamplerOptions& options = {});

/// Nonconventional sums S = sum_{m=1..n} prod_j phi o tau^{q_j(m)} with
/// integer polynomials q_j (coefficient vectors, constant term first).
/// The orbit is materialized up to max q_j(n); capped at 1e5.
SampleBatch sample_nonconventional(const AnnealedSystem& system, const SymbolField& phi,
                                   const std::vector<std::vector<long long>>& polynomials, int n,
                                   int count, std::uint64_t seed, int threads = 0);

/// One consecutive block of times [begin, end).
struct BlockSpec {
  int begin = 0;
  int end = 0;  // exclusive
};

/// Phases for the characteristic-function decorrelation diagnostic:
/// per sample, A = sum_j t1_j . V_j over the first block group and
/// B = sum_j t2_j . V_{j,+k} over the second group shifted by k, where V_j is
/// the vector of block sums of the (possibly multi-component) observable.
std::vector<std::pair<double, double>> sample_phase_pairs(
    const AnnealedSystem& system, const std::vector<SymbolField>& components,
    const std::vector<BlockSpec>& group1, const std::vector<std::vector<double>>& t1,
    const std::vector<BlockSpec>& group2, const std::vector<std::vector<double>>& t2, int shift,
    int count, std::uint64_t seed, int threads = 0);

long long evaluate_polynomial(const std::vector<long long>& coefficients, long long m);

}  // namespace rdslab
