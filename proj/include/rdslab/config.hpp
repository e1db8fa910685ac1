#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "rdslab/annealed.hpp"
#include "rdslab/cocycle.hpp"
#include "rdslab/fields.hpp"

namespace rdslab {

using Json = nlohmann::ordered_json;

/// Parsed experiment configuration: chain, per-symbol maps, observable(s),
/// resolution, and the per-experiment parameter tree (kept as JSON so that
/// serialization round-trips byte for byte).
struct ExperimentConfig {
  Json raw;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string tolerance_profile = "default";  // "default" | "strict"

  SymbolChain chain;
  std::vector<PiecewiseMap> maps;
  int resolution = 0;
  bool center = true;

  // raw (uncentered) observable components; single scalar observable = one entry
  std::vector<SymbolField> observable_components;

  /// Parameter lookup under /experiments with a default.
  double param(const std::string& experiment, const std::string& key, double fallback) const;
  std::vector<double> param_list(const std::string& experiment, const std::string& key,
                                 std::vector<double> fallback) const;

  std::uint64_t hash() const;
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
Json serialize_config(const ExperimentConfig& config);

/// Cocycle + annealed system + centered observables, built once per run.
struct Workspace {
  std::unique_ptr<Cocycle> cocycle;
  std::unique_ptr<AnnealedSystem> system;
  std::vector<SymbolField> components;  // centered
  SymbolField observable;               // first component (scalar experiments)

  static Workspace build(const ExperimentConfig& config);
};

}  // namespace rdslab
