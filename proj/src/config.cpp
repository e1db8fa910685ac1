#include "rdslab/config.hpp"

#include <fstream>
#include <numeric>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, field + ": " + why);
}

PiecewiseMap parse_map(const Json& j, const std::string& field) {
  if (!j.contains("M")) invalid(field + ".M", "missing");
  int M = j.at("M").get<int>();
  if (!j.contains("branches") || !j.at("branches").is_array()) invalid(field + ".branches", "missing array");
  std::vector<Branch> branches;
  for (const Json& bj : j.at("branches")) {
    Branch b;
    if (!bj.contains("slope") || !bj.contains("target_start"))
      invalid(field + ".branches", "each branch needs slope and target_start");
    b.slope = bj.at("slope").get<int>();
    b.target_start = bj.at("target_start").get<int>();
    b.orientation = bj.value("orientation", 1);
    branches.push_back(b);
  }
  try {
    return build_map(M, branches);
  } catch (const Error& e) {
    invalid(field, e.what());
  }
}

GridFunction parse_grid_values(const Json& j, const std::string& field) {
  if (!j.contains("values") || !j.at("values").is_array()) invalid(field + ".values", "missing array");
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  int N = j.value("N", static_cast<int>(values.size()));
  if (N != static_cast<int>(values.size()))
    invalid(field + ".N", "does not match the number of values");
  return GridFunction(std::move(values));
}

// One observable component: either a per-symbol value table
//   [{"symbol": "a", "values": [...], "N": 4}, ...]
// or a generated coboundary  {"kind": "coboundary", "r": {"values": [...]}}.
SymbolField parse_component(const Json& j, const SymbolChain& chain,
                            const std::vector<PiecewiseMap>& maps, int resolution,
                            const std::string& field) {
  const int m = chain.size();
  if (j.is_object() && j.value("kind", "") == std::string("coboundary")) {
    if (!j.contains("r")) invalid(field + ".r", "missing");
    GridFunction r = parse_grid_values(j.at("r"), field + ".r");
    Cocycle cocycle(chain, maps, resolution);
    if (r.resolution() % cocycle.base_partition() != 0)
      invalid(field + ".r.N", "must be a multiple of M");
    return coboundary_observable(cocycle, r);
  }
  if (!j.is_array()) invalid(field, "expected an array of per-symbol tables");
  std::vector<GridFunction> members(static_cast<std::size_t>(m), GridFunction(1, 0.0));
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  long long res = 1;
  for (const Json& entry : j) {
    std::string symbol = entry.value("symbol", "");
    int s = -1;
    for (int k = 0; k < m; ++k)
      if (chain.states[static_cast<std::size_t>(k)] == symbol) s = k;
    if (s < 0) invalid(field + ".symbol", "unknown symbol '" + symbol + "'");
    members[static_cast<std::size_t>(s)] = parse_grid_values(entry, field);
    seen[static_cast<std::size_t>(s)] = true;
    res = std::lcm<long long>(res, members[static_cast<std::size_t>(s)].resolution());
  }
  for (int s = 0; s < m; ++s)
    if (!seen[static_cast<std::size_t>(s)])
      invalid(field, "no values for symbol '" + chain.states[static_cast<std::size_t>(s)] + "'");
  for (int s = 0; s < m; ++s) {
    GridFunction& g = members[static_cast<std::size_t>(s)];
    if (res % g.resolution() != 0) invalid(field + ".N", "resolutions must share a refinement");
    g = g.refine(static_cast<int>(res) / g.resolution());
  }
  return SymbolField(std::move(members));
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig config;
  config.raw = j;

  if (!j.contains("chain")) invalid("chain", "missing");
  const Json& cj = j.at("chain");
  if (!cj.contains("P") || !cj.at("P").is_array()) invalid("chain.P", "missing row-major matrix");
  std::vector<std::vector<double>> rows = cj.at("P").get<std::vector<std::vector<double>>>();
  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd P(m, m);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != m)
      invalid("chain.P", "matrix must be square");
    for (int k = 0; k < m; ++k) P(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  std::vector<std::string> states;
  if (cj.contains("states")) states = cj.at("states").get<std::vector<std::string>>();
  try {
    config.chain = build_chain(P, states);
  } catch (const Error& e) {
    invalid("chain", e.what());
  }

  if (!j.contains("maps")) invalid("maps", "missing");
  for (const std::string& state : config.chain.states) {
    if (!j.at("maps").contains(state)) invalid("maps." + state, "missing map for symbol");
    config.maps.push_back(parse_map(j.at("maps").at(state), "maps." + state));
  }
  const int M = config.maps.front().base_partition();
  for (const PiecewiseMap& map : config.maps)
    if (map.base_partition() != M) invalid("maps", "all maps must share the base partition M");

  if (!j.contains("resolution")) invalid("resolution", "missing");
  config.resolution = j.at("resolution").get<int>();
  if (config.resolution < M || config.resolution % M != 0)
    invalid("resolution", "N must be a multiple of M");

  config.center = j.value("center", true);
  config.seed = j.value("seed", std::uint64_t{1});
  config.threads = j.value("threads", 0);
  config.tolerance_profile = j.value("tolerance_profile", "default");
  if (config.tolerance_profile != "default" && config.tolerance_profile != "strict")
    invalid("tolerance_profile", "must be 'default' or 'strict'");

  if (j.contains("observable_components")) {
    int idx = 0;
    for (const Json& comp : j.at("observable_components"))
      config.observable_components.push_back(parse_component(
          comp, config.chain, config.maps, config.resolution,
          "observable_components[" + std::to_string(idx++) + "]"));
  } else if (j.contains("observable")) {
    config.observable_components.push_back(
        parse_component(j.at("observable"), config.chain, config.maps, config.resolution, "observable"));
  } else {
    invalid("observable", "missing (provide observable or observable_components)");
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("JSON parse failure: ") + e.what());
  }
  return parse_config(j);
}

Json serialize_config(const ExperimentConfig& config) { return config.raw; }

double ExperimentConfig::param(const std::string& experiment, const std::string& key,
                               double fallback) const {
  if (raw.contains("experiments") && raw.at("experiments").contains(experiment)) {
    const Json& e = raw.at("experiments").at(experiment);
    if (e.contains(key)) return e.at(key).get<double>();
  }
  return fallback;
}

std::vector<double> ExperimentConfig::param_list(const std::string& experiment,
                                                 const std::string& key,
                                                 std::vector<double> fallback) const {
  if (raw.contains("experiments") && raw.at("experiments").contains(experiment)) {
    const Json& e = raw.at("experiments").at(experiment);
    if (e.contains(key)) return e.at(key).get<std::vector<double>>();
  }
  return fallback;
}

std::uint64_t ExperimentConfig::hash() const {
  // FNV-1a over the canonical dump; provenance only, not cryptographic
  std::string dump = raw.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Workspace Workspace::build(const ExperimentConfig& config) {
  Workspace ws;
  ws.cocycle = std::make_unique<Cocycle>(config.chain, config.maps, config.resolution);
  ws.system = std::make_unique<AnnealedSystem>(*ws.cocycle);
  for (const SymbolField& comp : config.observable_components)
    ws.components.push_back(config.center ? ws.system->centered(comp) : comp);
  ws.observable = ws.components.front();
  return ws;
}

}  // namespace rdslab
