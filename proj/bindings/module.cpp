#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rdslab/config.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/martingale.hpp"
#include "rdslab/report.hpp"
#include "rdslab/sampler.hpp"
#include "rdslab/stats.hpp"

namespace py = pybind11;
using namespace rdslab;

namespace {

Eigen::MatrixXd matrix_from(const std::vector<std::vector<double>>& rows) {
  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd P(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) P(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return P;
}

std::vector<std::vector<double>> matrix_to(const Eigen::MatrixXd& M) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < M.rows(); ++i) {
    std::vector<double> row;
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

SymbolField field_from(const std::vector<std::vector<double>>& values) {
  std::vector<GridFunction> members;
  members.reserve(values.size());
  for (const auto& v : values) members.emplace_back(v);
  return SymbolField(std::move(members));
}

}  // namespace

PYBIND11_MODULE(_rdslab, m) {
  m.doc() = "Exact and Monte Carlo calculus for skew products over mixing chains";

  py::register_exception<Error>(m, "RdslabError");

  py::class_<SymbolChain>(m, "SymbolChain")
      .def_property_readonly("states", [](const SymbolChain& c) { return c.states; })
      .def_property_readonly("P", [](const SymbolChain& c) { return matrix_to(c.P); })
      .def_property_readonly("pi",
                             [](const SymbolChain& c) {
                               std::vector<double> out(c.pi.data(), c.pi.data() + c.pi.size());
                               return out;
                             })
      .def_property_readonly("iid", [](const SymbolChain& c) { return c.iid; })
      .def("__len__", &SymbolChain::size);

  m.def("build_chain",
        [](const std::vector<std::vector<double>>& P, std::vector<std::string> states) {
          return build_chain(matrix_from(P), std::move(states));
        },
        py::arg("P"), py::arg("states") = std::vector<std::string>{});
  m.def("mixing_psi", &mixing_psi, py::arg("chain"), py::arg("n"));
  m.def("mixing_phi_reverse", &mixing_phi_reverse, py::arg("chain"), py::arg("n"));
  m.def("mixing_alpha", &mixing_alpha, py::arg("chain"), py::arg("n"),
        py::arg("allow_upper_bound") = false);
  m.def("sample_path", &sample_path, py::arg("chain"), py::arg("n"), py::arg("seed"));

  py::class_<PiecewiseMap>(m, "PiecewiseMap")
      .def_property_readonly("M", &PiecewiseMap::base_partition)
      .def_property_readonly("uniformly_expanding", &PiecewiseMap::uniformly_expanding)
      .def("apply", &PiecewiseMap::apply, py::arg("x"))
      .def("transfer_matrix",
           [](const PiecewiseMap& map, int resolution) {
             return matrix_to(map.transfer_matrix(resolution));
           },
           py::arg("resolution"));

  m.def("build_map",
        [](int M, const std::vector<std::tuple<int, int, int>>& branches) {
          std::vector<Branch> bs;
          for (auto [slope, target, orientation] : branches)
            bs.push_back({slope, target, orientation});
          return build_map(M, bs);
        },
        py::arg("M"), py::arg("branches"));
  m.def("doubling_map", &doubling_map);
  m.def("tripling_map", &tripling_map);
  m.def("m3_example_map", &m3_example_map);

  m.def("bv_norm", [](const std::vector<double>& values) {
    auto n = GridFunction(values).bv_norms();
    return py::make_tuple(n.l1, n.variation, n.sup, n.bv);
  });

  py::class_<Cocycle>(m, "Cocycle")
      .def(py::init([](const SymbolChain& chain, const std::vector<PiecewiseMap>& maps, int N) {
             return std::make_unique<Cocycle>(chain, maps, N);
           }),
           py::arg("chain"), py::arg("maps"), py::arg("resolution"))
      .def_property_readonly("resolution", &Cocycle::resolution);

  m.def("push",
        [](const Cocycle& cocycle, const std::vector<int>& path, const std::vector<double>& g) {
          return push(cocycle, path, GridFunction(g)).values();
        });
  m.def("path_density", [](const Cocycle& cocycle, const std::vector<int>& past) {
    return path_density(cocycle, past).values();
  });

  py::class_<AnnealedSystem>(m, "AnnealedSystem")
      .def(py::init<const Cocycle&>(), py::arg("cocycle"), py::keep_alive<1, 2>())
      .def_property_readonly("conditioned_density",
                             [](const AnnealedSystem& s) {
                               std::vector<std::vector<double>> out;
                               for (int k = 0; k < s.conditioned_density().symbol_count(); ++k)
                                 out.push_back(s.conditioned_density()[k].values());
                               return out;
                             })
      .def("expectation",
           [](const AnnealedSystem& s, const std::vector<std::vector<double>>& f) {
             return s.expectation(field_from(f));
           })
      .def("centered",
           [](const AnnealedSystem& s, const std::vector<std::vector<double>>& f) {
             SymbolField c = s.centered(field_from(f));
             std::vector<std::vector<double>> out;
             for (int k = 0; k < c.symbol_count(); ++k) out.push_back(c[k].values());
             return out;
           })
      .def("product_expectation",
           [](const AnnealedSystem& s, const std::vector<int>& times,
              const std::vector<std::vector<double>>& phi) {
             SymbolField f = field_from(phi);
             std::vector<ProductSlot> slots;
             for (int t : times) slots.push_back({t, &f});
             return s.product_expectation(slots);
           },
           py::arg("times"), py::arg("phi"))
      .def("correlation",
           [](const AnnealedSystem& s, const std::vector<std::vector<double>>& phi, int k) {
             return s.correlation(field_from(phi), k);
           })
      .def("asymptotic_variance",
           [](const AnnealedSystem& s, const std::vector<std::vector<double>>& phi, int n_tail) {
             VarianceResult var = s.asymptotic_variance(field_from(phi), n_tail);
             return py::make_tuple(var.s2, var.tail_bound);
           },
           py::arg("phi"), py::arg("n_tail") = 60)
      .def("moments_cumulants",
           [](const AnnealedSystem& s, const std::vector<std::vector<double>>& phi, int n, int p_max) {
             MomentsResult mom = s.moments_cumulants(field_from(phi), n, p_max);
             return py::make_tuple(mom.moments, mom.cumulants);
           },
           py::arg("phi"), py::arg("n"), py::arg("p_max") = 4)
      .def("covariance_matrix",
           [](const AnnealedSystem& s, const std::vector<std::vector<std::vector<double>>>& comps,
              int n_tail) {
             std::vector<SymbolField> fields;
             for (const auto& c : comps) fields.push_back(field_from(c));
             CovarianceResult cov = s.covariance_matrix(fields, n_tail);
             std::vector<double> eig(cov.eigenvalues.data(),
                                     cov.eigenvalues.data() + cov.eigenvalues.size());
             return py::make_tuple(matrix_to(cov.sigma2), eig, cov.null_directions);
           },
           py::arg("components"), py::arg("n_tail") = 60);

  m.def("coboundary_observable",
        [](const Cocycle& cocycle, const std::vector<double>& r) {
          SymbolField f = coboundary_observable(cocycle, GridFunction(r));
          std::vector<std::vector<double>> out;
          for (int k = 0; k < f.symbol_count(); ++k) out.push_back(f[k].values());
          return out;
        });

  m.def("k_apply",
        [](const AnnealedSystem& s, const std::vector<std::vector<double>>& f) {
          SymbolField out = K_apply(s, field_from(f));
          std::vector<std::vector<double>> values;
          for (int k = 0; k < out.symbol_count(); ++k) values.push_back(out[k].values());
          return values;
        });
  m.def("k_decay_sup_norms",
        [](const AnnealedSystem& s, const std::vector<std::vector<double>>& phi, int n_max) {
          return k_decay(s, field_from(phi), n_max, {}, true).sup_norms;
        },
        py::arg("system"), py::arg("phi"), py::arg("n_max") = 20);
  m.def("martingale_decomposition",
        [](const AnnealedSystem& s, const std::vector<std::vector<double>>& phi, double tol) {
          MartingaleDecomposition dec = build_decomposition(s, field_from(phi), tol);
          py::dict out;
          out["truncation"] = dec.truncation;
          out["tail_bound"] = dec.tail_bound;
          out["residual"] = dec.residual;
          out["u_sup"] = dec.u_sup;
          out["chi_sup"] = dec.chi_sup;
          out["a1"] = dec.a1;
          out["a3"] = dec.a3;
          return out;
        },
        py::arg("system"), py::arg("phi"), py::arg("tol") = 1e-10);

  m.def("sample_Sn",
        [](const AnnealedSystem& s, const std::vector<std::vector<double>>& phi, int n, int count,
           std::uint64_t seed, int threads) {
          SamplerOptions options;
          options.threads = threads;
          return sample_Sn(s, field_from(phi), n, count, seed, options).values;
        },
        py::arg("system"), py::arg("phi"), py::arg("n"), py::arg("count"), py::arg("seed"),
        py::arg("threads") = 0);
  m.def("ks_distance_vs_normal", [](const std::vector<double>& sample) {
    return ks_distance_vs_normal(sample);
  });
  m.def("dkw_radius", &dkw_radius, py::arg("n"), py::arg("alpha") = 0.01);

  m.def("run_from_config",
        [](const std::string& path, const std::string& command) {
          ExperimentConfig config = load_config(path);
          Workspace ws = Workspace::build(config);
          std::vector<ReportEntry> entries;
          std::vector<std::string> to_run;
          if (command == "all") to_run = experiment_names();
          else to_run.push_back(command);
          for (const std::string& name : to_run)
            entries.push_back({name, run_experiment(name, config, ws), 0.0});
          Json report = make_report(config, entries);
          return py::module_::import("json").attr("loads")(report.dump());
        },
        py::arg("config_path"), py::arg("command"));

  m.attr("__version__") = toolkit_version();
}
