#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "embz/embezzlement.hpp"
#include "embz/errors.hpp"
#include "embz/experiment.hpp"
#include "embz/models.hpp"
#include "embz/oracle.hpp"
#include "embz/spectrum.hpp"

namespace py = pybind11;
using namespace embz;

namespace {

py::dict report_dict(const oracle::OracleReport& r) {
  py::dict d;
  d["op"] = r.op;
  d["seed"] = r.seed;
  d["instances"] = r.instances;
  d["max_abs_deviation"] = r.max_abs_deviation;
  d["pass"] = r.pass;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Embezzlement-of-entanglement numerics";
  m.attr("__version__") = cli::kVersion;

  static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_RuntimeError);
  static py::exception<BudgetError> budget_error(m, "BudgetError", numeric_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const BudgetError& e) {
      py::set_error(budget_error, e.what());
    } catch (const NumericError& e) {
      py::set_error(numeric_error, e.what());
    } catch (const IoError& e) {
      py::set_error(PyExc_OSError, e.what());
    }
  });

  py::class_<Interval>(m, "Interval")
      .def(py::init(&make_interval), py::arg("lo"), py::arg("hi"))
      .def_readonly("lo", &Interval::lo)
      .def_readonly("hi", &Interval::hi)
      .def_property_readonly("width", &Interval::width)
      .def_property_readonly("mid", &Interval::mid)
      .def("contains", &Interval::contains, py::arg("x"), py::arg("slack") = 0.0)
      .def("__repr__", [](const Interval& v) {
        return "Interval(" + cli::format_double(v.lo) + ", " + cli::format_double(v.hi) + ")";
      });

  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init<>())
      .def_static("uniform", &Spectrum::uniform, py::arg("n"))
      .def_static(
          "from_levels",
          [](const std::vector<std::pair<double, std::uint64_t>>& runs, double tail, double bound) {
            std::vector<Level> levels;
            for (const auto& [w, c] : runs) levels.push_back({w, c});
            return Spectrum::from_levels(std::move(levels), tail, bound);
          },
          py::arg("levels"), py::arg("tail_mass") = 0.0, py::arg("tail_atom_bound") = 0.0)
      .def_property_readonly("levels",
                             [](const Spectrum& s) {
                               std::vector<std::pair<double, std::uint64_t>> out;
                               for (const Level& l : s.levels()) out.emplace_back(l.weight, l.count);
                               return out;
                             })
      .def_property_readonly("tail_mass", &Spectrum::tail_mass)
      .def_property_readonly("tail_atom_bound", &Spectrum::tail_atom_bound)
      .def_property_readonly("kept_mass", &Spectrum::kept_mass)
      .def_property_readonly("atom_count", &Spectrum::atom_count)
      .def_property_readonly("level_count", &Spectrum::level_count)
      .def_property_readonly("exact", &Spectrum::exact)
      .def("weights", &Spectrum::weights, py::arg("max_atoms") = std::uint64_t{1} << 26)
      .def("to_json", [](const Spectrum& s) { return nlohmann::json(s).dump(); })
      .def_static("from_json", [](const std::string& text) { return nlohmann::json::parse(text).get<Spectrum>(); })
      .def("__eq__", [](const Spectrum& a, const Spectrum& b) { return a == b; })
      .def("__len__", &Spectrum::atom_count)
      .def("__repr__", [](const Spectrum& s) {
        return "Spectrum(levels=" + std::to_string(s.level_count()) + ", atoms=" + std::to_string(s.atom_count()) +
               ", tail=" + cli::format_double(s.tail_mass()) + ")";
      });

  m.def(
      "make_spectrum", [](const std::vector<double>& w, double tol) { return make_spectrum(w, tol); },
      py::arg("weights"), py::arg("tol") = 1e-9);
  m.def(
      "exact_spectrum", [](const std::vector<double>& w, double tol) { return exact_spectrum(w, tol); },
      py::arg("weights"), py::arg("tol") = 1e-9);
  m.def("truncate", &embz::truncate, py::arg("p"), py::arg("max_levels"));
  m.def("tensor", &tensor, py::arg("p"), py::arg("q"), py::arg("max_levels"));
  m.def("tensor_power", &tensor_power, py::arg("p"), py::arg("m"), py::arg("max_levels"));
  m.def("l1_sorted", &l1_sorted, py::arg("p"), py::arg("q"));
  m.def("fidelity_sorted", &fidelity_sorted, py::arg("p"), py::arg("q"));
  m.def("hellinger_sq_sorted", &hellinger_sq_sorted, py::arg("p"), py::arg("q"));

  m.def("van_dam_hayden_spectrum", &van_dam_hayden_spectrum, py::arg("n"));
  m.def("geometric_site", &geometric_site, py::arg("lam"));
  m.def("geometric_spectrum", [](double lam, unsigned sites, std::size_t k) {
    return family_spectrum(Geometric{lam, sites}, k);
  }, py::arg("lam"), py::arg("sites"), py::arg("max_levels"));
  m.def(
      "araki_woods_spectrum",
      [](const std::vector<double>& lambdas, std::size_t k) { return araki_woods_spectrum(lambdas, k); },
      py::arg("lambdas"), py::arg("max_levels"));
  m.def("xy_correlation_matrix", &xy_correlation_matrix, py::arg("L"), py::arg("gamma"), py::arg("h"));
  m.def(
      "half_chain_occupations",
      [](const Eigen::MatrixXd& c, unsigned L) { return half_chain_occupations(c, L).nu; }, py::arg("correlations"),
      py::arg("L"));
  m.def(
      "occupations_to_spectrum",
      [](const std::vector<double>& nu, std::size_t k) { return occupations_to_spectrum(ModeOccupations{nu}, k); },
      py::arg("nu"), py::arg("max_levels"));
  m.def("xy_half_chain_spectrum", &xy_half_chain_spectrum, py::arg("L"), py::arg("gamma"), py::arg("h"),
        py::arg("max_levels"));

  py::class_<TargetPair>(m, "TargetPair")
      .def(py::init([](const std::vector<double>& phi, const std::vector<double>& psi, unsigned d) {
             return make_target_pair(phi, psi, d);
           }),
           py::arg("phi"), py::arg("psi"), py::arg("d"))
      .def_readonly("phi", &TargetPair::phi)
      .def_readonly("psi", &TargetPair::psi)
      .def_readonly("d", &TargetPair::d);

  py::class_<ErrorBudget>(m, "ErrorBudget")
      .def(py::init([](std::size_t k, double cap) { return ErrorBudget{k, cap}; }),
           py::arg("max_levels") = std::size_t{1} << 16, py::arg("tail_cap") = 1e-4)
      .def_readwrite("max_levels", &ErrorBudget::max_levels)
      .def_readwrite("tail_cap", &ErrorBudget::tail_cap);

  m.def("monopartite_error", &monopartite_error, py::arg("omega"), py::arg("pair"), py::arg("budget") = ErrorBudget{});
  m.def("bipartite_error", &bipartite_error, py::arg("omega"), py::arg("pair"), py::arg("budget") = ErrorBudget{});
  m.def("vdh_bound", &vdh_bound, py::arg("n"), py::arg("d"));
  m.def("type_iii_kappa_max", &type_iii_kappa_max, py::arg("lam"));
  m.def("witness_maximal_error", &witness_maximal_error, py::arg("omega"), py::arg("d"));
  m.def(
      "kappa_estimate",
      [](const Spectrum& omega, unsigned d, const ErrorBudget& budget, std::uint64_t seed, unsigned threads) {
        SearchConfig search;
        search.seed = seed;
        search.threads = threads;
        const KappaEstimate est = kappa_estimate(omega, d, search, budget);
        py::dict out;
        out["value"] = est.value;
        out["d"] = est.d;
        out["truncation_K"] = est.truncation_K;
        out["argmax_phi"] = est.argmax_pair.phi.weights();
        out["argmax_psi"] = est.argmax_pair.psi.weights();
        out["search_evals"] = est.search_evals;
        return out;
      },
      py::arg("omega"), py::arg("d"), py::arg("budget") = ErrorBudget{}, py::arg("seed") = 7, py::arg("threads") = 0);

  py::module_ orc = m.def_submodule("oracle", "Dense small-dimension ground truth");
  orc.def(
      "schmidt_spectrum",
      [](const Eigen::MatrixXcd& amplitudes) { return oracle::schmidt_spectrum(oracle::DenseState::pure(amplitudes)); },
      py::arg("amplitudes"));
  orc.def(
      "min_vector_error_local_unitaries",
      [](const Eigen::MatrixXcd& s1, const Eigen::MatrixXcd& s2, unsigned restarts, double tol, std::uint64_t seed) {
        return oracle::min_vector_error_local_unitaries(oracle::DenseState::pure(s1), oracle::DenseState::pure(s2),
                                                        {restarts, tol, seed});
      },
      py::arg("s1"), py::arg("s2"), py::arg("restarts") = 8, py::arg("tol") = 1e-14, py::arg("seed") = 7);
  orc.def(
      "min_trace_distance_unitary_orbit",
      [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, unsigned restarts, double tol, std::uint64_t seed) {
        return oracle::min_trace_distance_unitary_orbit(oracle::DenseState::mixed(a), oracle::DenseState::mixed(b),
                                                        {restarts, tol, seed});
      },
      py::arg("a"), py::arg("b"), py::arg("restarts") = 8, py::arg("tol") = 1e-14, py::arg("seed") = 7);
  orc.def("exact_diag_xy", &oracle::exact_diag_xy, py::arg("L"), py::arg("gamma"), py::arg("h"));
  orc.def(
      "monopartite_to_bipartite_check",
      [](const Spectrum& omega, const TargetPair& pair, double tol, std::uint64_t seed) {
        const auto r = oracle::monopartite_to_bipartite_check(omega, pair, tol, seed);
        py::dict out;
        out["vector_error"] = r.vector_error;
        out["trace_error"] = r.trace_error;
        out["pass"] = r.pass;
        return out;
      },
      py::arg("omega"), py::arg("pair"), py::arg("tol") = 1e-6, py::arg("seed") = 7);
  orc.def(
      "certify_pure_pairs",
      [](std::size_t n, std::uint64_t seed) { return report_dict(oracle::certify_pure_pairs(n, seed)); },
      py::arg("instances") = 200, py::arg("seed") = oracle::kDefaultSeed);
  orc.def(
      "certify_mixed_pairs",
      [](std::size_t n, std::uint64_t seed) { return report_dict(oracle::certify_mixed_pairs(n, seed)); },
      py::arg("instances") = 200, py::arg("seed") = oracle::kDefaultSeed);
  orc.def(
      "certify_implication",
      [](std::size_t n, std::uint64_t seed) { return report_dict(oracle::certify_implication(n, seed)); },
      py::arg("instances") = 100, py::arg("seed") = oracle::kDefaultSeed);

  m.def(
      "_run_experiment",
      [](const std::string& config, const std::string& experiment, const std::string& out_dir, bool force,
         unsigned threads, bool plots) {
        const auto parsed = cli::parse_config(nlohmann::json::parse(config),
                                              experiment.empty() ? std::nullopt : std::optional(experiment));
        cli::RunOptions options;
        options.out_dir = out_dir;
        options.force = force;
        options.threads = threads;
        cli::ResultRecord record;
        {
          py::gil_scoped_release release;
          record = cli::run(parsed, options);
          if (plots) cli::emit_plotdata(record, options.out_dir);
        }
        nlohmann::json j = record;
        j["cache_hit"] = record.cache_hit;
        return j.dump();
      },
      py::arg("config"), py::arg("experiment"), py::arg("out_dir"), py::arg("force"), py::arg("threads"),
      py::arg("plots"));
  m.def(
      "_config_hash",
      [](const std::string& config, const std::string& experiment) {
        return cli::config_hash(cli::parse_config(nlohmann::json::parse(config),
                                                  experiment.empty() ? std::nullopt : std::optional(experiment)));
      },
      py::arg("config"), py::arg("experiment") = "");
}
