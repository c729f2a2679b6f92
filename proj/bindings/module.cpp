#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "sep/analysis.hpp"
#include "sep/calibration.hpp"
#include "sep/cli.hpp"
#include "sep/instance.hpp"
#include "sep/render.hpp"

namespace py = pybind11;
using namespace sep;

namespace {

std::vector<std::pair<double, double>> measure_atoms(const DiscreteMeasure& m) {
  std::vector<std::pair<double, double>> out;
  for (const auto& a : m.atoms()) out.push_back({a.x, a.p});
  return out;
}

DiscreteMeasure measure_from_pairs(const std::vector<std::pair<double, double>>& atoms) {
  std::vector<MassAtom> v;
  for (const auto& [x, p] : atoms) v.push_back({x, p});
  return DiscreteMeasure(std::move(v));
}

std::string verdict_name(DominanceVerdict::Kind k) {
  switch (k) {
    case DominanceVerdict::Kind::Equal:
      return "Equal";
    case DominanceVerdict::Kind::FirstSmaller:
      return "FirstSmaller";
    case DominanceVerdict::Kind::SecondSmaller:
      return "SecondSmaller";
    case DominanceVerdict::Kind::Crossing:
      return "Crossing";
  }
  return "";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact and Monte Carlo Skorokhod embeddings with vh-barrier rules";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConvexOrderViolatedError>(m, "ConvexOrderViolated");
  py::register_exception<NonTerminatingError>(m, "NonTerminating");
  py::register_exception<NoProgressError>(m, "NoProgress");

  py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
      .def(py::init(&measure_from_pairs), py::arg("atoms"))
      .def_static("point_mass", &DiscreteMeasure::point_mass, py::arg("x"),
                  py::arg("p") = 1.0)
      .def_property_readonly("atoms", &measure_atoms)
      .def("total", &DiscreteMeasure::total)
      .def("mean", &DiscreteMeasure::mean)
      .def("mass_at", &DiscreteMeasure::mass_at)
      .def("support", &DiscreteMeasure::support)
      .def("__len__", &DiscreteMeasure::size)
      .def("__eq__", [](const DiscreteMeasure& a, const DiscreteMeasure& b) { return a == b; })
      .def("__repr__", [](const DiscreteMeasure& m_) {
        return "DiscreteMeasure(" + nlohmann::json(m_).dump() + ")";
      });

  m.def("moment", &moment, py::arg("m"), py::arg("k"));
  m.def("potential", &potential, py::arg("m"), py::arg("x"));
  m.def("convex_order", &convex_order, py::arg("lam"), py::arg("mu"));
  m.def("meet", &meet, py::arg("lam"), py::arg("mu"));
  m.def("tv_distance", &tv_distance);
  m.def(
      "random_convex_pair",
      [](std::uint64_t seed, int n_atoms, double spread, double keep_prob) {
        return random_convex_pair(seed, n_atoms, spread, keep_prob);
      },
      py::arg("seed"), py::arg("n_atoms"), py::arg("spread"),
      py::arg("keep_prob") = 0.35);

  py::class_<VLine>(m, "VLine")
      .def(py::init<double, double>(), py::arg("level"), py::arg("depth"))
      .def_readonly("level", &VLine::level)
      .def_readonly("depth", &VLine::depth);
  py::class_<HLine>(m, "HLine")
      .def(py::init<double, double>(), py::arg("level"), py::arg("right_end"))
      .def_readonly("level", &HLine::level)
      .def_readonly("right_end", &HLine::right_end);

  py::class_<VhBarrier>(m, "VhBarrier")
      .def(py::init<>())
      .def(py::init<std::vector<VLine>, std::vector<HLine>>(), py::arg("v_lines"),
           py::arg("h_lines"))
      .def_property_readonly("v_lines", &VhBarrier::v_lines)
      .def_property_readonly("h_lines", &VhBarrier::h_lines)
      .def("empty", &VhBarrier::empty)
      .def("__eq__", [](const VhBarrier& a, const VhBarrier& b) { return a == b; })
      .def("to_json", [](const VhBarrier& b) { return nlohmann::json(b).dump(); });

  py::enum_<HitConvention>(m, "HitConvention")
      .value("Closed", HitConvention::Closed)
      .value("Open", HitConvention::Open);
  m.def("vh_hit", &vh_hit, py::arg("barrier"), py::arg("max"), py::arg("min"),
        py::arg("convention") = HitConvention::Closed);
  m.def("barrier_union", &barrier_union);

  py::class_<StoppedLaw>(m, "StoppedLaw")
      .def_property_readonly("joint",
                             [](const StoppedLaw& law) {
                               std::vector<std::tuple<double, double, double, double>> out;
                               for (const auto& a : law.joint)
                                 out.push_back({a.endpoint, a.max, a.min, a.mass});
                               return out;
                             })
      .def_readonly("expected_duration", &StoppedLaw::expected_duration)
      .def_readonly("atom_mass_at_zero", &StoppedLaw::atom_mass_at_zero)
      .def("endpoint_law", &StoppedLaw::endpoint_law)
      .def("max_law", &StoppedLaw::max_law)
      .def("min_law", &StoppedLaw::min_law)
      .def("to_json", [](const StoppedLaw& law) { return nlohmann::json(law).dump(); })
      .def("to_csv", [](const StoppedLaw& law) {
        std::ostringstream os;
        write_csv(os, law);
        return os.str();
      });

  py::class_<PerkinsRule>(m, "PerkinsRule")
      .def(py::init<VhBarrier, DiscreteMeasure>(), py::arg("barrier"),
           py::arg("atom_stop"))
      .def_readonly("barrier", &PerkinsRule::barrier)
      .def_readonly("atom_stop", &PerkinsRule::atom_stop);

  m.def(
      "exact_stopped_law",
      [](const PerkinsRule& rule, const DiscreteMeasure& lambda,
         const std::vector<double>& extra) {
        return exact_stopped_law(rule, lambda, extra);
      },
      py::arg("rule"), py::arg("lam"), py::arg("extra_levels") = std::vector<double>{});
  m.def(
      "mc_stopped_law",
      [](const PerkinsRule& rule, const DiscreteMeasure& lambda, std::int64_t n_paths,
         std::uint64_t seed, int threads) {
        McOptions opt;
        opt.threads = threads;
        return mc_stopped_law(StoppingRule{rule}, lambda, n_paths, seed, opt);
      },
      py::arg("rule"), py::arg("lam"), py::arg("n_paths"), py::arg("seed"),
      py::arg("threads") = 1);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("rule", &CalibrationResult::rule)
      .def_readonly("residual_tv", &CalibrationResult::residual_tv)
      .def_readonly("iterations", &CalibrationResult::iterations)
      .def_readonly("certificate", &CalibrationResult::certificate)
      .def("to_json",
           [](const CalibrationResult& r) { return nlohmann::json(r).dump(); });

  m.def(
      "calibrate_perkins",
      [](const DiscreteMeasure& lambda, const DiscreteMeasure& mu, double tol) {
        return calibrate_perkins(lambda, mu, tol);
      },
      py::arg("lam"), py::arg("mu"), py::arg("tol") = 1e-10);
  m.def("feasible_band", &feasible_band, py::arg("lam"), py::arg("mu_prototype"),
        py::arg("level"));

  m.def("verify_embedding", &verify_embedding);
  m.def(
      "monotonicity_audit",
      [](const StoppedLaw& law) { return monotonicity_audit(law).size(); },
      "number of positive-time records away from both running extrema");
  m.def(
      "max_law_dominance",
      [](const StoppedLaw& a, const StoppedLaw& b) {
        const auto v = dominance(extrema_cdf(a, Extremum::Max),
                                 extrema_cdf(b, Extremum::Max));
        return verdict_name(v.kind);
      },
      "first-order dominance verdict between two running-max laws");

  m.def(
      "example_instance",
      [](double alpha) {
        const auto inst = example_instance(alpha);
        return std::make_pair(inst.lambda, inst.mu);
      },
      py::arg("alpha"));
  m.def("render_barrier_svg",
        [](const VhBarrier& b, const DiscreteMeasure& lambda, const DiscreteMeasure& mu) {
          return render_barrier_svg(b, lambda, mu);
        });
}
