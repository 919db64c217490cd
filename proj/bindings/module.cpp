#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "laps/run.hpp"

namespace py = pybind11;
using namespace laps;

namespace {

RunOptions options_from_kwargs(int maxiter, double C, double alpha, double acc_target,
                               const std::string& integrator, const std::string& equipartition,
                               int workers) {
  RunOptions opt;
  opt.maxiter = maxiter;
  opt.C = C;
  opt.alpha = alpha;
  if (acc_target > 0.0) opt.acceptance_target = acc_target;
  if (!integrator.empty()) opt.adjusted_scheme = IntegratorScheme::parse(integrator);
  if (equipartition == "full") {
    opt.equipartition = EquipartitionMode::full_rank;
  } else if (equipartition != "diag") {
    throw std::invalid_argument("equipartition must be 'diag' or 'full'");
  }
  opt.workers = workers;
  return opt;
}

py::dict record_to_dict(const RunRecord& r) {
  py::dict d;
  d["iteration"] = r.iteration;
  d["phase"] = phase_name(r.phase);
  d["grads_per_chain"] = r.gradient_calls_per_chain;
  d["step_size"] = r.step_size;
  d["decoherence_L"] = r.decoherence_length;
  d["eevpd"] = r.eevpd;
  d["eevpd_wanted"] = r.eevpd_wanted;
  d["equipartition"] = r.equipartition_loss;
  d["max_fluctuation"] = r.max_fluctuation;
  d["acceptance"] = r.acceptance;
  d["divergent_fraction"] = r.divergent_fraction;
  if (r.bias) {
    d["b2_max"] = r.bias->b2_max;
    d["b2_avg"] = r.bias->b2_avg;
  } else {
    d["b2_max"] = py::none();
    d["b2_avg"] = py::none();
  }
  return d;
}

Matrix samples_matrix(const EnsembleState& ens) {
  Matrix samples(ens.num_chains(), ens.dim());
  for (int m = 0; m < ens.num_chains(); ++m) {
    samples.row(m) = ens.chains[static_cast<std::size_t>(m)].x.transpose();
  }
  return samples;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "late-adjusted parallel ensemble sampler";
  m.attr("__version__") = kVersion;

  py::class_<TargetBundle, std::shared_ptr<TargetBundle>>(m, "Target")
      .def_property_readonly("dim",
                             [](const TargetBundle& b) { return b.target.dim; })
      .def_property_readonly("name",
                             [](const TargetBundle& b) { return b.target.name; })
      .def("log_density",
           [](const TargetBundle& b, const Vector& x) { return b.target.log_density(x); })
      .def("gradient",
           [](const TargetBundle& b, const Vector& x) { return b.target.gradient(x); })
      .def_property_readonly("second_moments",
                             [](const TargetBundle& b) -> py::object {
                               if (!b.ground_truth) return py::none();
                               return py::cast(b.ground_truth->second_moments);
                             });

  m.def("banana", [] { return std::make_shared<TargetBundle>(banana_target()); });
  m.def(
      "standard_gaussian",
      [](int dim) { return std::make_shared<TargetBundle>(standard_gaussian(dim)); },
      py::arg("dim"));
  m.def(
      "icg",
      [](int dim, std::uint64_t seed, double condition) {
        return std::make_shared<TargetBundle>(ill_conditioned_gaussian(dim, seed, condition));
      },
      py::arg("dim"), py::arg("seed") = 0, py::arg("condition") = 1e5);

  m.def(
      "custom_target",
      [](const std::string& name, int dim,
         const std::function<std::pair<double, Vector>(const Vector&)>& log_density_gradient,
         py::object second_moments, py::object second_moment_variances) {
        auto bundle = std::make_shared<TargetBundle>();
        bundle->target.dim = dim;
        bundle->target.name = name;
        // python callbacks re-acquire the GIL per evaluation
        bundle->target.log_density_gradient = [log_density_gradient](const Vector& x,
                                                                     Vector& grad) {
          py::gil_scoped_acquire gil;
          auto [lp, g] = log_density_gradient(x);
          grad = g;
          return lp;
        };
        bundle->target.log_density = [fg = bundle->target.log_density_gradient](const Vector& x) {
          Vector g;
          return fg(x, g);
        };
        bundle->target.gradient = [fg = bundle->target.log_density_gradient](const Vector& x) {
          Vector g;
          fg(x, g);
          return g;
        };
        bundle->init.sample = [dim](RngStream& rng) {
          Vector x(dim);
          rng.fill_normal(std::span<double>(x.data(), static_cast<std::size_t>(dim)));
          return x;
        };
        if (!second_moments.is_none()) {
          GroundTruth gt;
          gt.second_moments = second_moments.cast<Vector>();
          gt.second_moment_variances = second_moment_variances.cast<Vector>();
          gt.source = GroundTruth::Source::direct_sampling_oracle;
          bundle->ground_truth = std::move(gt);
        }
        return bundle;
      },
      py::arg("name"), py::arg("dim"), py::arg("log_density_gradient"),
      py::arg("second_moments") = py::none(), py::arg("second_moment_variances") = py::none());

  py::class_<RunResult>(m, "RunResult")
      .def_property_readonly("samples",
                             [](const RunResult& r) { return samples_matrix(r.ensemble); })
      .def_property_readonly("records",
                             [](const RunResult& r) {
                               py::list out;
                               for (const auto& rec : r.records) out.append(record_to_dict(rec));
                               return out;
                             })
      .def_property_readonly("switch_iteration",
                             [](const RunResult& r) -> py::object {
                               if (!r.switch_iteration) return py::none();
                               return py::cast(*r.switch_iteration);
                             })
      .def_property_readonly("frozen_step_size",
                             [](const RunResult& r) -> py::object {
                               if (!r.frozen_step_size) return py::none();
                               return py::cast(*r.frozen_step_size);
                             })
      .def_property_readonly("warnings", [](const RunResult& r) { return r.warnings; });

  m.def(
      "run",
      [](const std::shared_ptr<TargetBundle>& bundle, int chains, std::uint64_t seed, int maxiter,
         double C, double alpha, double acc_target, const std::string& integrator,
         const std::string& equipartition, int workers) {
        const RunOptions opt = options_from_kwargs(maxiter, C, alpha, acc_target, integrator,
                                                   equipartition, workers);
        py::gil_scoped_release release;
        return laps_run(*bundle, chains, opt, seed);
      },
      py::arg("target"), py::arg("chains"), py::arg("seed") = 0, py::arg("maxiter") = 1000,
      py::arg("C") = 0.025, py::arg("alpha") = 2.0, py::arg("acc_target") = -1.0,
      py::arg("integrator") = std::string(), py::arg("equipartition") = std::string("diag"),
      py::arg("workers") = 1);

  m.def(
      "grads_to_threshold",
      [](const RunResult& result, double threshold, const std::string& metric) -> py::object {
        const BiasMetric m = metric == "avg" ? BiasMetric::avg : BiasMetric::max;
        const auto g = grads_to_threshold(result.records, threshold, m);
        if (!g) return py::none();
        return py::cast(*g);
      },
      py::arg("result"), py::arg("threshold") = 0.01, py::arg("metric") = "max");

  m.def(
      "equipartition_gaussian",
      [](const Matrix& sigma_target, const Matrix& sigma_ensemble) {
        const auto g = equipartition_gaussian(sigma_target, sigma_ensemble);
        return std::make_pair(g.full, g.diag);
      },
      py::arg("sigma_target"), py::arg("sigma_ensemble"));
}
