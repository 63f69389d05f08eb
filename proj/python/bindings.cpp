#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "specavg/errors.hpp"
#include "specavg/harness.hpp"
#include "specavg/invariant_projection.hpp"
#include "specavg/io.hpp"
#include "specavg/kernels.hpp"
#include "specavg/spec_avg.hpp"

namespace py = pybind11;
using namespace specavg;

namespace {

LabeledDataset make_dataset(const Eigen::MatrixXd& points, const Eigen::VectorXd& labels) {
  if (points.rows() != labels.size()) throw DimensionMismatch("points and labels differ in count");
  return {points, labels, 0.0};
}

py::list index_list(const TruncatedBasis& basis) {
  py::list out;
  for (const auto& index : basis.indices()) {
    std::string pattern;
    for (auto t : index.pattern) pattern += t == Trig::Cos ? 'c' : 's';
    out.append(py::make_tuple(index.frequencies, pattern));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_specavg, m) {
  m.doc() = "Spectral averaging estimators and kernel baselines";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<GroupManifoldMismatch>(m, "GroupManifoldMismatch", PyExc_ValueError);
  py::register_exception<ResourceExhausted>(m, "ResourceExhausted", PyExc_RuntimeError);

  py::enum_<BasisMode>(m, "BasisMode")
      .value("FULL_FOURIER", BasisMode::FullFourier)
      .value("COSINE_ONLY", BasisMode::CosineOnly);

  py::class_<ManifoldSpec>(m, "Manifold")
      .def_static("torus", &ManifoldSpec::torus, py::arg("dimension"), py::arg("mode") = BasisMode::FullFourier)
      .def_static("circle", &ManifoldSpec::circle)
      .def_property_readonly("dimension", [](const ManifoldSpec& s) { return s.dimension; })
      .def_property_readonly("is_circle", [](const ManifoldSpec& s) { return s.kind == ManifoldKind::Circle; })
      .def("canonicalize", [](const ManifoldSpec& s, const Eigen::VectorXd& x) { return canonicalize(s, x); })
      .def("__repr__", [](const ManifoldSpec& s) { return to_json(s).dump(); });

  py::class_<GroupSpec>(m, "Group")
      .def_static("trivial", &GroupSpec::trivial)
      .def_static("sign_flips", &GroupSpec::sign_flips)
      .def_static("coordinate_permutations", &GroupSpec::coordinate_permutations)
      .def_static("cyclic_rotation", &GroupSpec::cyclic_rotation)
      .def_property_readonly("order", [](const GroupSpec& g) { return g.declared_order; })
      .def_property_readonly("generator_count", [](const GroupSpec& g) { return g.generators.size(); })
      .def("apply", [](const GroupSpec& g, const ManifoldSpec& manifold, std::size_t element,
                       const Eigen::VectorXd& x) {
             const auto elements = closure(g);
             if (element >= elements.size()) throw py::index_error("element index out of range");
             return apply_group_element(g, manifold, elements[element], x);
           },
           py::arg("manifold"), py::arg("element"), py::arg("x"))
      .def("__repr__", [](const GroupSpec& g) { return to_json(g).dump(); });

  py::class_<TruncatedBasis>(m, "Basis")
      .def_property_readonly("size", &TruncatedBasis::size)
      .def_property_readonly("cumulative_dims", [](const TruncatedBasis& b) {
        return std::vector<std::size_t>(b.cumulative_dims().begin(), b.cumulative_dims().end());
      })
      .def_property_readonly("eigenvalues", [](const TruncatedBasis& b) {
        std::vector<double> out;
        for (const auto& e : b.eigenspaces()) out.push_back(e.eigenvalue);
        return out;
      })
      .def_property_readonly("indices", &index_list)
      .def("eval", [](const TruncatedBasis& b, const Eigen::MatrixXd& points) { return b.eval_rows(points); });

  m.def("build_basis", &build_basis, py::arg("manifold"), py::arg("min_total_dim"),
        py::arg("lattice_budget") = kDefaultLatticeBudget);
  m.def("build_basis_within", &build_basis_within, py::arg("manifold"), py::arg("max_total_dim"),
        py::arg("lattice_budget") = kDefaultLatticeBudget);
  m.def("eval_basis", [](const TruncatedBasis& b, const Eigen::VectorXd& x) { return eval_basis(b, x); });

  m.def("closure_size", [](const GroupSpec& g, std::size_t cap) { return closure(g, cap).size(); }, py::arg("group"),
        py::arg("cap") = kDefaultClosureCap);
  m.def(
      "representation_block",
      [](const GroupSpec& g, std::size_t element, const TruncatedBasis& basis, std::size_t eigenspace) {
        const auto elements = closure(g);
        if (element >= elements.size()) throw py::index_error("element index out of range");
        return representation_block(g, elements[element], basis, eigenspace).matrix;
      },
      py::arg("group"), py::arg("element"), py::arg("basis"), py::arg("eigenspace"));
  m.def(
      "project",
      [](const Eigen::VectorXd& f, const std::vector<Eigen::MatrixXd>& generator_blocks) {
        std::vector<RepresentationBlock> blocks;
        for (const auto& d : generator_blocks) blocks.push_back({0.0, d});
        const auto r = project(f, build_constraints(blocks));
        return py::make_tuple(r.projected, r.residual, r.effective_rank);
      },
      py::arg("f"), py::arg("generator_blocks"));
  m.def("averaging_projector", &averaging_projector, py::arg("group"), py::arg("basis"), py::arg("eigenspace"),
        py::arg("cap") = kDefaultClosureCap);
  m.def("cutoff_dimension", &cutoff_dimension, py::arg("n"), py::arg("alpha"));

  py::class_<SpectralModel>(m, "SpectralModel")
      .def_readonly("basis", &SpectralModel::basis)
      .def_readonly("coefficients", &SpectralModel::coefficients)
      .def_readonly("raw_coefficients", &SpectralModel::raw_coefficients)
      .def_readonly("cutoff", &SpectralModel::cutoff_dim)
      .def_readonly("max_residual", &SpectralModel::max_residual)
      .def_property_readonly("oracle_calls", [](const SpectralModel& s) { return s.oracle_calls.total(); })
      .def("predict", [](const SpectralModel& s, const Eigen::MatrixXd& points) { return predict_rows(s, points); })
      .def("to_json", [](const SpectralModel& s) { return to_json(s).dump(); })
      .def_static("from_json", [](const std::string& text) { return model_from_json(Json::parse(text)); });

  m.def(
      "fit",
      [](const Eigen::MatrixXd& points, const Eigen::VectorXd& labels, const ManifoldSpec& manifold,
         const GroupSpec& group, std::optional<double> alpha, std::optional<std::size_t> cutoff) {
        return fit(make_dataset(points, labels), manifold, group, alpha, cutoff);
      },
      py::arg("points"), py::arg("labels"), py::arg("manifold"), py::arg("group"), py::arg("alpha") = py::none(),
      py::arg("cutoff") = py::none());

  py::class_<KrrModel>(m, "KrrModel")
      .def_readonly("weights", &KrrModel::weights)
      .def_readonly("ridge", &KrrModel::ridge)
      .def_readonly("jitter", &KrrModel::jitter)
      .def("predict", [](const KrrModel& k, const Eigen::MatrixXd& points) { return krr_predict_rows(k, points); })
      .def("to_json", [](const KrrModel& k) { return to_json(k).dump(); })
      .def_static("from_json", [](const std::string& text) { return krr_model_from_json(Json::parse(text)); });

  m.def(
      "krr_fit",
      [](const Eigen::MatrixXd& points, const Eigen::VectorXd& labels, const ManifoldSpec& manifold, double bandwidth,
         double ridge, std::optional<GroupSpec> average_over) {
        KernelSpec spec = von_mises(manifold, bandwidth);
        if (average_over) spec = group_averaged(std::move(spec), *average_over);
        return krr_fit(make_dataset(points, labels), spec, ridge);
      },
      py::arg("points"), py::arg("labels"), py::arg("manifold"), py::arg("bandwidth") = 1.0, py::arg("ridge") = 0.01,
      py::arg("average_over") = py::none(), "von Mises kernel ridge regression, optionally group averaged");

  m.def(
      "invariance_discrepancy",
      [](py::object model, const ManifoldSpec& manifold, const Eigen::MatrixXd& points, const GroupSpec& group) {
        BatchPredictor predictor = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
          if (py::isinstance<SpectralModel>(model)) return predict_rows(model.cast<const SpectralModel&>(), x);
          return krr_predict_rows(model.cast<const KrrModel&>(), x);
        };
        const auto d = invariance_discrepancy(predictor, manifold, points, group).front();
        return py::make_tuple(d.value, d.sampled);
      },
      py::arg("model"), py::arg("manifold"), py::arg("points"), py::arg("group"));

  m.def(
      "run_experiment",
      [](const std::string& config_path, const std::string& out, bool record_timing, std::size_t threads) {
        RunOptions options;
        options.record_timing = record_timing;
        options.threads = threads;
        py::gil_scoped_release release;
        return run_experiment(load_config(config_path), out, options).size();
      },
      py::arg("config"), py::arg("out") = "", py::arg("record_timing") = true, py::arg("threads") = 0,
      "Runs a JSON config and writes the CSV; returns the row count.");
}
