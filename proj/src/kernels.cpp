#include "specavg/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "specavg/errors.hpp"

namespace specavg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double angle_scale(const ManifoldSpec& manifold) {
  return manifold.kind == ManifoldKind::Circle ? 1.0 : std::numbers::pi;
}

// [cos(s x_1) .. cos(s x_d), sin(s x_1) .. sin(s x_d)] per row, so that
// sum_i cos(s (x_i - y_i)) = F(x) . F(y).
Eigen::MatrixXd von_mises_features(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const double s = angle_scale(manifold);
  const auto d = points.cols();
  Eigen::MatrixXd f(points.rows(), 2 * d);
  f.leftCols(d) = (s * points.array()).cos().matrix();
  f.rightCols(d) = (s * points.array()).sin().matrix();
  return f;
}

void check_rows(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (points.cols() != manifold.dimension) throw DimensionMismatch("points do not match kernel manifold");
}

}  // namespace

const ManifoldSpec& KernelSpec::manifold() const {
  return std::visit(overloaded{
                        [](const VonMises& k) -> const ManifoldSpec& { return k.manifold; },
                        [](const TruncatedSobolev& k) -> const ManifoldSpec& { return k.basis.manifold(); },
                        [](const GroupAveraged& k) -> const ManifoldSpec& { return k.inner->manifold(); },
                    },
                    kind);
}

KernelSpec von_mises(const ManifoldSpec& manifold, double bandwidth) {
  manifold.validate();
  if (!(bandwidth > 0.0)) throw std::invalid_argument("von Mises bandwidth must be positive");
  return {VonMises{manifold, bandwidth}};
}

KernelSpec truncated_sobolev(TruncatedBasis basis, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("Sobolev exponent must be positive");
  return {TruncatedSobolev{std::move(basis), alpha}};
}

KernelSpec group_averaged(KernelSpec inner, GroupSpec group) {
  check_compatible(group, inner.manifold());
  return {GroupAveraged{std::make_shared<const KernelSpec>(std::move(inner)), std::move(group)}};
}

Kernel::Kernel(KernelSpec spec, std::size_t closure_cap) : spec_(std::move(spec)) {
  std::visit(overloaded{
                 [](const VonMises&) {},
                 [&](const TruncatedSobolev& k) {
                   sobolev_weights_.resize(static_cast<Eigen::Index>(k.basis.size()));
                   for (std::size_t j = 0; j < k.basis.size(); ++j) {
                     sobolev_weights_[static_cast<Eigen::Index>(j)] =
                         std::pow(static_cast<double>(k.basis.cumulative_dim_of(j)), -k.alpha);
                   }
                 },
                 [&](const GroupAveraged& k) {
                   inner_ = std::make_shared<const Kernel>(*k.inner, closure_cap);
                   elements_ = closure(k.group, closure_cap);
                 },
             },
             spec_.kind);
}

double Kernel::operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const auto& manifold = this->manifold();
  if (x.size() != manifold.dimension || y.size() != manifold.dimension) {
    throw DimensionMismatch("points do not match kernel manifold");
  }
  return std::visit(overloaded{
                        [&](const VonMises& k) {
                          const double s = angle_scale(manifold);
                          double sum = 0.0;
                          for (Eigen::Index i = 0; i < x.size(); ++i) sum += std::cos(s * (x[i] - y[i]));
                          return std::exp(k.bandwidth * sum);
                        },
                        [&](const TruncatedSobolev& k) {
                          const Eigen::VectorXd px = k.basis.eval(x);
                          const Eigen::VectorXd py = k.basis.eval(y);
                          return (px.array() * sobolev_weights_.array() * py.array()).sum();
                        },
                        [&](const GroupAveraged&) {
                          double sum = 0.0;
                          for (const auto& g : elements_) sum += (*inner_)(apply_group_element(manifold, g, x), y);
                          return sum / static_cast<double>(elements_.size());
                        },
                    },
                    spec_.kind);
}

Eigen::MatrixXd Kernel::cross(const Eigen::Ref<const Eigen::MatrixXd>& xs,
                              const Eigen::Ref<const Eigen::MatrixXd>& ys) const {
  const auto& manifold = this->manifold();
  check_rows(manifold, xs);
  check_rows(manifold, ys);
  return std::visit(overloaded{
                        [&](const VonMises& k) -> Eigen::MatrixXd {
                          const Eigen::MatrixXd fx = von_mises_features(manifold, xs);
                          const Eigen::MatrixXd fy = von_mises_features(manifold, ys);
                          Eigen::MatrixXd out = fx * fy.transpose();
                          return (k.bandwidth * out.array()).exp().matrix();
                        },
                        [&](const TruncatedSobolev& k) -> Eigen::MatrixXd {
                          const Eigen::MatrixXd px = k.basis.eval_rows(xs);
                          const Eigen::MatrixXd py = k.basis.eval_rows(ys);
                          return px * sobolev_weights_.asDiagonal() * py.transpose();
                        },
                        [&](const GroupAveraged&) -> Eigen::MatrixXd {
                          Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(xs.rows(), ys.rows());
                          for (const auto& g : elements_) sum += inner_->cross(apply_group_element_rows(manifold, g, xs), ys);
                          return sum / static_cast<double>(elements_.size());
                        },
                    },
                    spec_.kind);
}

Eigen::MatrixXd Kernel::gram(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  Eigen::MatrixXd k = cross(points, points);
  return 0.5 * (k + k.transpose());
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  return Kernel(spec)(x, y);
}

KrrSolve solve_krr(const Eigen::Ref<const Eigen::MatrixXd>& gram, const Eigen::Ref<const Eigen::VectorXd>& labels,
                   double ridge) {
  if (!(ridge > 0.0)) throw std::invalid_argument("ridge must be positive");
  const auto n = gram.rows();
  if (gram.cols() != n || labels.size() != n) throw DimensionMismatch("gram matrix and labels differ in size");
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += static_cast<double>(n) * ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  KrrSolve out;
  if (llt.info() != Eigen::Success) {
    out.jitter = 1e-10 * gram.trace() / static_cast<double>(n);
    system.diagonal().array() += out.jitter;
    llt.compute(system);
    if (llt.info() != Eigen::Success) throw std::runtime_error("kernel system is not positive definite");
  }
  out.weights = llt.solve(labels);
  if (!out.weights.allFinite()) throw std::runtime_error("kernel ridge weights are not finite");
  return out;
}

KrrModel krr_fit(const LabeledDataset& dataset, std::shared_ptr<const Kernel> kernel, double ridge,
                 const KrrOptions& options) {
  const std::size_t n = dataset.size();
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (n * n * sizeof(double) > options.gram_memory_budget_bytes) {
    throw ResourceExhausted("gram matrix of " + std::to_string(n) + " points exceeds the memory budget");
  }
  const Eigen::MatrixXd gram = kernel->gram(dataset.points);
  auto solved = solve_krr(gram, dataset.labels, ridge);
  return {dataset.points, std::move(solved.weights), std::move(kernel), ridge, solved.jitter};
}

KrrModel krr_fit(const LabeledDataset& dataset, const KernelSpec& kernel, double ridge, const KrrOptions& options) {
  return krr_fit(dataset, std::make_shared<const Kernel>(kernel, options.closure_cap), ridge, options);
}

double krr_predict(const KrrModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_point(model.kernel->manifold(), x);
  return (model.kernel->cross(x.transpose(), model.points) * model.weights)(0);
}

Eigen::VectorXd krr_predict_rows(const KrrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  return model.kernel->cross(points, model.points) * model.weights;
}

}  // namespace specavg
