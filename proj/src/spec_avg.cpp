#include "specavg/spec_avg.hpp"

#include <cmath>
#include <stdexcept>

#include "specavg/errors.hpp"
#include "specavg/invariant_projection.hpp"

namespace specavg {

std::size_t cutoff_dimension(std::size_t n, double alpha) {
  if (n < 1) throw std::invalid_argument("need at least one sample");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and > 1");
  const double exponent = 1.0 + alpha;
  const double nd = static_cast<double>(n);
  auto d = static_cast<std::size_t>(std::floor(std::pow(nd, 1.0 / exponent)));
  // pow rounding can be off by one at exact powers.
  while (d > 1 && std::pow(static_cast<double>(d), exponent) > nd) --d;
  while (std::pow(static_cast<double>(d + 1), exponent) <= nd) ++d;
  return std::max<std::size_t>(d, 1);
}

Eigen::VectorXd empirical_coefficients(const LabeledDataset& dataset, const TruncatedBasis& basis) {
  if (dataset.size() == 0) throw std::invalid_argument("empty dataset");
  if (dataset.points.rows() != dataset.labels.size()) throw DimensionMismatch("points and labels differ in count");
  if (dataset.points.cols() != basis.manifold().dimension) {
    throw DimensionMismatch("dataset points do not match the basis manifold");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < dataset.points.rows(); ++i) {
    sum.noalias() += dataset.labels[i] * basis.eval(dataset.points.row(i).transpose());
  }
  return sum / static_cast<double>(dataset.size());
}

TruncatedBasis basis_for_cutoff(const ManifoldSpec& manifold, std::size_t cutoff) {
  return build_basis_within(manifold, std::max<std::size_t>(cutoff, 1));
}

Eigen::VectorXd project_invariant(const TruncatedBasis& basis, const GroupSpec& group,
                                  const Eigen::Ref<const Eigen::VectorXd>& coefficients, OracleCalls* calls,
                                  double* residual) {
  check_compatible(group, basis.manifold());
  if (coefficients.size() != static_cast<Eigen::Index>(basis.size())) {
    throw DimensionMismatch("coefficients do not match basis");
  }
  Eigen::VectorXd out(coefficients.size());
  double worst = 0.0;
  for (std::size_t e = 0; e < basis.eigenspaces().size(); ++e) {
    const auto& space = basis.eigenspaces()[e];
    std::vector<RepresentationBlock> blocks;
    blocks.reserve(group.generators.size());
    for (const auto& g : group.generators) blocks.push_back(representation_block(g, basis, e));
    if (calls) calls->representation_entries += group.generators.size() * space.size * space.size;
    const auto offset = static_cast<Eigen::Index>(space.offset);
    const auto m = static_cast<Eigen::Index>(space.size);
    const auto result = project(coefficients.segment(offset, m), build_constraints(blocks));
    out.segment(offset, m) = result.projected;
    worst = std::max(worst, result.residual);
  }
  if (residual) *residual = worst;
  return out;
}

SpectralModel fit(const LabeledDataset& dataset, const ManifoldSpec& manifold, const GroupSpec& group,
                  std::optional<double> alpha, std::optional<std::size_t> cutoff_override) {
  manifold.validate();
  check_compatible(group, manifold);
  if (!alpha && !cutoff_override) throw std::invalid_argument("fit needs alpha or an explicit cutoff");
  if (cutoff_override && *cutoff_override < 1) throw std::invalid_argument("cutoff must be at least 1");

  SpectralModel model;
  model.alpha = alpha;
  model.group = group;
  model.cutoff_dim = cutoff_override ? *cutoff_override : cutoff_dimension(dataset.size(), *alpha);
  model.basis = basis_for_cutoff(manifold, model.cutoff_dim);

  Eigen::VectorXd raw = empirical_coefficients(dataset, model.basis);
  model.oracle_calls.eigenfunction_evaluations = dataset.size() * model.basis.size();
  model.coefficients = project_invariant(model.basis, group, raw, &model.oracle_calls, &model.max_residual);
  model.raw_coefficients = std::move(raw);
  return model;
}

double predict(const SpectralModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return model.basis.eval(x).dot(model.coefficients);
}

Eigen::VectorXd predict_rows(const SpectralModel& model, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  return model.basis.eval_rows(points) * model.coefficients;
}

double sobolev_norm_sq(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& coefficients,
                       double alpha) {
  if (coefficients.size() != static_cast<Eigen::Index>(basis.size())) {
    throw DimensionMismatch("coefficients do not match basis");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const double c = coefficients[static_cast<Eigen::Index>(j)];
    sum += std::pow(static_cast<double>(basis.cumulative_dim_of(j)), alpha) * c * c;
  }
  return sum;
}

double tail_energy(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& coefficients,
                   std::size_t cutoff) {
  if (coefficients.size() != static_cast<Eigen::Index>(basis.size())) {
    throw DimensionMismatch("coefficients do not match basis");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis.cumulative_dim_of(j) > cutoff) sum += coefficients[static_cast<Eigen::Index>(j)] * coefficients[static_cast<Eigen::Index>(j)];
  }
  return sum;
}

}  // namespace specavg
