#include "specavg/invariant_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "specavg/errors.hpp"

namespace specavg {

ConstraintStack build_constraints(std::span<const RepresentationBlock> blocks) {
  if (blocks.empty()) throw std::invalid_argument("need at least one generator block");
  const auto m = blocks.front().matrix.rows();
  ConstraintStack stack;
  stack.eigenvalue = blocks.front().eigenvalue;
  stack.block_dim = static_cast<std::size_t>(m);
  stack.generator_count = blocks.size();
  stack.matrix.resize(m * static_cast<Eigen::Index>(blocks.size()), m);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& d = blocks[k].matrix;
    if (d.rows() != m || d.cols() != m) throw DimensionMismatch("representation blocks differ in size");
    if (blocks[k].eigenvalue != stack.eigenvalue) throw DimensionMismatch("representation blocks differ in eigenvalue");
    stack.matrix.middleRows(static_cast<Eigen::Index>(k) * m, m) = d - Eigen::MatrixXd::Identity(m, m);
  }
  return stack;
}

InvariantProjector::InvariantProjector(const ConstraintStack& constraints) : constraints_(constraints.matrix) {
  const auto m = constraints_.cols();
  projector_ = Eigen::MatrixXd::Identity(m, m);
  if (constraints_.rows() == 0 || m == 0) return;
  if (!constraints_.allFinite()) throw std::invalid_argument("constraint matrix has non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(constraints_, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
  const double dims = static_cast<double>(std::max(constraints_.rows(), constraints_.cols()));
  // Eigenvalues of B B^T are the squared singular values of B.
  const double cutoff = dims * sigma_max * sigma_max * 1e-12;
  rank_ = 0;
  while (rank_ < sigma.size() && sigma[rank_] * sigma[rank_] > cutoff) ++rank_;
  if (rank_ == 0) return;

  // B^T (B B^T)^+ B with (B B^T)^+ = U_r S_r^-2 U_r^T.
  const Eigen::MatrixXd u = svd.matrixU().leftCols(rank_);
  const Eigen::MatrixXd w = u.transpose() * constraints_;
  const Eigen::VectorXd inv_sq = sigma.head(rank_).array().square().inverse();
  projector_ -= w.transpose() * inv_sq.asDiagonal() * w;
  // Entries at roundoff level are structural zeros (e.g. sine terms under
  // sign flips); flush them so those coefficients come out exactly 0.
  const double flush = 64.0 * static_cast<double>(m) * std::numeric_limits<double>::epsilon();
  projector_ = (projector_.array().abs() < flush).select(0.0, projector_);
}

ProjectionResult InvariantProjector::apply(const Eigen::Ref<const Eigen::VectorXd>& f_tilde) const {
  if (f_tilde.size() != projector_.rows()) throw DimensionMismatch("coefficient vector does not match eigenspace");
  if (!f_tilde.allFinite()) throw std::invalid_argument("coefficient vector has non-finite entries");
  ProjectionResult result;
  result.projected = projector_ * f_tilde;
  result.residual = constraints_.rows() == 0 ? 0.0 : (constraints_ * result.projected).cwiseAbs().maxCoeff();
  result.effective_rank = rank_;
  return result;
}

ProjectionResult project(const Eigen::Ref<const Eigen::VectorXd>& f_tilde, const ConstraintStack& constraints) {
  if (f_tilde.size() != static_cast<Eigen::Index>(constraints.matrix.cols())) {
    throw DimensionMismatch("coefficient vector does not match eigenspace");
  }
  if (!f_tilde.allFinite()) throw std::invalid_argument("coefficient vector has non-finite entries");
  return InvariantProjector(constraints).apply(f_tilde);
}

Eigen::MatrixXd averaging_projector(const GroupSpec& group, const TruncatedBasis& basis, std::size_t eigenspace,
                                    std::size_t cap) {
  check_compatible(group, basis.manifold());
  if (eigenspace >= basis.eigenspaces().size()) throw std::out_of_range("eigenspace index out of range");
  const auto elements = closure(group, cap);
  const auto m = static_cast<Eigen::Index>(basis.eigenspaces()[eigenspace].size);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  for (const auto& g : elements) sum += representation_block(g, basis, eigenspace).matrix;
  return sum / static_cast<double>(elements.size());
}

}  // namespace specavg
