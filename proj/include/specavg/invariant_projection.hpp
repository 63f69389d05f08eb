#pragma once

// Projection of an eigenspace coefficient vector onto the subspace fixed by
// a group, given only the representation matrices of its generators.

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "specavg/spectra.hpp"
#include "specavg/symmetry.hpp"

namespace specavg {

/// B = [D(g_1) - I; D(g_2) - I; ...] over the generators, in order.
/// null(B) is the invariant subspace of the eigenspace.
struct ConstraintStack {
  double eigenvalue = 0.0;
  std::size_t block_dim = 0;
  std::size_t generator_count = 0;
  Eigen::MatrixXd matrix;
};

ConstraintStack build_constraints(std::span<const RepresentationBlock> blocks);

/// Feasibility tolerance on ||B f||_inf for projected vectors.
inline constexpr double kFeasibilityTolerance = 1e-8;

struct ProjectionResult {
  Eigen::VectorXd projected;
  double residual = 0.0;  // ||B projected||_inf
  int effective_rank = 0;
};

/// Closed-form minimizer of ||f - f_tilde||^2 subject to B f = 0:
///     f_hat = f_tilde - B^T (B B^T)^+ B f_tilde.
/// The pseudoinverse comes from the thin SVD of B (B B^T = U S^2 U^T);
/// eigenvalues of B B^T below max(rows, cols) * s_max^2 * 1e-12 count as zero.
/// Throws std::invalid_argument on non-finite input.
ProjectionResult project(const Eigen::Ref<const Eigen::VectorXd>& f_tilde, const ConstraintStack& constraints);

/// The linear map f_tilde -> f_hat as a matrix. Reusable across projections
/// on the same eigenspace.
class InvariantProjector {
public:
  explicit InvariantProjector(const ConstraintStack& constraints);

  ProjectionResult apply(const Eigen::Ref<const Eigen::VectorXd>& f_tilde) const;
  const Eigen::MatrixXd& matrix() const { return projector_; }
  int effective_rank() const { return rank_; }

private:
  Eigen::MatrixXd constraints_;
  Eigen::MatrixXd projector_;
  int rank_ = 0;
};

/// (1/|G|) sum_g D(g) over the full closure; the orthogonal projector onto
/// the invariant subspace. Throws GroupTooLarge when the closure exceeds `cap`.
Eigen::MatrixXd averaging_projector(const GroupSpec& group, const TruncatedBasis& basis,
                                    std::size_t eigenspace, std::size_t cap = kDefaultClosureCap);

}  // namespace specavg
