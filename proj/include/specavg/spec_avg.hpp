#pragma once

// Spectral averaging: empirical eigenbasis coefficients up to a cutoff,
// followed by a per-eigenspace projection onto the group-invariant subspace.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "specavg/spectra.hpp"
#include "specavg/symmetry.hpp"

namespace specavg {

struct LabeledDataset {
  Eigen::MatrixXd points;  // one point per row
  Eigen::VectorXd labels;
  double noise_std = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(labels.size()); }
};

/// Oracle accounting: one count per eigenfunction evaluation and one per
/// representation-matrix entry computed.
struct OracleCalls {
  std::uint64_t eigenfunction_evaluations = 0;
  std::uint64_t representation_entries = 0;

  std::uint64_t total() const { return eigenfunction_evaluations + representation_entries; }
};

struct SpectralModel {
  TruncatedBasis basis;
  Eigen::VectorXd coefficients;
  std::optional<double> alpha;
  std::size_t cutoff_dim = 1;
  GroupSpec group;
  std::optional<Eigen::VectorXd> raw_coefficients;
  OracleCalls oracle_calls;
  /// Largest ||B f_hat||_inf over the eigenspaces.
  double max_residual = 0.0;
};

/// max(1, floor(n^(1/(1+alpha)))). Throws std::invalid_argument unless alpha > 1.
std::size_t cutoff_dimension(std::size_t n, double alpha);

/// (1/n) sum_i y_i phi_j(x_i) for every basis function.
Eigen::VectorXd empirical_coefficients(const LabeledDataset& dataset, const TruncatedBasis& basis);

/// Whole-eigenspace basis with total dimension at most `cutoff`.
TruncatedBasis basis_for_cutoff(const ManifoldSpec& manifold, std::size_t cutoff);

/// Fits an exactly invariant model. The cutoff is `cutoff_override` when
/// given, otherwise cutoff_dimension(n, alpha).
SpectralModel fit(const LabeledDataset& dataset, const ManifoldSpec& manifold, const GroupSpec& group,
                  std::optional<double> alpha, std::optional<std::size_t> cutoff_override = std::nullopt);

/// Projects every eigenspace of `coefficients` (aligned with `basis`) onto
/// the invariant subspace of `group`. Adds the representation entries it
/// computes to `calls` and returns the largest residual through `residual`.
Eigen::VectorXd project_invariant(const TruncatedBasis& basis, const GroupSpec& group,
                                  const Eigen::Ref<const Eigen::VectorXd>& coefficients, OracleCalls* calls = nullptr,
                                  double* residual = nullptr);

double predict(const SpectralModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd predict_rows(const SpectralModel& model, const Eigen::Ref<const Eigen::MatrixXd>& points);

/// sum_j D_lambda(j)^alpha f_j^2.
double sobolev_norm_sq(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& coefficients,
                       double alpha);

/// sum of f_j^2 over basis functions whose eigenspace has D_lambda > cutoff.
double tail_energy(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& coefficients,
                   std::size_t cutoff);

}  // namespace specavg
