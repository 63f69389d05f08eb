#pragma once

// Independent reference computations used by the test suites and by
// `specavg verify`. Nothing here calls into the analytic fast paths it checks.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "specavg/spectra.hpp"
#include "specavg/symmetry.hpp"

namespace specavg::oracle {

/// Direct product formula for one basis function.
double phi(const ManifoldSpec& manifold, const EigenIndex& index, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Uniform periodic grid with `per_axis` points per coordinate, one point per row.
Eigen::MatrixXd periodic_grid(const ManifoldSpec& manifold, int per_axis);

/// Smallest per-axis grid that integrates products of basis functions exactly.
int exact_grid_size(const TruncatedBasis& basis);

/// <phi_j, phi_k> under the uniform measure by trapezoid quadrature.
Eigen::MatrixXd quadrature_gram(const TruncatedBasis& basis);

/// Entry (r, c) = <phi_c(g .), phi_r> on one eigenspace by quadrature.
Eigen::MatrixXd quadrature_block(const GroupElement& g, const TruncatedBasis& basis, std::size_t eigenspace);

/// Central-difference Laplacian of phi at x with step h.
double fd_laplacian(const ManifoldSpec& manifold, const EigenIndex& index, const Eigen::Ref<const Eigen::VectorXd>& x,
                    double h);

/// Closed form of E[x^2 sqrt(2) cos(pi l x)] on [-1, 1).
double square_cosine_closed_form(int frequency);

/// sum_j D^alpha f_j^2 accumulated in long double, independent of the library.
long double sobolev_norm_sq_extended(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& f,
                                     double alpha);

/// Orbit size of x under repeated generator actions, points compared after
/// rounding. Equals |G| when x has a trivial stabilizer.
std::size_t orbit_size(const ManifoldSpec& manifold, const std::vector<GroupElement>& generators,
                       const Eigen::Ref<const Eigen::VectorXd>& x);

/// Runs the oracle and property checks at desk scale; one line per check.
/// Returns true when all pass.
bool run_verification(std::ostream& out);

}  // namespace specavg::oracle
