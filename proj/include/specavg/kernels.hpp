#pragma once

// Kernel ridge regression baselines: the periodic von Mises kernel, the
// truncated Sobolev kernel of an eigenbasis, and group averaging of either.

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "specavg/spec_avg.hpp"
#include "specavg/spectra.hpp"
#include "specavg/symmetry.hpp"

namespace specavg {

struct KernelSpec;

/// prod_i exp(eta cos(pi (x_i - y_i))) on the torus, exp(eta cos(x - y)) on
/// the circle.
struct VonMises {
  ManifoldSpec manifold;
  double bandwidth = 1.0;
};

/// sum_j D_lambda(j)^-alpha phi_j(x) phi_j(y) over a finite basis.
struct TruncatedSobolev {
  TruncatedBasis basis;
  double alpha = 2.0;
};

/// (1/|G|) sum_g K(g x, y).
struct GroupAveraged {
  std::shared_ptr<const KernelSpec> inner;
  GroupSpec group;
};

struct KernelSpec {
  std::variant<VonMises, TruncatedSobolev, GroupAveraged> kind;

  const ManifoldSpec& manifold() const;
};

KernelSpec von_mises(const ManifoldSpec& manifold, double bandwidth);
KernelSpec truncated_sobolev(TruncatedBasis basis, double alpha);
KernelSpec group_averaged(KernelSpec inner, GroupSpec group);

/// Evaluator built from a KernelSpec. Group-averaged kernels enumerate their
/// closure once, at construction.
class Kernel {
public:
  explicit Kernel(KernelSpec spec, std::size_t closure_cap = kDefaultClosureCap);

  const KernelSpec& spec() const { return spec_; }
  const ManifoldSpec& manifold() const { return spec_.manifold(); }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// K(x_i, y_j) for rows x_i of `xs` and rows y_j of `ys`.
  Eigen::MatrixXd cross(const Eigen::Ref<const Eigen::MatrixXd>& xs, const Eigen::Ref<const Eigen::MatrixXd>& ys) const;
  /// Symmetrized cross(points, points).
  Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

private:
  KernelSpec spec_;
  std::shared_ptr<const Kernel> inner_;
  std::vector<GroupElement> elements_;
  Eigen::VectorXd sobolev_weights_;
};

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

struct KrrOptions {
  std::size_t gram_memory_budget_bytes = std::size_t{2} << 30;
  std::size_t closure_cap = kDefaultClosureCap;
};

struct KrrModel {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
  std::shared_ptr<const Kernel> kernel;
  double ridge = 0.0;
  /// Diagonal jitter added after a failed first factorization (0 if none).
  double jitter = 0.0;
};

/// Weights a solving (gram + n ridge I) a = y by Cholesky; retries once with
/// jitter 1e-10 trace/n on the diagonal. Throws std::runtime_error on a
/// second failure.
struct KrrSolve {
  Eigen::VectorXd weights;
  double jitter = 0.0;
};
KrrSolve solve_krr(const Eigen::Ref<const Eigen::MatrixXd>& gram, const Eigen::Ref<const Eigen::VectorXd>& labels,
                   double ridge);

KrrModel krr_fit(const LabeledDataset& dataset, const KernelSpec& kernel, double ridge, const KrrOptions& options = {});
KrrModel krr_fit(const LabeledDataset& dataset, std::shared_ptr<const Kernel> kernel, double ridge,
                 const KrrOptions& options = {});

double krr_predict(const KrrModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd krr_predict_rows(const KrrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& points);

}  // namespace specavg
