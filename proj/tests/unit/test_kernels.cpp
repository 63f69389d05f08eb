#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "specavg/errors.hpp"
#include "specavg/harness.hpp"
#include "specavg/kernels.hpp"

using namespace specavg;

namespace {

Eigen::MatrixXd uniform_points(const ManifoldSpec& m, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(m.chart_min(), m.chart_min() + m.period());
  Eigen::MatrixXd p(n, m.dimension);
  for (auto& v : p.reshaped()) v = u(rng);
  return p;
}

LabeledDataset dataset(const ManifoldSpec& m, Eigen::Index n, std::uint64_t seed) {
  LabeledDataset d;
  d.points = uniform_points(m, n, seed);
  d.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.labels[i] = d.points.row(i).squaredNorm() + 0.1 * std::sin(7.0 * static_cast<double>(i));
  }
  return d;
}

}  // namespace

TEST_CASE("von Mises values") {
  const auto m = ManifoldSpec::torus(3);
  const auto k = von_mises(m, 0.7);
  const Eigen::Vector3d x(0.2, -0.4, 0.9);
  CHECK(kernel_eval(k, x, x) == doctest::Approx(std::exp(0.7 * 3)).epsilon(1e-15));
  const auto k1 = von_mises(ManifoldSpec::torus(1), 1.0);
  CHECK(kernel_eval(k1, Eigen::VectorXd::Constant(1, 0.25), Eigen::VectorXd::Constant(1, -0.25)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  const auto kc = von_mises(ManifoldSpec::circle(), 2.0);
  CHECK(kernel_eval(kc, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0 - std::numbers::pi / 2)) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fast cross matrix matches the direct formula") {
  for (const auto& spec : {von_mises(ManifoldSpec::torus(4), 1.3), von_mises(ManifoldSpec::circle(), 0.5),
                           truncated_sobolev(build_basis_within(ManifoldSpec::torus(2), 40), 2.0),
                           group_averaged(von_mises(ManifoldSpec::torus(3), 1.0), GroupSpec::sign_flips(3))}) {
    const Kernel k(spec);
    const auto xs = uniform_points(k.manifold(), 15, 1);
    const auto ys = uniform_points(k.manifold(), 9, 2);
    const auto c = k.cross(xs, ys);
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      for (Eigen::Index j = 0; j < ys.rows(); ++j) {
        const Eigen::VectorXd x = xs.row(i).transpose(), y = ys.row(j).transpose();
        CHECK(c(i, j) == doctest::Approx(k(x, y)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Gram matrices are symmetric PSD") {
  for (const auto& spec : {von_mises(ManifoldSpec::torus(2), 1.0), von_mises(ManifoldSpec::torus(10), 1.0),
                           truncated_sobolev(build_basis_within(ManifoldSpec::torus(3), 60), 2.0),
                           group_averaged(von_mises(ManifoldSpec::torus(2), 2.0), GroupSpec::coordinate_permutations(2))}) {
    const Kernel k(spec);
    const auto g = k.gram(uniform_points(k.manifold(), 200, 3));
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    CHECK(min_eig >= -1e-8 * g.trace());
  }
}

TEST_CASE("group-averaged kernel is invariant in each argument") {
  const auto m = ManifoldSpec::torus(3);
  const auto group = GroupSpec::sign_flips(3);
  const auto spec = group_averaged(von_mises(m, 1.0), group);
  const auto xs = uniform_points(m, 20, 4);
  const auto ys = uniform_points(m, 20, 5);
  for (const auto& g : closure(group)) {
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      const Eigen::VectorXd x = xs.row(i).transpose(), y = ys.row(i).transpose();
      const double base = kernel_eval(spec, x, y);
      CHECK(std::abs(kernel_eval(spec, apply_group_element(m, g, x), y) - base) <= 1e-12 * std::abs(base));
    }
  }
  CHECK_THROWS_AS(Kernel(group_averaged(von_mises(ManifoldSpec::torus(8), 1.0), GroupSpec::coordinate_permutations(8)), 1000),
                  GroupTooLarge);
}

TEST_CASE("truncated Sobolev kernel is shift invariant under the built-in isometries") {
  const auto m = ManifoldSpec::torus(3);
  const auto spec = truncated_sobolev(build_basis_within(m, 60), 2.0);
  const auto xs = uniform_points(m, 10, 6);
  const auto ys = uniform_points(m, 10, 7);
  for (const auto& group : {GroupSpec::sign_flips(3), GroupSpec::coordinate_permutations(3)}) {
    for (const auto& g : closure(group)) {
      for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        const Eigen::VectorXd x = xs.row(i).transpose(), y = ys.row(i).transpose();
        CHECK(std::abs(kernel_eval(spec, apply_group_element(m, g, x), apply_group_element(m, g, y)) -
                       kernel_eval(spec, x, y)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("KRR scalar and zero cases") {
  const auto m = ManifoldSpec::torus(2);
  const auto spec = von_mises(m, 1.0);
  LabeledDataset one;
  one.points = uniform_points(m, 1, 8);
  one.labels = Eigen::VectorXd::Constant(1, 3.0);
  const double k0 = std::exp(2.0);
  const auto model = krr_fit(one, spec, 0.5);
  CHECK(model.weights[0] == doctest::Approx(3.0 / (k0 + 0.5)).epsilon(1e-14));
  CHECK(krr_predict(model, one.points.row(0).transpose()) == doctest::Approx(3.0 * k0 / (k0 + 0.5)).epsilon(1e-14));

  auto zero = dataset(m, 30, 9);
  zero.labels.setZero();
  const auto z = krr_fit(zero, spec, 0.1);
  CHECK(z.weights.isZero(0.0));
  CHECK(krr_predict(z, Eigen::Vector2d(0.1, 0.2)) == 0.0);
}

TEST_CASE("KRR residual identities") {
  const auto m = ManifoldSpec::torus(3);
  const auto data = dataset(m, 50, 10);
  const auto model = krr_fit(data, von_mises(m, 1.0), 0.1);
  const Eigen::MatrixXd gram = model.kernel->gram(data.points);
  const Eigen::VectorXd residual = (gram + 50 * 0.1 * Eigen::MatrixXd::Identity(50, 50)) * model.weights - data.labels;
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);
  const Eigen::VectorXd fitted = krr_predict_rows(model, data.points);
  CHECK((fitted - (data.labels - 50 * 0.1 * model.weights)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(model.weights.allFinite());
  CHECK(model.jitter == 0.0);
}

TEST_CASE("KRR jitter retry") {
  // The ridge leaves a tiny negative pivot that only the jitter repairs.
  Eigen::MatrixXd gram = Eigen::Vector2d(1.0, -2e-3 - 1e-14).asDiagonal();
  const auto solve = solve_krr(gram, Eigen::VectorXd::Ones(2), 1e-3);
  CHECK(solve.jitter == doctest::Approx(1e-10 * gram.trace() / 2).epsilon(1e-12));
  CHECK(solve.weights.allFinite());
  CHECK_THROWS_AS(solve_krr(-Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3), 1e-3), std::runtime_error);
  CHECK_THROWS_AS(solve_krr(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3), 0.0), std::invalid_argument);
}

TEST_CASE("group-averaged KRR predictions are invariant, plain KRR is not") {
  const auto m = ManifoldSpec::torus(3);
  const auto group = GroupSpec::sign_flips(3);
  const auto data = dataset(m, 80, 11);
  const auto tests = uniform_points(m, 50, 12);
  const auto inv = krr_fit(data, group_averaged(von_mises(m, 1.0), group), 0.01);
  const auto plain = krr_fit(data, von_mises(m, 1.0), 0.01);
  const auto sob = krr_fit(data, truncated_sobolev(build_basis_within(m, 60), 2.0), 0.01);
  double inv_worst = 0.0, plain_worst = 0.0, sob_worst = 0.0;
  for (const auto& g : closure(group)) {
    for (Eigen::Index i = 0; i < tests.rows(); ++i) {
      const Eigen::VectorXd x = tests.row(i).transpose();
      const auto gx = apply_group_element(m, g, x);
      inv_worst = std::max(inv_worst, std::abs(krr_predict(inv, gx) - krr_predict(inv, x)));
      plain_worst = std::max(plain_worst, std::abs(krr_predict(plain, gx) - krr_predict(plain, x)));
      sob_worst = std::max(sob_worst, std::abs(krr_predict(sob, gx) - krr_predict(sob, x)));
    }
  }
  CHECK(inv_worst <= 1e-10);
  CHECK(plain_worst >= 1e-6);
  CHECK(sob_worst >= 1e-6);
}

TEST_CASE("KRR errors") {
  const auto m = ManifoldSpec::torus(2);
  const auto data = dataset(m, 100, 13);
  KrrOptions tiny;
  tiny.gram_memory_budget_bytes = 1000;
  CHECK_THROWS_AS(krr_fit(data, von_mises(m, 1.0), 0.1, tiny), ResourceExhausted);
  CHECK_THROWS_AS(krr_fit(data, von_mises(m, 1.0), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(von_mises(m, 0.0), std::invalid_argument);
}
