#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <string>

#include "specavg/harness.hpp"
#include "specavg/invariant_projection.hpp"
#include "specavg/kernels.hpp"
#include "specavg/spec_avg.hpp"

namespace specavg::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

double factor(const ManifoldSpec& manifold, int l, Trig t, double x) {
  if (l == 0) return 1.0;
  const double arg = manifold.kind == ManifoldKind::Circle ? l * x : kPi * l * x;
  return std::numbers::sqrt2 * (t == Trig::Cos ? std::cos(arg) : std::sin(arg));
}

}  // namespace

double phi(const ManifoldSpec& manifold, const EigenIndex& index, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double v = 1.0;
  for (std::size_t i = 0; i < index.frequencies.size(); ++i) {
    v *= factor(manifold, index.frequencies[i], index.pattern[i], x[static_cast<Eigen::Index>(i)]);
  }
  return v;
}

Eigen::MatrixXd periodic_grid(const ManifoldSpec& manifold, int per_axis) {
  const int d = manifold.dimension;
  Eigen::Index total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;
  Eigen::MatrixXd grid(total, d);
  const double lo = manifold.chart_min();
  const double step = manifold.period() / per_axis;
  for (Eigen::Index r = 0; r < total; ++r) {
    Eigen::Index rest = r;
    for (int i = 0; i < d; ++i) {
      grid(r, i) = lo + step * static_cast<double>(rest % per_axis);
      rest /= per_axis;
    }
  }
  return grid;
}

int exact_grid_size(const TruncatedBasis& basis) { return 4 * std::max(basis.max_frequency(), 1) + 1; }

Eigen::MatrixXd quadrature_gram(const TruncatedBasis& basis) {
  const auto& m = basis.manifold();
  const Eigen::MatrixXd grid = periodic_grid(m, exact_grid_size(basis));
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd values(grid.rows(), n);
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index j = 0; j < n; ++j) values(r, j) = phi(m, basis.indices()[j], grid.row(r).transpose());
  }
  return values.transpose() * values / static_cast<double>(grid.rows());
}

Eigen::MatrixXd quadrature_block(const GroupElement& g, const TruncatedBasis& basis, std::size_t eigenspace) {
  const auto& m = basis.manifold();
  const auto& e = basis.eigenspaces()[eigenspace];
  const Eigen::MatrixXd grid = periodic_grid(m, exact_grid_size(basis));
  const auto size = static_cast<Eigen::Index>(e.size);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index p = 0; p < grid.rows(); ++p) {
    const Eigen::VectorXd x = grid.row(p).transpose();
    const Eigen::VectorXd gx = apply_group_element(m, g, x);
    for (Eigen::Index r = 0; r < size; ++r) {
      const double base = phi(m, basis.indices()[e.offset + r], x);
      for (Eigen::Index c = 0; c < size; ++c) block(r, c) += phi(m, basis.indices()[e.offset + c], gx) * base;
    }
  }
  return block / static_cast<double>(grid.rows());
}

double fd_laplacian(const ManifoldSpec& manifold, const EigenIndex& index, const Eigen::Ref<const Eigen::VectorXd>& x,
                    double h) {
  const double centre = phi(manifold, index, x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x, down = x;
    up[i] += h;
    down[i] -= h;
    sum += (phi(manifold, index, up) - 2.0 * centre + phi(manifold, index, down)) / (h * h);
  }
  return sum;
}

double square_cosine_closed_form(int frequency) {
  if (frequency == 0) return 1.0 / 3.0;
  const double l = frequency;
  return 2.0 * std::numbers::sqrt2 * (frequency % 2 == 0 ? 1.0 : -1.0) / (kPi * kPi * l * l);
}

long double sobolev_norm_sq_extended(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& f,
                                     double alpha) {
  long double sum = 0.0L;
  std::size_t cumulative = 0;
  for (const auto& e : basis.eigenspaces()) {
    cumulative += e.size;
    const long double weight = std::pow(static_cast<long double>(cumulative), static_cast<long double>(alpha));
    for (std::size_t j = e.offset; j < e.offset + e.size; ++j) {
      const long double v = f[static_cast<Eigen::Index>(j)];
      sum += weight * v * v;
    }
  }
  return sum;
}

std::size_t orbit_size(const ManifoldSpec& manifold, const std::vector<GroupElement>& generators,
                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  auto key = [](const Eigen::VectorXd& p) {
    std::vector<long long> k;
    for (double v : p) k.push_back(std::llround(v * 1e9));
    return k;
  };
  std::set<std::vector<long long>> seen{key(x)};
  std::vector<Eigen::VectorXd> frontier{x};
  while (!frontier.empty()) {
    std::vector<Eigen::VectorXd> next;
    for (const auto& p : frontier) {
      for (const auto& g : generators) {
        Eigen::VectorXd q = apply_group_element(manifold, g, p);
        if (seen.insert(key(q)).second) next.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
  }
  return seen.size();
}

namespace {

struct Reporter {
  std::ostream& out;
  bool all = true;

  void check(const std::string& name, bool ok, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", value);
    out << (ok ? "ok    " : "FAIL  ") << name << "  (" << buf << ")\n";
    all = all && ok;
  }
};

struct Case {
  const char* name;
  ManifoldSpec manifold;
  GroupSpec group;
  std::size_t basis_dim;
};

std::vector<Case> desk_cases() {
  return {
      {"circle/Z8", ManifoldSpec::circle(), GroupSpec::cyclic_rotation(8), 17},
      {"torus1/signs", ManifoldSpec::torus(1), GroupSpec::sign_flips(1), 9},
      {"torus2/signs", ManifoldSpec::torus(2), GroupSpec::sign_flips(2), 40},
      {"torus3/signs", ManifoldSpec::torus(3), GroupSpec::sign_flips(3), 60},
      {"torus3/perms", ManifoldSpec::torus(3), GroupSpec::coordinate_permutations(3), 60},
      {"torus4/perms", ManifoldSpec::torus(4), GroupSpec::coordinate_permutations(4), 120},
  };
}

}  // namespace

bool run_verification(std::ostream& out) {
  Reporter rep{out};
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;

  for (const auto& c : desk_cases()) {
    const auto basis = build_basis_within(c.manifold, c.basis_dim);
    const std::string tag = std::string(c.name) + " ";

    if (basis.size() <= 64) {
      const Eigen::MatrixXd gram = quadrature_gram(basis);
      const double dev = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
      rep.check(tag + "orthonormality", dev <= 1e-10, dev);
    }

    const auto elements = closure(c.group);
    double block_dev = 0.0;
    std::size_t sampled = 0;
    for (const auto& g : elements) {
      for (std::size_t e = 0; e < basis.eigenspaces().size(); ++e) {
        if (basis.eigenspaces()[e].size > 16) continue;
        const auto analytic = representation_block(c.group, g, basis, e).matrix;
        block_dev = std::max(block_dev, (analytic - quadrature_block(g, basis, e)).cwiseAbs().maxCoeff());
      }
      if (++sampled == 12) break;
    }
    rep.check(tag + "analytic blocks vs quadrature", block_dev <= 1e-8, block_dev);

    const auto report = verify_representation(c.group, basis);
    rep.check(tag + "representation laws",
              report.ok() && report.max_law_deviation <= 1e-10 && report.max_orthogonality_deviation <= 1e-10,
              std::max(report.max_law_deviation, report.max_orthogonality_deviation));

    Eigen::VectorXd probe(c.manifold.dimension);
    for (int i = 0; i < c.manifold.dimension; ++i) probe[i] = 0.1 + 0.17 * i;
    const auto orbit = orbit_size(c.manifold, c.group.generators, probe);
    rep.check(tag + "closure size", elements.size() == c.group.declared_order && orbit == elements.size(),
              static_cast<double>(elements.size()));

    double proj_dev = 0.0;
    for (std::size_t e = 0; e < basis.eigenspaces().size(); ++e) {
      const auto& es = basis.eigenspaces()[e];
      std::vector<RepresentationBlock> blocks;
      for (const auto& g : c.group.generators) blocks.push_back(representation_block(c.group, g, basis, e));
      const auto stack = build_constraints(blocks);
      const Eigen::MatrixXd avg = averaging_projector(c.group, basis, e);
      for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd f(static_cast<Eigen::Index>(es.size));
        for (auto& v : f) v = normal(rng);
        proj_dev = std::max(proj_dev, (project(f, stack).projected - avg * f).cwiseAbs().maxCoeff());
      }
    }
    rep.check(tag + "projection vs group average", proj_dev <= 1e-8, proj_dev);
  }

  {
    const auto m = ManifoldSpec::torus(2);
    const auto basis = build_basis_within(m, 30);
    double worst = 0.0;
    Eigen::VectorXd x(2);
    x << 0.123, -0.377;
    for (const auto& index : basis.indices()) {
      const double lhs = fd_laplacian(m, index, x, 1e-4);
      const double rhs = -eigenvalue_of(index) * phi(m, index, x);
      if (std::abs(rhs) > 1e-3) worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    rep.check("torus2 eigenfunction property", worst <= 1e-3, worst);
  }

  {
    double worst = 0.0;
    for (int l = 0; l <= 40; ++l) {
      worst = std::max(worst, std::abs(square_cosine_coefficient(l) - square_cosine_closed_form(l)));
    }
    rep.check("x^2 cosine coefficients", worst <= 1e-10, worst);
  }

  {
    ExperimentConfig cfg;
    cfg.manifold = ManifoldSpec::torus(4);
    cfg.group = GroupSpec::sign_flips(4);
    cfg.noise_std = 0.1;
    const auto data = generate_dataset(cfg, 200, 1);
    const auto model = fit(data, cfg.manifold, cfg.group, std::nullopt, 80);
    const Eigen::MatrixXd pts = test_points(cfg, 1);
    const auto id = invariance_discrepancy([&](const Eigen::VectorXd& x) { return predict(model, x); }, cfg.manifold,
                                           pts, cfg.group);
    rep.check("spec-avg exact invariance", id.value <= 1e-9 && !id.sampled, id.value);

    const auto inv = krr_fit(data, group_averaged(von_mises(cfg.manifold, 1.0), cfg.group), 0.01);
    const auto id_krr = invariance_discrepancy([&](const Eigen::VectorXd& x) { return krr_predict(inv, x); },
                                               cfg.manifold, pts, cfg.group);
    rep.check("group-averaged KRR invariance", id_krr.value <= 1e-10, id_krr.value);
  }

  out << (rep.all ? "all checks passed\n" : "some checks FAILED\n");
  return rep.all;
}

}  // namespace specavg::oracle
