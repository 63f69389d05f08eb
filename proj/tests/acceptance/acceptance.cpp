// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "specavg/harness.hpp"
#include "specavg/invariant_projection.hpp"
#include "specavg/io.hpp"
#include "specavg/kernels.hpp"

using namespace specavg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ExperimentConfig invariance_setup() {
  ExperimentConfig c;
  c.manifold = ManifoldSpec::torus(4);
  c.group = GroupSpec::sign_flips(4);
  c.n_test = 100;
  c.noise_std = 0.1;
  return c;
}

Outcome exact_invariance() {
  const auto c = invariance_setup();
  double worst = 0.0;
  std::size_t elements = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto data = generate_dataset(c, 200, seed);
    const auto pts = test_points(c, seed);
    for (std::size_t cutoff : {9, 33, 89, 200}) {
      const auto model = fit(data, c.manifold, c.group, std::nullopt, cutoff);
      const auto id = invariance_discrepancy([&](const Eigen::VectorXd& x) { return predict(model, x); }, c.manifold,
                                             pts, c.group);
      if (id.sampled) return {false, "closure was sampled"};
      worst = std::max(worst, id.value);
      elements = id.elements;
    }
  }
  return {worst <= 1e-9 && elements == 16,
          "max ID " + fmt("%.3e", worst) + " over 100 points x " + std::to_string(elements) + " elements"};
}

Outcome krr_non_invariance() {
  const auto c = invariance_setup();
  double least = INFINITY;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto data = generate_dataset(c, 200, seed);
    const auto model = krr_fit(data, von_mises(c.manifold, 1.0), 0.01);
    const auto id = invariance_discrepancy([&](const Eigen::VectorXd& x) { return krr_predict(model, x); }, c.manifold,
                                           test_points(c, seed), c.group);
    least = std::min(least, id.value);
  }
  return {least >= 1e-6, "min ID over seeds " + fmt("%.3e", least)};
}

Outcome projector_equivalence() {
  struct Case {
    ManifoldSpec m;
    GroupSpec g;
    std::size_t dim;
  };
  const std::vector<Case> cases{
      {ManifoldSpec::circle(), GroupSpec::cyclic_rotation(8), 17},
      {ManifoldSpec::torus(1), GroupSpec::sign_flips(1), 17},
      {ManifoldSpec::torus(2), GroupSpec::sign_flips(2), 61},
      {ManifoldSpec::torus(3), GroupSpec::sign_flips(3), 123},
      {ManifoldSpec::torus(4), GroupSpec::coordinate_permutations(4), 209},
  };
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  std::size_t spaces = 0;
  for (const auto& c : cases) {
    const auto basis = build_basis_within(c.m, c.dim);
    for (std::size_t e = 0; e < basis.eigenspaces().size(); ++e) {
      std::vector<RepresentationBlock> blocks;
      for (const auto& g : c.g.generators) blocks.push_back(representation_block(c.g, g, basis, e));
      const auto stack = build_constraints(blocks);
      const Eigen::MatrixXd avg = averaging_projector(c.g, basis, e);
      for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd f(static_cast<Eigen::Index>(basis.eigenspaces()[e].size));
        for (auto& v : f) v = normal(rng);
        worst = std::max(worst, (project(f, stack).projected - avg * f).cwiseAbs().maxCoeff());
      }
      ++spaces;
    }
  }
  return {worst <= 1e-8, "max deviation " + fmt("%.3e", worst) + " over " + std::to_string(spaces) + " eigenspaces"};
}

Outcome representation_laws() {
  struct Case {
    ManifoldSpec m;
    GroupSpec g;
    std::size_t dim;
  };
  const std::vector<Case> cases{
      {ManifoldSpec::circle(), GroupSpec::cyclic_rotation(8), 17},
      {ManifoldSpec::torus(3), GroupSpec::sign_flips(3), 123},
      {ManifoldSpec::torus(4), GroupSpec::sign_flips(4), 209},
      {ManifoldSpec::torus(3), GroupSpec::coordinate_permutations(3), 123},
      {ManifoldSpec::torus(4), GroupSpec::coordinate_permutations(4), 209},
  };
  double law = 0.0, orth = 0.0;
  std::size_t pairs = 0;
  bool ok = true;
  for (const auto& c : cases) {
    const auto r = verify_representation(c.g, build_basis_within(c.m, c.dim));
    ok = ok && r.ok() && !r.sampled;
    law = std::max(law, r.max_law_deviation);
    orth = std::max(orth, r.max_orthogonality_deviation);
    pairs += r.pairs_checked;
  }
  return {ok && law <= 1e-10 && orth <= 1e-10, "law " + fmt("%.3e", law) + ", orthogonality " + fmt("%.3e", orth) +
                                                   " over " + std::to_string(pairs) + " pairs"};
}

Outcome generator_machinery() {
  const std::vector<GroupElement> gens{Permutation{{1, 0, 2, 3}}, Permutation{{1, 2, 3, 0}}};
  const auto size = closure(gens).size();
  bool bound = true;
  for (int d = 1; d <= 10; ++d) {
    const auto g = GroupSpec::sign_flips(d);
    const auto order = closure(g).size();
    bound = bound && order == (std::size_t{1} << d) && g.generators.size() == static_cast<std::size_t>(d) &&
            (std::size_t{1} << g.generators.size()) <= order;
  }
  return {size == 24 && bound, "closure size " + std::to_string(size) + ", sign groups d=1..10 meet |S| = log2|G|"};
}

Outcome sobolev_tail() {
  const auto basis = build_basis(ManifoldSpec::torus(3), 100);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::size_t checks = 0;
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(basis.size()));
    for (auto& v : f) v = normal(rng);
    const double norm = sobolev_norm_sq(basis, f, 2.0);
    for (std::size_t cut : basis.cumulative_dims()) {
      const double d = static_cast<double>(cut);
      if (!(tail_energy(basis, f, cut) <= norm / (d * d))) return {false, "violated at D=" + std::to_string(cut)};
      ++checks;
    }
  }
  return {true, std::to_string(checks) + " boundaries on a " + std::to_string(basis.size()) + "-dim basis"};
}

std::map<std::size_t, double> averages(const std::vector<MetricsRow>& rows, const std::string& method,
                                       std::optional<double> hyper = std::nullopt) {
  std::map<std::size_t, double> out;
  for (const auto& r : rows) {
    if (r.seed || r.method != method || !r.error.empty() || !r.excess_risk_exact) continue;
    if (hyper && r.hyperparam != *hyper) continue;
    out[r.n] = *r.excess_risk_exact;
  }
  return out;
}

Outcome risk_decay(const fs::path& configs, const fs::path& out_dir) {
  auto decay = load_config((configs / "risk_decay.json").string());
  auto parity = load_config((configs / "baseline_parity.json").string());
  RunOptions o;
  o.record_timing = false;
  const auto decay_rows = run_experiment(decay, (out_dir / decay.output).string(), o);
  const auto parity_rows = run_experiment(parity, (out_dir / parity.output).string(), o);

  const auto risk = averages(decay_rows, decay.methods[0].name());
  if (risk.size() != decay.n_train.size() || !risk.count(64) || !risk.count(4096)) return {false, "missing averaged rows"};
  const double ratio = risk.at(4096) / risk.at(64);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, r] : risk) {
    const double x = std::log(static_cast<double>(n)), y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(risk.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);

  double best_spec = INFINITY, best_krr = INFINITY;
  for (const auto& r : parity_rows) {
    if (r.seed || !r.error.empty() || r.n != 1024) continue;
    if (r.method == "spec_avg") best_spec = std::min(best_spec, r.excess_risk_empirical);
    if (r.method == "krr_group_averaged") best_krr = std::min(best_krr, r.excess_risk_empirical);
  }
  const double factor = best_spec / best_krr;
  const bool a = ratio <= 0.25, b = slope >= -1.2 && slope <= -0.15, c = std::max(factor, 1.0 / factor) <= 3.0;
  return {a && b && c, "(a) ratio " + fmt("%.4f", ratio) + (a ? "" : " FAIL") + ", (b) slope " + fmt("%.3f", slope) +
                           (b ? "" : " FAIL") + ", (c) spec-avg/krr at n=1024 " + fmt("%.3f", factor) +
                           (c ? "" : " FAIL")};
}

Outcome paper_replication(const fs::path& configs, const fs::path& out_dir) {
  auto cfg = load_config((configs / "paper_d10.json").string());
  const auto path = out_dir / cfg.output;
  const auto rows = run_experiment(cfg, path.string());
  std::size_t expected = 0;
  for (const auto& m : cfg.methods) expected += m.hyperparameter_count() * cfg.n_train.size();
  std::size_t errors = 0, avg = 0;
  bool saw_176 = false, saw_50 = false;
  for (const auto& r : rows) {
    errors += !r.error.empty();
    if (r.seed) continue;
    ++avg;
    saw_176 = saw_176 || (r.method == "spec_avg" && r.hyperparam == 176.0);
    saw_50 = saw_50 || (r.method == "krr" && r.hyperparam == 50.0);
  }
  const bool complete = rows.size() == expected * (cfg.seeds.size() + 1) && avg == expected;
  return {complete && errors == 0 && saw_176 && saw_50 && fs::exists(path),
          std::to_string(rows.size()) + " rows, " + std::to_string(errors) + " errors, D=176 " +
              (saw_176 ? "present" : "missing") + ", ridge 50 " + (saw_50 ? "present" : "missing")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string configs = "configs";
  std::string out_dir = ".";
  app.add_option("--configs", configs, "directory with the shipped configs");
  app.add_option("--out-dir", out_dir, "where experiment CSVs are written");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"exact invariance of spec-avg (d=4 sign flips)", 5, exact_invariance},
      {"plain KRR is not invariant (d=4 sign flips)", 5, krr_non_invariance},
      {"closed-form projection equals group averaging", 10, projector_equivalence},
      {"representation laws for the built-in groups", 10, representation_laws},
      {"generator closure and log2 bound", 1, generator_machinery},
      {"Sobolev tail inequality", 1, sobolev_tail},
      {"risk decay and baseline parity (d=2)", 120, [&] { return risk_decay(configs, out_dir); }},
      {"d=10 replication config runs end to end", 600, [&] { return paper_replication(configs, out_dir); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s  %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
