#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "specavg/harness.hpp"
#include "specavg/io.hpp"

using namespace specavg;

namespace {

Eigen::VectorXd parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) {
      throw std::invalid_argument("bad coordinate '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty point");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

const MethodConfig& pick_method(const ExperimentConfig& config, std::size_t index) {
  if (index >= config.methods.size()) throw std::invalid_argument("method index out of range");
  return config.methods[index];
}

Json fit_model(const ExperimentConfig& config, std::size_t method_index, std::size_t hyper_index, std::size_t n,
               std::uint64_t seed) {
  const auto& method = pick_method(config, method_index);
  if (hyper_index >= method.hyperparameter_count()) throw std::invalid_argument("hyperparameter index out of range");
  const auto data = generate_dataset(config, n, seed);
  if (method.kind == MethodConfig::Kind::SpecAvg) {
    std::optional<std::size_t> cutoff;
    if (!method.cutoffs.empty()) cutoff = method.cutoffs[hyper_index];
    return to_json(fit(data, config.manifold, config.group, method.alpha, cutoff));
  }
  const auto& kc = method.kernel;
  KernelSpec spec = kc.kind == KernelConfig::Kind::VonMises
                        ? von_mises(config.manifold, kc.bandwidth)
                        : truncated_sobolev(build_basis_within(config.manifold, kc.basis_dim), kc.alpha);
  if (kc.group_averaged) spec = group_averaged(std::move(spec), config.group);
  return to_json(krr_fit(data, spec, method.ridges[hyper_index]));
}

// Spectral and kernel model documents are told apart by their keys.
std::function<double(const Eigen::VectorXd&)> load_predictor(const Json& doc, ManifoldSpec& manifold) {
  if (doc.contains("weights")) {
    auto model = std::make_shared<KrrModel>(krr_model_from_json(doc));
    manifold = model->kernel->manifold();
    return [model](const Eigen::VectorXd& x) { return krr_predict(*model, x); };
  }
  auto model = std::make_shared<SpectralModel>(model_from_json(doc));
  manifold = model->basis.manifold();
  return [model](const Eigen::VectorXd& x) { return predict(*model, x); };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral averaging for exactly invariant regression on the torus and circle"};
  app.require_subcommand(1);

  std::string config_path, out_path, model_path, point;
  std::size_t method_index = 0, hyper_index = 0, n_override = 0, threads = 0;
  std::uint64_t seed_override = 0;
  bool no_timing = false;

  auto* fit_cmd = app.add_subcommand("fit", "fit one model from a config and write it as JSON");
  fit_cmd->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", out_path, "model JSON to write")->required();
  fit_cmd->add_option("--method", method_index, "method position in the config (default 0)");
  fit_cmd->add_option("--hyper", hyper_index, "cutoff or ridge position (default 0)");
  fit_cmd->add_option("--n", n_override, "training size (default: first n_train)");
  fit_cmd->add_option("--seed", seed_override, "seed (default: first seed)");

  auto* predict_cmd = app.add_subcommand("predict", "evaluate a saved model at one point");
  predict_cmd->add_option("--model", model_path, "model JSON")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--point", point, "comma separated coordinates")->required();

  auto* disc_cmd = app.add_subcommand("discrepancy", "invariance discrepancy of a saved model on the config's test set");
  disc_cmd->add_option("--model", model_path, "model JSON")->required()->check(CLI::ExistingFile);
  disc_cmd->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  disc_cmd->add_option("--seed", seed_override, "seed for the test points (default: first seed)");

  auto* exp_cmd = app.add_subcommand("experiment", "run a config and write the metrics CSV");
  exp_cmd->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--out", out_path, "CSV path (default: the config's output)");
  exp_cmd->add_option("--threads", threads, "worker threads (0: all cores)");
  exp_cmd->add_flag("--no-timing", no_timing, "write wall_time_ms as 0 for byte-identical reruns");

  auto* verify_cmd = app.add_subcommand("verify", "run the oracle and property checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      const auto config = load_config(config_path);
      const std::size_t n = n_override ? n_override : config.n_train.front();
      const std::uint64_t seed = fit_cmd->count("--seed") ? seed_override : config.seeds.front();
      save_json(out_path, fit_model(config, method_index, hyper_index, n, seed));
    } else if (*predict_cmd) {
      ManifoldSpec manifold;
      const auto predictor = load_predictor(load_json(model_path), manifold);
      std::printf("%.17g\n", predictor(parse_point(point)));
    } else if (*disc_cmd) {
      const auto config = load_config(config_path);
      ManifoldSpec manifold;
      const auto predictor = load_predictor(load_json(model_path), manifold);
      if (!(manifold == config.manifold)) throw std::invalid_argument("model and config use different manifolds");
      const std::uint64_t seed = disc_cmd->count("--seed") ? seed_override : config.seeds.front();
      DiscrepancyOptions options;
      options.seed = seed;
      const auto id = invariance_discrepancy(predictor, manifold, test_points(config, seed), config.group, options);
      std::printf("%.17g %s\n", id.value, id.sampled ? "sampled" : "exact");
    } else if (*exp_cmd) {
      const auto config = load_config(config_path);
      RunOptions options;
      options.threads = threads;
      options.record_timing = !no_timing;
      const auto rows = run_experiment(config, out_path, options);
      std::size_t errors = 0;
      for (const auto& r : rows) errors += !r.error.empty();
      std::fprintf(stderr, "%zu rows written, %zu with errors\n", rows.size(), errors);
    } else if (*verify_cmd) {
      return oracle::run_verification(std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
