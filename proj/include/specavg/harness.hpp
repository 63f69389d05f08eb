#pragma once

// Synthetic regression problems, evaluation metrics and the experiment
// runner that writes one CSV row per (method, hyperparameter, n, seed).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specavg/spec_avg.hpp"
#include "specavg/spectra.hpp"
#include "specavg/symmetry.hpp"

namespace specavg {

// ---------------------------------------------------------------- targets

struct SpectralTerm {
  EigenIndex index;
  double value = 0.0;
};

enum class TargetKind {
  /// f(x) = (1/d) sum_i i x_i^2 on the torus (coordinates 1-based).
  WeightedSquares,
  /// f = sum of the listed eigenfunction terms.
  SyntheticSpectral,
};

struct TargetSpec {
  TargetKind kind = TargetKind::WeightedSquares;
  std::vector<SpectralTerm> terms;
};

double target_value(const TargetSpec& target, const ManifoldSpec& manifold,
                    const Eigen::Ref<const Eigen::VectorXd>& x);

/// E[f^2] under the uniform measure.
double target_norm_sq(const TargetSpec& target, const ManifoldSpec& manifold);

/// Coefficients of the target on every function of `basis`.
Eigen::VectorXd target_coefficients(const TargetSpec& target, const TruncatedBasis& basis);

/// E[x^2 sqrt(2) cos(pi l x)] for x uniform on [-1, 1), by adaptive
/// Gauss-Kronrod quadrature (absolute error well below 1e-10).
double square_cosine_coefficient(int frequency);

// ---------------------------------------------------------------- data

struct ExperimentConfig;

/// Training set: x uniform on the chart, y = f(x) + N(0, sigma^2).
/// Samples are drawn point by point, so a smaller n gives a prefix.
LabeledDataset generate_dataset(const ExperimentConfig& config, std::size_t n, std::uint64_t seed);

/// Uniform points on the chart from their own random stream.
Eigen::MatrixXd sample_points(const ManifoldSpec& manifold, std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// The n_test evaluation points used for a seed.
Eigen::MatrixXd test_points(const ExperimentConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------- metrics

/// Maps rows of points to one prediction column per model.
using BatchPredictor = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct DiscrepancyOptions {
  std::size_t closure_cap = kDefaultClosureCap;
  /// Random words used when the closure is too large.
  std::size_t max_group_sample = 256;
  std::size_t word_length = 16;
  std::uint64_t seed = 0;
};

struct Discrepancy {
  double value = 0.0;
  /// True when the supremum ran over sampled elements (a lower bound).
  bool sampled = false;
  std::size_t elements = 0;
};

/// Elements the supremum runs over: the whole closure when it fits the cap,
/// otherwise the generators plus random words.
std::vector<GroupElement> discrepancy_elements(const GroupSpec& group, const DiscrepancyOptions& options,
                                               bool& sampled);

/// sup over test points and group elements of |f(x) - f(g x)|, per column.
std::vector<Discrepancy> invariance_discrepancy(const BatchPredictor& predictor, const ManifoldSpec& manifold,
                                                const Eigen::Ref<const Eigen::MatrixXd>& test_points,
                                                const GroupSpec& group, const DiscrepancyOptions& options = {});

Discrepancy invariance_discrepancy(const std::function<double(const Eigen::VectorXd&)>& predictor,
                                   const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::MatrixXd>& test_points,
                                   const GroupSpec& group, const DiscrepancyOptions& options = {});

/// mean over rows of (prediction - f(x))^2.
double empirical_excess_risk(const Eigen::Ref<const Eigen::VectorXd>& predictions, const TargetSpec& target,
                             const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::MatrixXd>& points);

/// ||f_hat - f||^2_{L2} by Parseval.
double exact_excess_risk(const SpectralModel& model, const TargetSpec& target);
double exact_excess_risk(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& coefficients,
                         const TargetSpec& target);

struct RiskEstimates {
  double empirical = 0.0;
  std::optional<double> exact;
};
RiskEstimates excess_risk(const SpectralModel& model, const ExperimentConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------- experiments

struct KernelConfig {
  enum class Kind { VonMises, Sobolev } kind = Kind::VonMises;
  double bandwidth = 1.0;
  /// Sobolev only: basis size cap and exponent.
  std::size_t basis_dim = 64;
  double alpha = 2.0;
  bool group_averaged = false;
};

struct MethodConfig {
  enum class Kind { SpecAvg, Krr } kind = Kind::SpecAvg;
  std::string label;
  /// Spec-Avg with explicit cutoffs D.
  std::vector<std::size_t> cutoffs;
  /// Spec-Avg with the cutoff schedule n^(1/(1+alpha)) (used when cutoffs is empty).
  std::optional<double> alpha;
  KernelConfig kernel;
  std::vector<double> ridges;

  /// Label used in the CSV method column.
  std::string name() const;
  std::size_t hyperparameter_count() const;
};

struct ExperimentConfig {
  ManifoldSpec manifold;
  GroupSpec group;
  TargetSpec target;
  std::vector<MethodConfig> methods;
  std::vector<std::size_t> n_train;
  std::size_t n_test = 100;
  double noise_std = 0.1;
  std::vector<std::uint64_t> seeds;
  std::string output;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct RunOptions {
  std::size_t threads = 0;  // 0: hardware concurrency
  /// Write wall_time_ms as 0 so identical configs give identical bytes.
  bool record_timing = true;
  DiscrepancyOptions discrepancy;
};

struct MetricsRow {
  std::string method;
  double hyperparam = 0.0;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;  // empty for seed-averaged rows
  double invariance_discrepancy = 0.0;
  bool id_sampled = false;
  double excess_risk_empirical = 0.0;
  std::optional<double> excess_risk_exact;
  double wall_time_ms = 0.0;
  double oracle_calls = 0.0;
  std::string error;
};

inline constexpr const char* kCsvHeader =
    "method,hyperparam,n,seed,invariance_discrepancy,id_sampled,excess_risk_empirical,excess_risk_exact,"
    "wall_time_ms,oracle_calls,error";

/// Seed rows in config order (method, hyperparameter, n, seed), then one
/// averaged row per (method, hyperparameter, n).
std::vector<MetricsRow> run_experiment_rows(const ExperimentConfig& config, const RunOptions& options = {});

/// Seed-averaged rows over the successful seed rows.
std::vector<MetricsRow> average_rows(const std::vector<MetricsRow>& seed_rows);

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::string format_row(const MetricsRow& row);

/// Runs the experiment and writes the CSV to `path` (config.output when empty).
std::vector<MetricsRow> run_experiment(const ExperimentConfig& config, const std::string& path = {},
                                       const RunOptions& options = {});

}  // namespace specavg
