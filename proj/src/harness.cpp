#include "specavg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "specavg/errors.hpp"
#include "specavg/kernels.hpp"

namespace specavg {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;
constexpr std::uint64_t kGroupStream = 3;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double eval_index(const ManifoldSpec& manifold, const EigenIndex& index, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double scale = manifold.kind == ManifoldKind::Circle ? 1.0 : std::numbers::pi;
  double value = 1.0;
  for (std::size_t i = 0; i < index.frequencies.size(); ++i) {
    const int l = index.frequencies[i];
    if (l == 0) continue;
    const double t = scale * l * x[static_cast<Eigen::Index>(i)];
    value *= std::numbers::sqrt2 * (index.pattern[i] == Trig::Cos ? std::cos(t) : std::sin(t));
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------- targets

double square_cosine_coefficient(int frequency) {
  if (frequency < 0) throw std::invalid_argument("frequency must be nonnegative");
  if (frequency == 0) return 1.0 / 3.0;
  using boost::math::quadrature::gauss_kronrod;
  const double l = frequency;
  auto integrand = [l](double x) { return 0.5 * x * x * std::numbers::sqrt2 * std::cos(std::numbers::pi * l * x); };
  // One panel per half period keeps every panel smooth and non-oscillatory.
  const int panels = 2 * frequency;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = -1.0 + 2.0 * k / panels;
    const double b = -1.0 + 2.0 * (k + 1) / panels;
    sum += gauss_kronrod<double, 31>::integrate(integrand, a, b, 10, 1e-15);
  }
  return sum;
}

double target_value(const TargetSpec& target, const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::VectorXd>& x) {
  switch (target.kind) {
    case TargetKind::WeightedSquares: {
      const auto d = x.size();
      double sum = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) sum += static_cast<double>(i + 1) * x[i] * x[i];
      return sum / static_cast<double>(d);
    }
    case TargetKind::SyntheticSpectral: {
      double sum = 0.0;
      for (const auto& term : target.terms) sum += term.value * eval_index(manifold, term.index, x);
      return sum;
    }
  }
  return 0.0;
}

double target_norm_sq(const TargetSpec& target, const ManifoldSpec& manifold) {
  switch (target.kind) {
    case TargetKind::WeightedSquares: {
      // E[x^2] = 1/3 and Var[x^2] = 1/5 - 1/9 = 4/45 for x uniform on [-1, 1).
      const int d = manifold.dimension;
      double mean = 0.0;
      double var = 0.0;
      for (int i = 1; i <= d; ++i) {
        const double w = static_cast<double>(i) / d;
        mean += w / 3.0;
        var += w * w * 4.0 / 45.0;
      }
      return mean * mean + var;
    }
    case TargetKind::SyntheticSpectral: {
      double sum = 0.0;
      for (const auto& term : target.terms) sum += term.value * term.value;
      return sum;
    }
  }
  return 0.0;
}

Eigen::VectorXd target_coefficients(const TargetSpec& target, const TruncatedBasis& basis) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  switch (target.kind) {
    case TargetKind::WeightedSquares: {
      const int d = basis.manifold().dimension;
      std::map<int, double> cache;
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const auto& index = basis.indices()[j];
        int active = -1;
        int count = 0;
        for (int i = 0; i < d; ++i) {
          if (index.frequencies[i] != 0) {
            active = i;
            ++count;
          }
        }
        if (count == 0) {
          out[static_cast<Eigen::Index>(j)] = (d + 1) / 6.0;
        } else if (count == 1 && index.pattern[active] == Trig::Cos) {
          const int l = index.frequencies[active];
          auto it = cache.find(l);
          if (it == cache.end()) it = cache.emplace(l, square_cosine_coefficient(l)).first;
          out[static_cast<Eigen::Index>(j)] = static_cast<double>(active + 1) / d * it->second;
        }
      }
      break;
    }
    case TargetKind::SyntheticSpectral:
      for (const auto& term : target.terms) {
        if (const auto j = basis.find(term.index)) out[static_cast<Eigen::Index>(*j)] += term.value;
      }
      break;
  }
  return out;
}

// ---------------------------------------------------------------- data

Eigen::MatrixXd sample_points(const ManifoldSpec& manifold, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  auto rng = make_rng(seed, stream);
  const double lo = manifold.chart_min();
  std::uniform_real_distribution<double> uniform(lo, lo + manifold.period());
  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), manifold.dimension);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::VectorXd x(manifold.dimension);
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = uniform(rng);
    points.row(i) = canonicalize(manifold, std::move(x)).transpose();
  }
  return points;
}

LabeledDataset generate_dataset(const ExperimentConfig& config, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dataset needs at least one point");
  const auto& manifold = config.manifold;
  auto rng = make_rng(seed, kTrainStream);
  const double lo = manifold.chart_min();
  std::uniform_real_distribution<double> uniform(lo, lo + manifold.period());
  std::normal_distribution<double> noise(0.0, 1.0);
  LabeledDataset data;
  data.noise_std = config.noise_std;
  data.points.resize(static_cast<Eigen::Index>(n), manifold.dimension);
  data.labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
    Eigen::VectorXd x(manifold.dimension);
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = uniform(rng);
    x = canonicalize(manifold, std::move(x));
    const double eps = noise(rng);
    data.points.row(i) = x.transpose();
    data.labels[i] = target_value(config.target, manifold, x) + config.noise_std * eps;
  }
  return data;
}

Eigen::MatrixXd test_points(const ExperimentConfig& config, std::uint64_t seed) {
  return sample_points(config.manifold, config.n_test, seed, kTestStream);
}

// ---------------------------------------------------------------- metrics

std::vector<GroupElement> discrepancy_elements(const GroupSpec& group, const DiscrepancyOptions& options, bool& sampled) {
  sampled = false;
  try {
    return closure(group, options.closure_cap);
  } catch (const GroupTooLarge&) {
    sampled = true;
  }
  std::vector<GroupElement> elements = group.generators;
  auto rng = make_rng(options.seed, kGroupStream);
  for (std::size_t i = 0; i < options.max_group_sample; ++i) {
    elements.push_back(random_word(group, options.word_length, rng));
  }
  return elements;
}

std::vector<Discrepancy> invariance_discrepancy(const BatchPredictor& predictor, const ManifoldSpec& manifold,
                                                const Eigen::Ref<const Eigen::MatrixXd>& points, const GroupSpec& group,
                                                const DiscrepancyOptions& options) {
  if (points.rows() == 0) throw std::invalid_argument("discrepancy needs at least one test point");
  check_compatible(group, manifold);
  bool sampled = false;
  const auto elements = discrepancy_elements(group, options, sampled);
  const Eigen::MatrixXd base = predictor(points);
  Eigen::VectorXd worst = Eigen::VectorXd::Zero(base.cols());
  for (const auto& g : elements) {
    if (is_identity(g)) continue;
    const Eigen::MatrixXd moved = predictor(apply_group_element_rows(manifold, g, points));
    worst = worst.cwiseMax((moved - base).cwiseAbs().colwise().maxCoeff().transpose());
  }
  std::vector<Discrepancy> out;
  for (Eigen::Index k = 0; k < worst.size(); ++k) out.push_back({worst[k], sampled, elements.size()});
  return out;
}

Discrepancy invariance_discrepancy(const std::function<double(const Eigen::VectorXd&)>& predictor,
                                   const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   const GroupSpec& group, const DiscrepancyOptions& options) {
  BatchPredictor batch = [&](const Eigen::MatrixXd& rows) {
    Eigen::MatrixXd out(rows.rows(), 1);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i, 0) = predictor(rows.row(i).transpose());
    return out;
  };
  return invariance_discrepancy(batch, manifold, points, group, options).front();
}

double empirical_excess_risk(const Eigen::Ref<const Eigen::VectorXd>& predictions, const TargetSpec& target,
                             const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (predictions.size() != points.rows() || points.rows() == 0) throw DimensionMismatch("predictions and points differ");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double r = predictions[i] - target_value(target, manifold, points.row(i).transpose());
    sum += r * r;
  }
  return sum / static_cast<double>(points.rows());
}

double exact_excess_risk(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& coefficients,
                         const TargetSpec& target) {
  if (coefficients.size() != static_cast<Eigen::Index>(basis.size())) throw DimensionMismatch("coefficients do not match basis");
  const Eigen::VectorXd captured = target_coefficients(target, basis);
  const double inside = (coefficients - captured).squaredNorm();
  double outside = 0.0;
  if (target.kind == TargetKind::SyntheticSpectral) {
    for (const auto& term : target.terms) {
      if (!basis.find(term.index)) outside += term.value * term.value;
    }
  } else {
    outside = std::max(0.0, target_norm_sq(target, basis.manifold()) - captured.squaredNorm());
  }
  return inside + outside;
}

double exact_excess_risk(const SpectralModel& model, const TargetSpec& target) {
  return exact_excess_risk(model.basis, model.coefficients, target);
}

RiskEstimates excess_risk(const SpectralModel& model, const ExperimentConfig& config, std::uint64_t seed) {
  const Eigen::MatrixXd points = test_points(config, seed);
  return {empirical_excess_risk(predict_rows(model, points), config.target, config.manifold, points),
          exact_excess_risk(model, config.target)};
}

// ---------------------------------------------------------------- experiments

std::string MethodConfig::name() const {
  if (!label.empty()) return label;
  if (kind == Kind::SpecAvg) return cutoffs.empty() ? "spec_avg_schedule" : "spec_avg";
  return kernel.group_averaged ? "krr_group_averaged" : "krr";
}

std::size_t MethodConfig::hyperparameter_count() const {
  if (kind == Kind::Krr) return ridges.size();
  return cutoffs.empty() ? 1 : cutoffs.size();
}

void ExperimentConfig::validate() const {
  manifold.validate();
  check_compatible(group, manifold);
  if (methods.empty()) throw std::invalid_argument("config lists no methods");
  if (n_train.empty()) throw std::invalid_argument("config lists no training sizes");
  for (auto n : n_train) {
    if (n < 1) throw std::invalid_argument("training sizes must be positive");
  }
  if (n_test < 1) throw std::invalid_argument("n_test must be at least 1");
  if (seeds.empty()) throw std::invalid_argument("config lists no seeds");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be nonnegative");
  if (target.kind == TargetKind::WeightedSquares && manifold.kind != ManifoldKind::FlatTorus) {
    throw std::invalid_argument("the weighted-squares target is defined on the torus");
  }
  for (const auto& term : target.terms) {
    if (static_cast<int>(term.index.frequencies.size()) != manifold.dimension ||
        term.index.pattern.size() != term.index.frequencies.size()) {
      throw std::invalid_argument("target term does not match manifold dimension");
    }
  }
  for (const auto& m : methods) {
    if (m.kind == MethodConfig::Kind::SpecAvg) {
      if (m.cutoffs.empty() && !(m.alpha && *m.alpha > 1.0)) {
        throw std::invalid_argument("spec_avg needs cutoffs or alpha > 1");
      }
      for (auto c : m.cutoffs) {
        if (c < 1) throw std::invalid_argument("cutoffs must be positive");
      }
    } else {
      if (m.ridges.empty()) throw std::invalid_argument("krr needs at least one ridge value");
      for (double r : m.ridges) {
        if (!(r > 0.0)) throw std::invalid_argument("ridge values must be positive");
      }
      if (m.kernel.kind == KernelConfig::Kind::VonMises && !(m.kernel.bandwidth > 0.0)) {
        throw std::invalid_argument("von Mises bandwidth must be positive");
      }
    }
  }
}

namespace {

struct Cell {
  std::size_t method = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

std::vector<double> hyperparameters(const MethodConfig& method) {
  if (method.kind == MethodConfig::Kind::Krr) return method.ridges;
  if (method.cutoffs.empty()) return {*method.alpha};
  return {method.cutoffs.begin(), method.cutoffs.end()};
}

std::vector<MetricsRow> spec_avg_cell(const ExperimentConfig& config, const MethodConfig& method, const Cell& cell,
                                      const RunOptions& options) {
  const auto start = Clock::now();
  const auto data = generate_dataset(config, cell.n, cell.seed);
  const Eigen::MatrixXd test = test_points(config, cell.seed);
  const auto shared_setup = elapsed_ms(start);

  std::vector<SpectralModel> models;
  std::vector<double> fit_ms;
  if (method.cutoffs.empty()) {
    const auto t = Clock::now();
    models.push_back(fit(data, config.manifold, config.group, method.alpha));
    fit_ms.push_back(elapsed_ms(t));
  } else {
    for (auto cutoff : method.cutoffs) {
      const auto t = Clock::now();
      models.push_back(fit(data, config.manifold, config.group, method.alpha, cutoff));
      fit_ms.push_back(elapsed_ms(t));
    }
  }

  // Bases are nested prefixes of the same enumeration; evaluate the largest once.
  const auto largest = std::max_element(models.begin(), models.end(), [](const auto& a, const auto& b) {
                         return a.basis.size() < b.basis.size();
                       })->basis;
  BatchPredictor predictor = [&](const Eigen::MatrixXd& points) {
    const Eigen::MatrixXd features = largest.eval_rows(points);
    Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(models.size()));
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto size = static_cast<Eigen::Index>(models[k].basis.size());
      out.col(static_cast<Eigen::Index>(k)) = features.leftCols(size) * models[k].coefficients;
    }
    return out;
  };

  const auto t = Clock::now();
  DiscrepancyOptions disc = options.discrepancy;
  disc.seed = cell.seed;
  const auto ids = invariance_discrepancy(predictor, config.manifold, test, config.group, disc);
  const Eigen::MatrixXd predictions = predictor(test);
  const double shared = shared_setup + elapsed_ms(t);

  const auto params = hyperparameters(method);
  std::vector<MetricsRow> rows;
  for (std::size_t k = 0; k < models.size(); ++k) {
    MetricsRow row;
    row.method = method.name();
    row.hyperparam = params[k];
    row.n = cell.n;
    row.seed = cell.seed;
    row.invariance_discrepancy = ids[k].value;
    row.id_sampled = ids[k].sampled;
    row.excess_risk_empirical = empirical_excess_risk(predictions.col(static_cast<Eigen::Index>(k)), config.target,
                                                      config.manifold, test);
    row.excess_risk_exact = exact_excess_risk(models[k], config.target);
    row.wall_time_ms = options.record_timing ? fit_ms[k] + shared / static_cast<double>(models.size()) : 0.0;
    row.oracle_calls = static_cast<double>(models[k].oracle_calls.total());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::shared_ptr<const Kernel> make_kernel(const ExperimentConfig& config, const KernelConfig& kc,
                                          const RunOptions& options) {
  KernelSpec spec = kc.kind == KernelConfig::Kind::VonMises
                        ? von_mises(config.manifold, kc.bandwidth)
                        : truncated_sobolev(build_basis_within(config.manifold, kc.basis_dim), kc.alpha);
  if (kc.group_averaged) spec = group_averaged(std::move(spec), config.group);
  return std::make_shared<const Kernel>(std::move(spec), options.discrepancy.closure_cap);
}

std::vector<MetricsRow> krr_cell(const ExperimentConfig& config, const MethodConfig& method, const Cell& cell,
                                 const RunOptions& options) {
  const auto start = Clock::now();
  const auto data = generate_dataset(config, cell.n, cell.seed);
  const Eigen::MatrixXd test = test_points(config, cell.seed);
  const auto kernel = make_kernel(config, method.kernel, options);
  const KrrOptions krr_options;
  if (cell.n * cell.n * sizeof(double) > krr_options.gram_memory_budget_bytes) {
    throw ResourceExhausted("gram matrix exceeds the memory budget");
  }
  const Eigen::MatrixXd gram = kernel->gram(data.points);
  double shared = elapsed_ms(start);

  Eigen::MatrixXd weights(static_cast<Eigen::Index>(cell.n), static_cast<Eigen::Index>(method.ridges.size()));
  std::vector<double> solve_ms;
  for (std::size_t k = 0; k < method.ridges.size(); ++k) {
    const auto t = Clock::now();
    weights.col(static_cast<Eigen::Index>(k)) = solve_krr(gram, data.labels, method.ridges[k]).weights;
    solve_ms.push_back(elapsed_ms(t));
  }

  BatchPredictor predictor = [&](const Eigen::MatrixXd& points) -> Eigen::MatrixXd {
    return kernel->cross(points, data.points) * weights;
  };
  const auto t = Clock::now();
  DiscrepancyOptions disc = options.discrepancy;
  disc.seed = cell.seed;
  const auto ids = invariance_discrepancy(predictor, config.manifold, test, config.group, disc);
  const Eigen::MatrixXd predictions = predictor(test);
  shared += elapsed_ms(t);

  double group_size = 1.0;
  if (method.kernel.group_averaged) group_size = static_cast<double>(closure(config.group, options.discrepancy.closure_cap).size());
  const double kernel_evals = static_cast<double>(cell.n) * static_cast<double>(cell.n) * group_size;

  std::vector<MetricsRow> rows;
  for (std::size_t k = 0; k < method.ridges.size(); ++k) {
    MetricsRow row;
    row.method = method.name();
    row.hyperparam = method.ridges[k];
    row.n = cell.n;
    row.seed = cell.seed;
    row.invariance_discrepancy = ids[k].value;
    row.id_sampled = ids[k].sampled;
    row.excess_risk_empirical = empirical_excess_risk(predictions.col(static_cast<Eigen::Index>(k)), config.target,
                                                      config.manifold, test);
    row.wall_time_ms =
        options.record_timing ? solve_ms[k] + shared / static_cast<double>(method.ridges.size()) : 0.0;
    row.oracle_calls = kernel_evals;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> run_cell(const ExperimentConfig& config, const Cell& cell, const RunOptions& options) {
  const auto& method = config.methods[cell.method];
  try {
    return method.kind == MethodConfig::Kind::SpecAvg ? spec_avg_cell(config, method, cell, options)
                                                      : krr_cell(config, method, cell, options);
  } catch (const std::exception& e) {
    std::vector<MetricsRow> rows;
    for (double h : hyperparameters(method)) {
      MetricsRow row;
      row.method = method.name();
      row.hyperparam = h;
      row.n = cell.n;
      row.seed = cell.seed;
      row.error = e.what();
      rows.push_back(std::move(row));
    }
    return rows;
  }
}

}  // namespace

std::vector<MetricsRow> average_rows(const std::vector<MetricsRow>& seed_rows) {
  struct Acc {
    MetricsRow row;
    std::size_t count = 0;
    bool exact_complete = true;
  };
  std::vector<std::tuple<std::string, double, std::size_t>> order;
  std::map<std::tuple<std::string, double, std::size_t>, Acc> groups;
  for (const auto& r : seed_rows) {
    const auto key = std::make_tuple(r.method, r.hyperparam, r.n);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      order.push_back(key);
      it->second.row.method = r.method;
      it->second.row.hyperparam = r.hyperparam;
      it->second.row.n = r.n;
      it->second.row.excess_risk_exact = 0.0;
    }
    if (!r.error.empty()) continue;
    auto& acc = it->second;
    ++acc.count;
    acc.row.invariance_discrepancy += r.invariance_discrepancy;
    acc.row.id_sampled = acc.row.id_sampled || r.id_sampled;
    acc.row.excess_risk_empirical += r.excess_risk_empirical;
    if (r.excess_risk_exact) {
      *acc.row.excess_risk_exact += *r.excess_risk_exact;
    } else {
      acc.exact_complete = false;
    }
    acc.row.wall_time_ms += r.wall_time_ms;
    acc.row.oracle_calls += r.oracle_calls;
  }
  std::vector<MetricsRow> out;
  for (const auto& key : order) {
    auto acc = groups.at(key);
    auto row = acc.row;
    if (acc.count == 0) {
      row.error = "all seeds failed";
      row.excess_risk_exact.reset();
      out.push_back(std::move(row));
      continue;
    }
    const double c = static_cast<double>(acc.count);
    row.invariance_discrepancy /= c;
    row.excess_risk_empirical /= c;
    if (acc.exact_complete) {
      *row.excess_risk_exact /= c;
    } else {
      row.excess_risk_exact.reset();
    }
    row.wall_time_ms /= c;
    row.oracle_calls /= c;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<MetricsRow> run_experiment_rows(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    for (auto n : config.n_train) {
      for (auto seed : config.seeds) cells.push_back({m, n, seed});
    }
  }
  std::vector<std::vector<MetricsRow>> results(cells.size());
  std::size_t threads = options.threads ? options.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(config, cells[i], options);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Seed rows ordered by method, hyperparameter, n, seed.
  std::vector<MetricsRow> rows;
  std::size_t cell = 0;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const std::size_t h_count = config.methods[m].hyperparameter_count();
    const std::size_t span = config.n_train.size() * config.seeds.size();
    for (std::size_t h = 0; h < h_count; ++h) {
      for (std::size_t c = 0; c < span; ++c) rows.push_back(results[cell + c][h]);
    }
    cell += span;
  }
  auto averages = average_rows(rows);
  rows.insert(rows.end(), averages.begin(), averages.end());
  return rows;
}

std::string format_row(const MetricsRow& row) {
  std::ostringstream os;
  os << csv_escape(row.method) << ',' << format_double(row.hyperparam) << ',' << row.n << ','
     << (row.seed ? std::to_string(*row.seed) : std::string("avg")) << ',';
  if (!row.error.empty()) {
    os << ",,,,,," << csv_escape(row.error);
    return os.str();
  }
  os << format_double(row.invariance_discrepancy) << ',' << (row.id_sampled ? "true" : "false") << ','
     << format_double(row.excess_risk_empirical) << ','
     << (row.excess_risk_exact ? format_double(*row.excess_risk_exact) : std::string()) << ','
     << format_double(row.wall_time_ms) << ',' << format_double(row.oracle_calls) << ',';
  return os.str();
}

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& row : rows) out << format_row(row) << '\n';
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config, const std::string& path,
                                       const RunOptions& options) {
  const std::string target = path.empty() ? config.output : path;
  if (target.empty()) throw std::invalid_argument("no output path given");
  auto rows = run_experiment_rows(config, options);
  std::ofstream out(target, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + target + " for writing");
  write_csv(out, rows);
  return rows;
}

}  // namespace specavg
