#include "specavg/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "specavg/errors.hpp"

namespace specavg {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Visits every l in N^d with sum l_i^2 == shell, in lexicographic order.
class ShellEnumerator {
public:
  ShellEnumerator(int dimension, std::size_t& visited, std::size_t budget)
      : current_(dimension, 0), visited_(visited), budget_(budget) {}

  template <typename Sink>
  void run(int shell, Sink&& sink) {
    recurse(0, shell, sink);
  }

private:
  template <typename Sink>
  void recurse(int coordinate, int remaining, Sink& sink) {
    if (++visited_ > budget_) {
      throw ResourceExhausted("lattice search exceeded budget of " + std::to_string(budget_) +
                              " nodes");
    }
    const int d = static_cast<int>(current_.size());
    if (coordinate == d - 1) {
      const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(remaining))));
      if (root * root == remaining) {
        current_[coordinate] = root;
        sink(current_);
      }
      return;
    }
    for (int l = 0; l * l <= remaining; ++l) {
      current_[coordinate] = l;
      recurse(coordinate + 1, remaining - l * l, sink);
    }
    current_[coordinate] = 0;
  }

  std::vector<int> current_;
  std::size_t& visited_;
  std::size_t budget_;
};

// All trig patterns compatible with the frequencies, cos-first order.
void append_patterns(const ManifoldSpec& manifold, const std::vector<int>& freq,
                     std::vector<EigenIndex>& out, std::size_t& visited, std::size_t budget) {
  std::vector<int> active;
  for (int i = 0; i < static_cast<int>(freq.size()); ++i) {
    if (freq[i] != 0) active.push_back(i);
  }
  const bool cosine_only = manifold.basis_mode == BasisMode::CosineOnly;
  const std::size_t count = cosine_only ? 1 : (std::size_t{1} << active.size());
  for (std::size_t mask = 0; mask < count; ++mask) {
    if (++visited > budget) {
      throw ResourceExhausted("lattice search exceeded budget of " + std::to_string(budget) +
                              " nodes");
    }
    EigenIndex index{freq, std::vector<Trig>(freq.size(), Trig::Cos)};
    for (std::size_t b = 0; b < active.size(); ++b) {
      if ((mask >> b) & 1U) index.pattern[active[b]] = Trig::Sin;
    }
    out.push_back(std::move(index));
  }
}

}  // namespace

void ManifoldSpec::validate() const {
  if (dimension < 1) throw std::invalid_argument("manifold dimension must be positive");
  if (kind == ManifoldKind::Circle) {
    if (dimension != 1) throw std::invalid_argument("the circle has dimension 1");
    if (basis_mode == BasisMode::CosineOnly) {
      throw std::invalid_argument("cosine-only bases are only defined on the flat torus");
    }
  }
}

double ManifoldSpec::chart_min() const {
  return kind == ManifoldKind::Circle ? -std::numbers::pi : -1.0;
}

double ManifoldSpec::period() const {
  return kind == ManifoldKind::Circle ? 2.0 * std::numbers::pi : 2.0;
}

int EigenIndex::shell() const {
  int s = 0;
  for (int l : frequencies) s += l * l;
  return s;
}

int EigenIndex::sine_count() const {
  return static_cast<int>(std::count(pattern.begin(), pattern.end(), Trig::Sin));
}

bool index_less(const ManifoldSpec& manifold, const EigenIndex& a, const EigenIndex& b) {
  if (a.frequencies != b.frequencies) return a.frequencies < b.frequencies;
  const bool sine_first = manifold.kind == ManifoldKind::Circle;
  for (std::size_t i = 0; i < a.pattern.size(); ++i) {
    if (a.pattern[i] == b.pattern[i]) continue;
    const bool a_sin = a.pattern[i] == Trig::Sin;
    return sine_first ? a_sin : !a_sin;
  }
  return false;
}

double eigenvalue_of(const EigenIndex& index) {
  return std::numbers::pi * std::numbers::pi * index.shell();
}

double eigenvalue_of(const ManifoldSpec& manifold, const EigenIndex& index) {
  if (manifold.kind == ManifoldKind::Circle) return static_cast<double>(index.shell());
  return eigenvalue_of(index);
}

TruncatedBasis build_basis(const ManifoldSpec& manifold, std::size_t min_total_dim,
                           std::size_t lattice_budget) {
  manifold.validate();
  if (min_total_dim < 1) throw std::invalid_argument("min_total_dim must be at least 1");

  TruncatedBasis basis;
  basis.manifold_ = manifold;
  std::size_t visited = 0;
  ShellEnumerator enumerator(manifold.dimension, visited, lattice_budget);
  for (int shell = 0; basis.indices_.size() < min_total_dim; ++shell) {
    std::vector<EigenIndex> members;
    enumerator.run(shell, [&](const std::vector<int>& freq) {
      append_patterns(manifold, freq, members, visited, lattice_budget);
    });
    if (members.empty()) continue;
    std::sort(members.begin(), members.end(), [&](const EigenIndex& a, const EigenIndex& b) {
      return index_less(manifold, a, b);
    });
    Eigenspace space;
    space.shell = shell;
    space.eigenvalue = eigenvalue_of(manifold, members.front());
    space.offset = basis.indices_.size();
    space.size = members.size();
    basis.eigenspaces_.push_back(space);
    for (auto& m : members) basis.indices_.push_back(std::move(m));
  }
  basis.finalize();
  return basis;
}

TruncatedBasis build_basis_within(const ManifoldSpec& manifold, std::size_t max_total_dim,
                                  std::size_t lattice_budget) {
  auto basis = build_basis(manifold, std::max<std::size_t>(max_total_dim, 1), lattice_budget);
  std::size_t keep = 1;
  const auto cumulative = basis.cumulative_dims();
  while (keep < cumulative.size() && cumulative[keep] <= max_total_dim) ++keep;
  return keep == cumulative.size() ? basis : basis.prefix(keep);
}

void TruncatedBasis::finalize() {
  cumulative_.clear();
  owner_.assign(indices_.size(), 0);
  factors_.clear();
  max_frequency_ = 0;
  std::size_t total = 0;
  for (std::size_t e = 0; e < eigenspaces_.size(); ++e) {
    total += eigenspaces_[e].size;
    cumulative_.push_back(total);
    for (std::size_t j = 0; j < eigenspaces_[e].size; ++j) owner_[eigenspaces_[e].offset + j] = e;
  }
  factors_.reserve(indices_.size());
  for (const auto& index : indices_) {
    std::vector<Factor> f;
    for (int i = 0; i < static_cast<int>(index.frequencies.size()); ++i) {
      if (index.frequencies[i] == 0) continue;
      f.push_back({i, index.frequencies[i], index.pattern[i]});
      max_frequency_ = std::max(max_frequency_, index.frequencies[i]);
    }
    factors_.push_back(std::move(f));
  }
}

std::optional<std::size_t> TruncatedBasis::find(const EigenIndex& index) const {
  const int shell = index.shell();
  for (const auto& space : eigenspaces_) {
    if (space.shell != shell) continue;
    const auto first = indices_.begin() + static_cast<std::ptrdiff_t>(space.offset);
    const auto last = first + static_cast<std::ptrdiff_t>(space.size);
    const auto it = std::lower_bound(first, last, index, [&](const EigenIndex& a, const EigenIndex& b) {
      return index_less(manifold_, a, b);
    });
    if (it != last && *it == index) return static_cast<std::size_t>(it - indices_.begin());
    return std::nullopt;
  }
  return std::nullopt;
}

TruncatedBasis TruncatedBasis::prefix(std::size_t count) const {
  if (count == 0 || count > eigenspaces_.size()) {
    throw std::out_of_range("prefix must keep between 1 and all eigenspaces");
  }
  TruncatedBasis out;
  out.manifold_ = manifold_;
  out.eigenspaces_.assign(eigenspaces_.begin(), eigenspaces_.begin() + static_cast<std::ptrdiff_t>(count));
  const std::size_t total = cumulative_[count - 1];
  out.indices_.assign(indices_.begin(), indices_.begin() + static_cast<std::ptrdiff_t>(total));
  out.finalize();
  return out;
}

void TruncatedBasis::eval_into(const Eigen::Ref<const Eigen::VectorXd>& x, double* out,
                               std::vector<double>& cos_table,
                               std::vector<double>& sin_table) const {
  const int d = manifold_.dimension;
  const int stride = max_frequency_ + 1;
  const double scale = manifold_.kind == ManifoldKind::Circle ? 1.0 : std::numbers::pi;
  cos_table.resize(static_cast<std::size_t>(d * stride));
  sin_table.resize(static_cast<std::size_t>(d * stride));
  for (int i = 0; i < d; ++i) {
    const double t = scale * x[i];
    for (int l = 1; l <= max_frequency_; ++l) {
      cos_table[i * stride + l] = kSqrt2 * std::cos(l * t);
      sin_table[i * stride + l] = kSqrt2 * std::sin(l * t);
    }
  }
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    double value = 1.0;
    for (const auto& f : factors_[j]) {
      const auto slot = static_cast<std::size_t>(f.coordinate * stride + f.frequency);
      value *= f.trig == Trig::Cos ? cos_table[slot] : sin_table[slot];
    }
    out[j] = value;
  }
}

Eigen::VectorXd TruncatedBasis::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_point(manifold_, x);
  Eigen::VectorXd out(size());
  std::vector<double> c, s;
  eval_into(x, out.data(), c, s);
  return out;
}

Eigen::MatrixXd TruncatedBasis::eval_rows(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(size()));
  Eigen::VectorXd row(size());
  std::vector<double> c, s;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd x = points.row(i).transpose();
    check_point(manifold_, x);
    eval_into(x, row.data(), c, s);
    out.row(i) = row.transpose();
  }
  return out;
}

Eigen::VectorXd eval_basis(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return basis.eval(x);
}

bool in_chart(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != manifold.dimension) return false;
  const double lo = manifold.chart_min();
  const double hi = lo + manifold.period();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < lo || x[i] >= hi) return false;
  }
  return true;
}

void check_point(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != manifold.dimension) {
    throw DomainError("point has " + std::to_string(x.size()) + " coordinates, manifold has " +
                      std::to_string(manifold.dimension));
  }
  if (!in_chart(manifold, x)) {
    throw DomainError("point outside the canonical chart; canonicalize it first");
  }
}

double wrap_coordinate(double value, double lo, double period) {
  if (value >= lo && value < lo + period) return value;
  double r = std::fmod(value - lo, period);
  if (r < 0) r += period;
  // A tiny negative remainder plus period can round up to period.
  if (r >= period) r -= period;
  return lo + r;
}

Eigen::VectorXd canonicalize(const ManifoldSpec& manifold, Eigen::VectorXd x) {
  const double lo = manifold.chart_min();
  const double period = manifold.period();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double w = wrap_coordinate(x[i], lo, period);
    if (w >= lo + period) w = lo;
    x[i] = w;
  }
  return x;
}

double geodesic_distance(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("points differ in dimension");
  const double period = manifold.period();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double delta = std::fmod(std::abs(a[i] - b[i]), period);
    delta = std::min(delta, period - delta);
    sum += delta * delta;
  }
  return std::sqrt(sum);
}

}  // namespace specavg
