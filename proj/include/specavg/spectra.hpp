#pragma once

// Laplace-Beltrami eigenbases of the flat torus [-1,1)^d and the circle.
//
// Basis functions are orthonormal with respect to the uniform probability
// measure. On the torus the function attached to an index (l, pattern) is
//
//     prod_i  h(l_i, pattern_i, x_i),   h = 1 if l_i == 0,
//                                        sqrt(2) cos(pi l_i x_i) or
//                                        sqrt(2) sin(pi l_i x_i) otherwise,
//
// and on the circle the same product with pi x replaced by the angle theta.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace specavg {

enum class ManifoldKind { FlatTorus, Circle };
enum class BasisMode { FullFourier, CosineOnly };
enum class Trig : std::uint8_t { Cos, Sin };

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  int dimension = 1;
  BasisMode basis_mode = BasisMode::FullFourier;

  static ManifoldSpec torus(int d, BasisMode mode = BasisMode::FullFourier) {
    return {ManifoldKind::FlatTorus, d, mode};
  }
  static ManifoldSpec circle() { return {ManifoldKind::Circle, 1, BasisMode::FullFourier}; }

  /// Throws std::invalid_argument when the combination is not supported.
  void validate() const;

  /// Lower end of the chart interval in every coordinate (-1 or -pi).
  double chart_min() const;
  /// Length of the chart interval (2 or 2 pi).
  double period() const;

  friend bool operator==(const ManifoldSpec&, const ManifoldSpec&) = default;
};

/// Frequencies and per-coordinate trig factors of one eigenfunction.
/// Coordinates with zero frequency always carry Trig::Cos.
struct EigenIndex {
  std::vector<int> frequencies;
  std::vector<Trig> pattern;

  /// sum_i l_i^2; indices share an eigenspace iff this agrees.
  int shell() const;
  /// Number of coordinates carrying a sine factor.
  int sine_count() const;

  friend bool operator==(const EigenIndex&, const EigenIndex&) = default;
};

struct Eigenspace {
  double eigenvalue = 0.0;
  int shell = 0;
  std::size_t offset = 0;  // position of the first member in the basis
  std::size_t size = 0;    // multiplicity m
};

/// Ordered prefix of whole eigenspaces. Immutable once built.
class TruncatedBasis {
public:
  TruncatedBasis() = default;

  const ManifoldSpec& manifold() const { return manifold_; }
  std::size_t size() const { return indices_.size(); }
  std::span<const EigenIndex> indices() const { return indices_; }
  std::span<const Eigenspace> eigenspaces() const { return eigenspaces_; }
  /// D_lambda per eigenspace: cumulative dimension through that eigenspace.
  std::span<const std::size_t> cumulative_dims() const { return cumulative_; }

  /// Eigenspace position of basis function j.
  std::size_t eigenspace_of(std::size_t j) const { return owner_[j]; }
  /// D_lambda of the eigenspace that basis function j belongs to.
  std::size_t cumulative_dim_of(std::size_t j) const { return cumulative_[owner_[j]]; }
  int max_frequency() const { return max_frequency_; }

  std::optional<std::size_t> find(const EigenIndex& index) const;

  /// First `count` eigenspaces of this basis.
  TruncatedBasis prefix(std::size_t count) const;

  /// Values of every basis function at x (strict: x must lie in the chart).
  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Row i holds eval(points.row(i)).
  Eigen::MatrixXd eval_rows(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

private:
  friend TruncatedBasis build_basis(const ManifoldSpec&, std::size_t, std::size_t);

  struct Factor {
    int coordinate;
    int frequency;
    Trig trig;
  };

  void finalize();
  void eval_into(const Eigen::Ref<const Eigen::VectorXd>& x, double* out,
                 std::vector<double>& cos_table, std::vector<double>& sin_table) const;

  ManifoldSpec manifold_{};
  std::vector<EigenIndex> indices_;
  std::vector<Eigenspace> eigenspaces_;
  std::vector<std::size_t> cumulative_;
  std::vector<std::size_t> owner_;
  std::vector<std::vector<Factor>> factors_;
  int max_frequency_ = 0;
};

inline constexpr std::size_t kDefaultLatticeBudget = 4'000'000;

/// Smallest prefix of whole eigenspaces with total dimension >= min_total_dim.
/// Throws ResourceExhausted when the lattice search visits more than
/// `lattice_budget` nodes.
TruncatedBasis build_basis(const ManifoldSpec& manifold, std::size_t min_total_dim,
                           std::size_t lattice_budget = kDefaultLatticeBudget);

/// Largest prefix of whole eigenspaces with total dimension <= max_total_dim,
/// always keeping the constant eigenspace.
TruncatedBasis build_basis_within(const ManifoldSpec& manifold, std::size_t max_total_dim,
                                  std::size_t lattice_budget = kDefaultLatticeBudget);

Eigen::VectorXd eval_basis(const TruncatedBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& x);

/// pi^2 sum l_i^2, the flat torus eigenvalue.
double eigenvalue_of(const EigenIndex& index);
/// Torus: pi^2 sum l_i^2. Circle: k^2.
double eigenvalue_of(const ManifoldSpec& manifold, const EigenIndex& index);

/// Total order used inside an eigenspace: lexicographic on frequencies, then
/// on pattern. The torus puts cos before sin; the circle puts sin before cos
/// so that rotations act by R(+angle) on (sin, cos) pairs.
bool index_less(const ManifoldSpec& manifold, const EigenIndex& a, const EigenIndex& b);

/// Throws DomainError unless x has the right size and lies in the chart.
void check_point(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::VectorXd>& x);
bool in_chart(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Wraps every coordinate of x into the chart [-1,1) or [-pi,pi).
Eigen::VectorXd canonicalize(const ManifoldSpec& manifold, Eigen::VectorXd x);
double wrap_coordinate(double value, double lo, double period);

/// Geodesic distance (coordinatewise wrapped Euclidean).
double geodesic_distance(const ManifoldSpec& manifold, const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

}  // namespace specavg
