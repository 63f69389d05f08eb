#pragma once

// Finite groups acting isometrically on the built-in manifolds, and the
// orthogonal matrices by which they act on each eigenspace.
//
// Conventions:
//   * T_g f = f(g .), and the coefficient vector of T_g f restricted to an
//     eigenspace is D(g) f.
//   * compose(a, b) is read left to right: it acts by x -> b(a(x)). With
//     this product D(compose(a, b)) = D(a) D(b).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "specavg/spectra.hpp"

namespace specavg {

/// Coordinatewise sign changes, entries in {-1, +1}.
struct SignFlip {
  std::vector<int> signs;
  auto operator<=>(const SignFlip&) const = default;
};

/// Coordinate permutation; image[i] is where coordinate i is sent, so the
/// action is y[image[i]] = x[i].
struct Permutation {
  std::vector<int> image;
  auto operator<=>(const Permutation&) const = default;
};

/// Rotation of the circle by 2 pi step / order.
struct Rotation {
  int step = 0;
  int order = 1;
  auto operator<=>(const Rotation&) const = default;
};

using GroupElement = std::variant<SignFlip, Permutation, Rotation>;

enum class GroupKind { Trivial, SignFlips, CoordinatePermutations, CyclicRotation };

struct GroupSpec {
  GroupKind kind = GroupKind::Trivial;
  /// d for coordinate groups, m for CyclicRotation.
  int parameter = 1;
  std::vector<GroupElement> generators;
  std::size_t declared_order = 1;

  static GroupSpec trivial(int d);
  /// d single-coordinate flips.
  static GroupSpec sign_flips(int d);
  /// {(1 2), (1 2 ... d)}; a single identity generator when d == 1.
  static GroupSpec coordinate_permutations(int d);
  /// One generator, rotation by 2 pi / m.
  static GroupSpec cyclic_rotation(int m);
  /// Same group, explicit generators (validated against the kind).
  static GroupSpec with_generators(GroupKind kind, int parameter, std::vector<GroupElement> generators);

  GroupElement identity() const;
};

std::string to_string(GroupKind kind);
std::string to_string(const GroupElement& g);

GroupElement compose(const GroupElement& first, const GroupElement& second);
GroupElement inverse(const GroupElement& g);
bool is_identity(const GroupElement& g);
/// Identity element of the same shape as g.
GroupElement identity_like(const GroupElement& g);

/// Throws GroupManifoldMismatch when the group cannot act on the manifold.
void check_compatible(const GroupSpec& group, const ManifoldSpec& manifold);

/// Image of x under g, wrapped back into the chart.
Eigen::VectorXd apply_group_element(const ManifoldSpec& manifold, const GroupElement& g,
                                    const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd apply_group_element(const GroupSpec& group, const ManifoldSpec& manifold,
                                    const GroupElement& g, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Applies g to every row.
Eigen::MatrixXd apply_group_element_rows(const ManifoldSpec& manifold, const GroupElement& g,
                                         const Eigen::Ref<const Eigen::MatrixXd>& points);

inline constexpr std::size_t kDefaultClosureCap = 10'000;

/// Breadth-first closure of the generators under composition and inversion.
/// Identity first, then in discovery order. Throws GroupTooLarge past `cap`.
std::vector<GroupElement> closure(std::span<const GroupElement> generators,
                                  std::size_t cap = kDefaultClosureCap);
std::vector<GroupElement> closure(const GroupSpec& group, std::size_t cap = kDefaultClosureCap);

struct RepresentationBlock {
  double eigenvalue = 0.0;
  Eigen::MatrixXd matrix;
};

/// D(g) on one eigenspace; entry (r, c) = <phi_c(g .), phi_r>.
RepresentationBlock representation_block(const GroupSpec& group, const GroupElement& g,
                                         const TruncatedBasis& basis, std::size_t eigenspace);
/// Same, without the group-level compatibility check.
RepresentationBlock representation_block(const GroupElement& g, const TruncatedBasis& basis,
                                         std::size_t eigenspace);

struct RepresentationReport {
  double max_orthogonality_deviation = 0.0;
  double max_law_deviation = 0.0;
  std::size_t elements_checked = 0;
  std::size_t pairs_checked = 0;
  bool sampled = false;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

struct VerifyOptions {
  std::size_t closure_cap = kDefaultClosureCap;
  /// Random pairs drawn when the closure is too large.
  std::size_t sample_pairs = 256;
  /// Word length of sampled elements.
  std::size_t word_length = 8;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
};

/// Checks orthogonality and D(ab) = D(a) D(b) on every eigenspace, over all
/// pairs of the closure when it is enumerable and over sampled words otherwise.
RepresentationReport verify_representation(const GroupSpec& group, const TruncatedBasis& basis,
                                           const VerifyOptions& options = {});

/// Random product of `length` generators (or their inverses).
GroupElement random_word(const GroupSpec& group, std::size_t length, std::mt19937_64& rng);

}  // namespace specavg
