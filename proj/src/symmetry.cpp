#include "specavg/symmetry.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "specavg/errors.hpp"

namespace specavg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::size_t factorial(int d) {
  std::size_t f = 1;
  for (int i = 2; i <= d; ++i) f *= static_cast<std::size_t>(i);
  return f;
}

Permutation identity_permutation(int d) {
  Permutation p;
  p.image.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) p.image[i] = i;
  return p;
}

void check_shape(const GroupElement& g, GroupKind kind, int parameter) {
  const bool ok = std::visit(
      overloaded{
          [&](const SignFlip& s) {
            if (kind != GroupKind::SignFlips && kind != GroupKind::Trivial) return false;
            if (static_cast<int>(s.signs.size()) != parameter) return false;
            for (int v : s.signs) {
              if (v != 1 && v != -1) return false;
            }
            return kind == GroupKind::SignFlips || is_identity(g);
          },
          [&](const Permutation& p) {
            if (kind != GroupKind::CoordinatePermutations && kind != GroupKind::Trivial) return false;
            if (static_cast<int>(p.image.size()) != parameter) return false;
            std::vector<bool> seen(p.image.size(), false);
            for (int v : p.image) {
              if (v < 0 || v >= parameter || seen[v]) return false;
              seen[v] = true;
            }
            return kind == GroupKind::CoordinatePermutations || is_identity(g);
          },
          [&](const Rotation& r) {
            if (kind != GroupKind::CyclicRotation) return false;
            return r.order == parameter && r.step >= 0 && r.step < r.order;
          },
      },
      g);
  if (!ok) throw std::invalid_argument("generator " + to_string(g) + " does not fit group kind " + to_string(kind));
}

}  // namespace

GroupSpec GroupSpec::trivial(int d) {
  if (d < 1) throw std::invalid_argument("trivial group needs a positive dimension");
  return {GroupKind::Trivial, d, {identity_permutation(d)}, 1};
}

GroupSpec GroupSpec::sign_flips(int d) {
  if (d < 1) throw std::invalid_argument("sign group needs a positive dimension");
  GroupSpec g{GroupKind::SignFlips, d, {}, std::size_t{1} << d};
  for (int i = 0; i < d; ++i) {
    SignFlip s{std::vector<int>(static_cast<std::size_t>(d), 1)};
    s.signs[i] = -1;
    g.generators.emplace_back(std::move(s));
  }
  return g;
}

GroupSpec GroupSpec::coordinate_permutations(int d) {
  if (d < 1) throw std::invalid_argument("permutation group needs a positive dimension");
  GroupSpec g{GroupKind::CoordinatePermutations, d, {}, factorial(d)};
  if (d == 1) {
    g.generators.emplace_back(identity_permutation(1));
    return g;
  }
  Permutation swap = identity_permutation(d);
  std::swap(swap.image[0], swap.image[1]);
  g.generators.emplace_back(swap);
  if (d > 2) {
    Permutation cycle;
    for (int i = 0; i < d; ++i) cycle.image.push_back((i + 1) % d);
    g.generators.emplace_back(std::move(cycle));
  }
  return g;
}

GroupSpec GroupSpec::cyclic_rotation(int m) {
  if (m < 1) throw std::invalid_argument("cyclic group needs a positive order");
  return {GroupKind::CyclicRotation, m, {Rotation{m == 1 ? 0 : 1, m}}, static_cast<std::size_t>(m)};
}

GroupSpec GroupSpec::with_generators(GroupKind kind, int parameter, std::vector<GroupElement> generators) {
  GroupSpec g;
  switch (kind) {
    case GroupKind::Trivial: g = trivial(parameter); break;
    case GroupKind::SignFlips: g = sign_flips(parameter); break;
    case GroupKind::CoordinatePermutations: g = coordinate_permutations(parameter); break;
    case GroupKind::CyclicRotation: g = cyclic_rotation(parameter); break;
  }
  if (generators.empty()) throw std::invalid_argument("explicit generator list is empty");
  for (const auto& gen : generators) check_shape(gen, kind, parameter);
  g.generators = std::move(generators);
  return g;
}

GroupElement GroupSpec::identity() const {
  switch (kind) {
    case GroupKind::SignFlips: return SignFlip{std::vector<int>(static_cast<std::size_t>(parameter), 1)};
    case GroupKind::CyclicRotation: return Rotation{0, parameter};
    case GroupKind::Trivial:
    case GroupKind::CoordinatePermutations: break;
  }
  return identity_permutation(parameter);
}

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Trivial: return "trivial";
    case GroupKind::SignFlips: return "sign_flips";
    case GroupKind::CoordinatePermutations: return "coordinate_permutations";
    case GroupKind::CyclicRotation: return "cyclic_rotation";
  }
  return "unknown";
}

std::string to_string(const GroupElement& g) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const SignFlip& s) {
                   os << "signs(";
                   for (std::size_t i = 0; i < s.signs.size(); ++i) os << (i ? "," : "") << (s.signs[i] > 0 ? "+" : "-");
                   os << ")";
                 },
                 [&](const Permutation& p) {
                   os << "perm(";
                   for (std::size_t i = 0; i < p.image.size(); ++i) os << (i ? "," : "") << p.image[i];
                   os << ")";
                 },
                 [&](const Rotation& r) { os << "rot(" << r.step << "/" << r.order << ")"; },
             },
             g);
  return os.str();
}

GroupElement compose(const GroupElement& first, const GroupElement& second) {
  if (first.index() != second.index()) throw DimensionMismatch("cannot compose elements of different groups");
  return std::visit(
      overloaded{
          [&](const SignFlip& a) -> GroupElement {
            const auto& b = std::get<SignFlip>(second);
            if (a.signs.size() != b.signs.size()) throw DimensionMismatch("sign vectors differ in length");
            SignFlip out{a.signs};
            for (std::size_t i = 0; i < out.signs.size(); ++i) out.signs[i] *= b.signs[i];
            return out;
          },
          [&](const Permutation& a) -> GroupElement {
            const auto& b = std::get<Permutation>(second);
            if (a.image.size() != b.image.size()) throw DimensionMismatch("permutations differ in degree");
            Permutation out{std::vector<int>(a.image.size())};
            for (std::size_t i = 0; i < a.image.size(); ++i) out.image[i] = b.image[a.image[i]];
            return out;
          },
          [&](const Rotation& a) -> GroupElement {
            const auto& b = std::get<Rotation>(second);
            if (a.order != b.order) throw DimensionMismatch("rotations differ in order");
            return Rotation{(a.step + b.step) % a.order, a.order};
          },
      },
      first);
}

GroupElement inverse(const GroupElement& g) {
  return std::visit(overloaded{
                        [](const SignFlip& s) -> GroupElement { return s; },
                        [](const Permutation& p) -> GroupElement {
                          Permutation out{std::vector<int>(p.image.size())};
                          for (std::size_t i = 0; i < p.image.size(); ++i) out.image[p.image[i]] = static_cast<int>(i);
                          return out;
                        },
                        [](const Rotation& r) -> GroupElement { return Rotation{(r.order - r.step) % r.order, r.order}; },
                    },
                    g);
}

bool is_identity(const GroupElement& g) {
  return std::visit(overloaded{
                        [](const SignFlip& s) {
                          for (int v : s.signs) {
                            if (v != 1) return false;
                          }
                          return true;
                        },
                        [](const Permutation& p) {
                          for (std::size_t i = 0; i < p.image.size(); ++i) {
                            if (p.image[i] != static_cast<int>(i)) return false;
                          }
                          return true;
                        },
                        [](const Rotation& r) { return r.step % r.order == 0; },
                    },
                    g);
}

GroupElement identity_like(const GroupElement& g) {
  return compose(g, inverse(g));
}

void check_compatible(const GroupSpec& group, const ManifoldSpec& manifold) {
  const bool circle = manifold.kind == ManifoldKind::Circle;
  switch (group.kind) {
    case GroupKind::CyclicRotation:
      if (!circle) throw GroupManifoldMismatch("cyclic rotations act on the circle only");
      break;
    case GroupKind::Trivial:
    case GroupKind::SignFlips:
    case GroupKind::CoordinatePermutations:
      if (group.parameter != manifold.dimension) {
        throw GroupManifoldMismatch(to_string(group.kind) + " of degree " + std::to_string(group.parameter) +
                                    " cannot act on a manifold of dimension " +
                                    std::to_string(manifold.dimension));
      }
      break;
  }
  for (const auto& g : group.generators) check_shape(g, group.kind, group.parameter);
}

Eigen::VectorXd apply_group_element(const ManifoldSpec& manifold, const GroupElement& g,
                                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double lo = manifold.chart_min();
  const double period = manifold.period();
  const auto n = x.size();
  Eigen::VectorXd y(n);
  std::visit(overloaded{
                 [&](const SignFlip& s) {
                   if (static_cast<Eigen::Index>(s.signs.size()) != n) throw DimensionMismatch("sign vector does not match point");
                   for (Eigen::Index i = 0; i < n; ++i) y[i] = s.signs[i] * x[i];
                 },
                 [&](const Permutation& p) {
                   if (static_cast<Eigen::Index>(p.image.size()) != n) throw DimensionMismatch("permutation does not match point");
                   for (Eigen::Index i = 0; i < n; ++i) y[p.image[i]] = x[i];
                 },
                 [&](const Rotation& r) {
                   if (manifold.kind != ManifoldKind::Circle || n != 1) {
                     throw GroupManifoldMismatch("rotations act on the circle only");
                   }
                   y[0] = x[0] + 2.0 * std::numbers::pi * r.step / r.order;
                 },
             },
             g);
  for (Eigen::Index i = 0; i < n; ++i) {
    double w = wrap_coordinate(y[i], lo, period);
    if (w >= lo + period) w = lo;
    y[i] = w;
  }
  return y;
}

Eigen::VectorXd apply_group_element(const GroupSpec& group, const ManifoldSpec& manifold,
                                    const GroupElement& g, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_compatible(group, manifold);
  check_shape(g, group.kind, group.parameter);
  if (x.size() != manifold.dimension) throw DimensionMismatch("point dimension does not match manifold");
  return apply_group_element(manifold, g, x);
}

Eigen::MatrixXd apply_group_element_rows(const ManifoldSpec& manifold, const GroupElement& g,
                                         const Eigen::Ref<const Eigen::MatrixXd>& points) {
  Eigen::MatrixXd out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = apply_group_element(manifold, g, points.row(i).transpose()).transpose();
  }
  return out;
}

std::vector<GroupElement> closure(std::span<const GroupElement> generators, std::size_t cap) {
  if (generators.empty()) throw std::invalid_argument("closure needs at least one generator");
  std::vector<GroupElement> steps;
  for (const auto& g : generators) {
    steps.push_back(g);
    steps.push_back(inverse(g));
  }
  std::vector<GroupElement> elements{identity_like(generators.front())};
  std::set<GroupElement> seen{elements.front()};
  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    const GroupElement current = elements[frontier.front()];
    frontier.pop_front();
    for (const auto& s : steps) {
      GroupElement next = compose(current, s);
      if (seen.insert(next).second) {
        if (elements.size() >= cap) {
          throw GroupTooLarge("group too large to enumerate: more than " + std::to_string(cap) + " elements");
        }
        elements.push_back(std::move(next));
        frontier.push_back(elements.size() - 1);
      }
    }
  }
  return elements;
}

std::vector<GroupElement> closure(const GroupSpec& group, std::size_t cap) {
  return closure(std::span<const GroupElement>(group.generators), cap);
}

RepresentationBlock representation_block(const GroupElement& g, const TruncatedBasis& basis,
                                         std::size_t eigenspace) {
  if (eigenspace >= basis.eigenspaces().size()) throw std::out_of_range("eigenspace index out of range");
  const auto& space = basis.eigenspaces()[eigenspace];
  const auto& manifold = basis.manifold();
  const auto m = static_cast<Eigen::Index>(space.size);
  RepresentationBlock block{space.eigenvalue, Eigen::MatrixXd::Zero(m, m)};
  const auto members = basis.indices().subspan(space.offset, space.size);

  std::visit(
      overloaded{
          [&](const SignFlip& s) {
            if (static_cast<int>(s.signs.size()) != manifold.dimension) {
              throw GroupManifoldMismatch("sign vector does not match manifold dimension");
            }
            for (Eigen::Index c = 0; c < m; ++c) {
              const auto& index = members[c];
              int sign = 1;
              for (std::size_t i = 0; i < s.signs.size(); ++i) {
                if (s.signs[i] < 0 && index.pattern[i] == Trig::Sin) sign = -sign;
              }
              block.matrix(c, c) = sign;
            }
          },
          [&](const Permutation& p) {
            if (static_cast<int>(p.image.size()) != manifold.dimension) {
              throw GroupManifoldMismatch("permutation degree does not match manifold dimension");
            }
            for (Eigen::Index c = 0; c < m; ++c) {
              const auto& index = members[c];
              // phi(g x) = prod_j h(l_{image[j]}, p_{image[j]}, x_j)
              EigenIndex moved{index.frequencies, index.pattern};
              for (std::size_t j = 0; j < p.image.size(); ++j) {
                moved.frequencies[j] = index.frequencies[p.image[j]];
                moved.pattern[j] = index.pattern[p.image[j]];
              }
              const auto row = basis.find(moved);
              if (!row || basis.eigenspace_of(*row) != eigenspace) {
                throw std::logic_error("permuted index left its eigenspace");
              }
              block.matrix(static_cast<Eigen::Index>(*row - space.offset), c) = 1.0;
            }
          },
          [&](const Rotation& r) {
            if (manifold.kind != ManifoldKind::Circle) throw GroupManifoldMismatch("rotations act on the circle only");
            if (m == 1) {
              block.matrix(0, 0) = 1.0;
              return;
            }
            // Members are ordered (sin k, cos k): D = R(k * 2 pi step / order).
            // Reduce k * step mod order first so multiples of a quarter turn are exact.
            const long k = std::lround(std::sqrt(static_cast<double>(space.shell)));
            const long turn = (k * r.step) % r.order;
            double c = 0.0, s = 0.0;
            if ((4 * turn) % r.order == 0) {
              constexpr double quarter_cos[] = {1.0, 0.0, -1.0, 0.0};
              constexpr double quarter_sin[] = {0.0, 1.0, 0.0, -1.0};
              c = quarter_cos[4 * turn / r.order];
              s = quarter_sin[4 * turn / r.order];
            } else {
              const double angle = 2.0 * std::numbers::pi * static_cast<double>(turn) / r.order;
              c = std::cos(angle);
              s = std::sin(angle);
            }
            block.matrix << c, -s, s, c;
          },
      },
      g);
  return block;
}

RepresentationBlock representation_block(const GroupSpec& group, const GroupElement& g,
                                         const TruncatedBasis& basis, std::size_t eigenspace) {
  check_compatible(group, basis.manifold());
  check_shape(g, group.kind, group.parameter);
  return representation_block(g, basis, eigenspace);
}

GroupElement random_word(const GroupSpec& group, std::size_t length, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, 2 * group.generators.size() - 1);
  GroupElement word = group.identity();
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t k = pick(rng);
    const auto& gen = group.generators[k / 2];
    word = compose(word, k % 2 == 0 ? gen : inverse(gen));
  }
  return word;
}

RepresentationReport verify_representation(const GroupSpec& group, const TruncatedBasis& basis,
                                           const VerifyOptions& options) {
  check_compatible(group, basis.manifold());
  RepresentationReport report;
  std::vector<GroupElement> elements;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  try {
    elements = closure(group, options.closure_cap);
    for (std::size_t a = 0; a < elements.size(); ++a) {
      for (std::size_t b = 0; b < elements.size(); ++b) pairs.emplace_back(a, b);
    }
  } catch (const GroupTooLarge&) {
    report.sampled = true;
    std::mt19937_64 rng(options.seed);
    for (std::size_t i = 0; i < 2 * options.sample_pairs; ++i) {
      elements.push_back(random_word(group, options.word_length, rng));
    }
    for (std::size_t i = 0; i < options.sample_pairs; ++i) pairs.emplace_back(2 * i, 2 * i + 1);
  }
  report.elements_checked = elements.size();
  report.pairs_checked = pairs.size();

  for (std::size_t e = 0; e < basis.eigenspaces().size(); ++e) {
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(elements.size());
    for (const auto& g : elements) blocks.push_back(representation_block(g, basis, e).matrix);
    const auto m = blocks.front().rows();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t i = 0; i < elements.size(); ++i) {
      const double dev = (blocks[i].transpose() * blocks[i] - eye).cwiseAbs().maxCoeff();
      report.max_orthogonality_deviation = std::max(report.max_orthogonality_deviation, dev);
      if (dev > options.tolerance) {
        report.failures.push_back("orthogonality of " + to_string(elements[i]) + " on eigenspace " +
                                  std::to_string(e));
      }
    }
    for (const auto& [a, b] : pairs) {
      const auto product = representation_block(compose(elements[a], elements[b]), basis, e).matrix;
      const double dev = (product - blocks[a] * blocks[b]).cwiseAbs().maxCoeff();
      report.max_law_deviation = std::max(report.max_law_deviation, dev);
      if (dev > options.tolerance) {
        report.failures.push_back("law for (" + to_string(elements[a]) + ", " + to_string(elements[b]) +
                                  ") on eigenspace " + std::to_string(e));
      }
    }
  }
  return report;
}

}  // namespace specavg
