#pragma once

#include <stdexcept>
#include <string>

namespace specavg {

/// A point lies outside the canonical chart of its manifold.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Sizes of two arguments do not agree.
class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration or allocation would exceed its configured budget.
class ResourceExhausted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The closure of a generating set has more elements than the cap allows.
class GroupTooLarge : public ResourceExhausted {
public:
  using ResourceExhausted::ResourceExhausted;
};

/// A group action is not defined on the given manifold.
class GroupManifoldMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace specavg
