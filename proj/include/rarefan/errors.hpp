#pragma once

#include <stdexcept>
#include <string>

namespace rarefan {

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Point outside the natural domain of a formula or map.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A walk whose supremum is not almost surely finite.
struct DriftError : std::domain_error {
  using std::domain_error::domain_error;
};

// Query on the support boundary, where the comparison formula may carry an atom.
struct BoundaryRefusal : std::domain_error {
  using std::domain_error::domain_error;
};

struct StabilityError : std::domain_error {
  using std::domain_error::domain_error;
};

struct WindowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CouplingError : std::logic_error {
  using std::logic_error::logic_error;
};

struct SizeError : std::length_error {
  using std::length_error::length_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

}  // namespace rarefan
