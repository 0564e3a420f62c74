#pragma once

#include <stdexcept>
#include <string>

namespace clogsim {

/// Argument outside the domain of a geometric or kinetic law.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mesh generation could not produce a valid triangulation.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solve failed or did not reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, inconsistent or mismatched input (config files, tables, dumps).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace clogsim
