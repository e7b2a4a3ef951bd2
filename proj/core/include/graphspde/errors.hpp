#pragma once

#include <stdexcept>
#include <string>

namespace graphspde {

/// Malformed or inconsistent input data (graphs, CSV files, datasets).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy result:
/// Cholesky failure after maximum jitter, singular Lyapunov operator,
/// violated integrator stability guard, optimizer breakdown.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace graphspde
