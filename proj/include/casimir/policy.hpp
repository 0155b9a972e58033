#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace casimir {

// Shared accuracy and budget knobs for series, sums and quadratures.
struct EvalPolicy {
  double rel_tol = 1e-12;           // target relative accuracy, in (0, 1e-3]
  std::size_t max_terms = 2000000;  // series/sum term budget, >= 16
  unsigned max_subdivisions = 15;   // adaptive quadrature refinement depth

  void validate() const {
    if (!(rel_tol > 0.0) || rel_tol > 1e-3)
      throw std::invalid_argument("EvalPolicy: rel_tol must lie in (0, 1e-3]");
    if (max_terms < 16)
      throw std::invalid_argument("EvalPolicy: max_terms must be at least 16");
    if (max_subdivisions == 0)
      throw std::invalid_argument("EvalPolicy: max_subdivisions must be positive");
  }
};

// A sum or quadrature failed to reach the requested tolerance within its
// budget. Kept distinct from std::domain_error so drivers can map numerical
// non-convergence to a dedicated exit status.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(std::string const& msg) : std::runtime_error(msg) {}
};

}  // namespace casimir
