#include "permcap/quadrature.hpp"

#include "permcap/errors.hpp"

namespace permcap {

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (max_subdivisions < 1) {
    throw DomainError("quadrature needs at least one subdivision");
  }
}

}  // namespace permcap
