#pragma once

#include <Eigen/Cholesky>
#include <limits>
#include <stdexcept>
#include <string>

namespace airfl::detail {

/// Throws unless the Cholesky factorization succeeded with pivots that keep
/// the system numerically invertible. Rank-deficient inputs must fail here
/// rather than flow on as a de-facto pseudo-inverse.
template <typename LltType>
void require_well_conditioned(const LltType& llt, const std::string& who) {
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(who + ": matrix is not positive definite");
  const auto diag = llt.matrixLLT().diagonal().real().eval();
  const double dmax = diag.maxCoeff();
  const double dmin = diag.minCoeff();
  // diag holds the Cholesky pivots l_ii; (dmin/dmax)^2 estimates 1/cond.
  if (!(dmin > 0.0) ||
      dmin * dmin <= dmax * dmax * 64.0 * std::numeric_limits<double>::epsilon())
    throw std::runtime_error(who + ": matrix is numerically singular");
}

}  // namespace airfl::detail
