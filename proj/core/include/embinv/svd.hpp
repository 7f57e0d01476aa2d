#pragma once

#include "embinv/matrix.hpp"

namespace embinv {

// Thin SVD: a == u * diag(singular_values) * vt, with singular values sorted
// descending and k = min(rows, cols).
struct SvdFactors {
  Matrix u;                            // rows x k
  std::vector<double> singular_values; // k, descending, >= 0
  Matrix vt;                           // k x cols
};

// One-sided Jacobi SVD. Deterministic for a fixed input (fixed sweep order).
// Throws std::runtime_error if the sweeps do not converge within the
// iteration cap, std::invalid_argument on non-finite input.
SvdFactors svd(const Matrix& a);

// Moore-Penrose pseudoinverse. Singular values below rcond * sigma_max are
// treated as zero. rcond must lie in (0, 1).
Matrix pinv(const Matrix& a, double rcond = 1e-10);

}  // namespace embinv
