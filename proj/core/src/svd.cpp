#include "embinv/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace embinv {

namespace {

constexpr int kMaxSweeps = 96;
constexpr double kOrthTol = 1e-14;  // relative off-diagonal threshold

// One-sided Jacobi on a tall matrix (rows >= cols): orthogonalizes the
// columns of a working copy B = A * V by plane rotations, accumulating V.
// Afterwards sigma_j = ||B_j||, U_j = B_j / sigma_j.
SvdFactors svd_tall(const Matrix& a) {
  const std::size_t r = a.rows, c = a.cols;

  // Column-major working copies keep the inner loops contiguous.
  std::vector<double> b(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) b[j * r + i] = a(i, j);
  }
  std::vector<double> v(c * c, 0.0);
  for (std::size_t j = 0; j < c; ++j) v[j * c + j] = 1.0;

  bool converged = (c < 2);
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < c; ++p) {
      for (std::size_t q = p + 1; q < c; ++q) {
        double* bp = b.data() + p * r;
        double* bq = b.data() + q * r;
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
          app += bp[i] * bp[i];
          aqq += bq[i] * bq[i];
          apq += bp[i] * bq[i];
        }
        if (std::abs(apq) <= kOrthTol * std::sqrt(app * aqq)) continue;

        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < r; ++i) {
          const double xp = bp[i], xq = bq[i];
          bp[i] = cs * xp - sn * xq;
          bq[i] = sn * xp + cs * xq;
        }
        double* vp = v.data() + p * c;
        double* vq = v.data() + q * c;
        for (std::size_t i = 0; i < c; ++i) {
          const double xp = vp[i], xq = vq[i];
          vp[i] = cs * xp - sn * xq;
          vq[i] = sn * xp + cs * xq;
        }
        rotated = true;
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw std::runtime_error("svd: Jacobi sweeps did not converge within the iteration cap");
  }

  std::vector<double> sigma(c);
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0.0;
    const double* bj = b.data() + j * r;
    for (std::size_t i = 0; i < r; ++i) s += bj[i] * bj[i];
    sigma[j] = std::sqrt(s);
  }

  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdFactors f;
  f.u = Matrix(r, c);
  f.vt = Matrix(c, c);
  f.singular_values.resize(c);
  for (std::size_t jj = 0; jj < c; ++jj) {
    const std::size_t j = order[jj];
    const double s = sigma[j];
    f.singular_values[jj] = s;
    const double* bj = b.data() + j * r;
    if (s > 0.0) {
      for (std::size_t i = 0; i < r; ++i) f.u(i, jj) = bj[i] / s;
    }
    const double* vj = v.data() + j * c;
    for (std::size_t i = 0; i < c; ++i) f.vt(jj, i) = vj[i];
  }
  return f;
}

}  // namespace

SvdFactors svd(const Matrix& a) {
  if (!a.all_finite()) throw std::invalid_argument("svd: input has non-finite entries");
  if (a.rows == 0 || a.cols == 0) {
    SvdFactors f;
    f.u = Matrix(a.rows, 0);
    f.vt = Matrix(0, a.cols);
    return f;
  }
  if (a.rows >= a.cols) return svd_tall(a);

  // Wide case: factor the transpose and swap the roles of U and V.
  SvdFactors t = svd_tall(transpose(a));
  SvdFactors f;
  f.u = transpose(t.vt);
  f.singular_values = std::move(t.singular_values);
  f.vt = transpose(t.u);
  return f;
}

Matrix pinv(const Matrix& a, double rcond) {
  if (!(rcond > 0.0 && rcond < 1.0)) {
    throw std::invalid_argument("pinv: rcond must lie in (0, 1)");
  }
  if (a.rows == 0 || a.cols == 0) return Matrix(a.cols, a.rows);

  const SvdFactors f = svd(a);
  const std::size_t k = f.singular_values.size();
  const double cutoff = rcond * (k > 0 ? f.singular_values[0] : 0.0);

  Matrix p(a.cols, a.rows);
  for (std::size_t i = 0; i < k; ++i) {
    const double s = f.singular_values[i];
    if (!(s > cutoff) || s == 0.0) continue;
    const double g = 1.0 / s;
    for (std::size_t jc = 0; jc < a.cols; ++jc) {
      const double coef = g * f.vt(i, jc);
      if (coef == 0.0) continue;
      double* prow = p.data.data() + jc * a.rows;
      for (std::size_t jr = 0; jr < a.rows; ++jr) prow[jr] += coef * f.u(jr, i);
    }
  }
  return p;
}

}  // namespace embinv
