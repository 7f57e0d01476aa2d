#include "embinv/alignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "embinv/svd.hpp"

namespace embinv {

AlignmentMap fit_alignment(const Matrix& victim, const Matrix& attack,
                           const AlignmentOptions& options) {
  if (victim.rows == 0) throw std::invalid_argument("fit_alignment: no sample pairs (b == 0)");
  if (victim.rows != attack.rows) {
    throw std::invalid_argument("fit_alignment: victim/attack row counts differ");
  }
  if (!victim.all_finite() || !attack.all_finite()) {
    throw std::invalid_argument("fit_alignment: non-finite entries");
  }
  if (!(options.rcond > 0.0 && options.rcond < 1.0)) {
    throw std::invalid_argument("fit_alignment: rcond must lie in (0, 1)");
  }
  if (options.ridge < 0.0) throw std::invalid_argument("fit_alignment: ridge must be >= 0");

  const SvdFactors f = svd(victim);
  const std::size_t k = f.singular_values.size();
  const double sigma_max = k > 0 ? f.singular_values[0] : 0.0;
  const double cutoff = options.rcond * sigma_max;

  // W = V diag(g) U^T Ea, with g_i the filtered inverse spectrum:
  // 1/sigma for the pseudoinverse, sigma/(sigma^2 + ridge) for Tikhonov.
  Matrix c = matmul(transpose(f.u), attack);  // k x n
  std::size_t effective_rank = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double s = f.singular_values[i];
    if (s > cutoff && s > 0.0) ++effective_rank;
    double g = 0.0;
    if (options.ridge > 0.0) {
      g = s > 0.0 ? s / (s * s + options.ridge) : 0.0;
    } else {
      g = (s > cutoff && s > 0.0) ? 1.0 / s : 0.0;
    }
    auto row = c.row(i);
    for (double& x : row) x *= g;
  }

  AlignmentMap map;
  map.w = matmul(transpose(f.vt), c);  // m x n
  map.samples_used = victim.rows;
  map.effective_rank = effective_rank;

  const Matrix residual = subtract(attack, matmul(victim, map.w));
  map.residual_fro = residual.frobenius_norm();
  map.gradient_norm = matmul(transpose(victim), residual).frobenius_norm();
  return map;
}

Matrix apply_alignment(const AlignmentMap& map, const Matrix& victim) {
  if (victim.cols != map.w.rows) {
    throw std::invalid_argument("apply_alignment: victim dimension does not match the map");
  }
  return matmul(victim, map.w);
}

QualityReport alignment_quality(const Matrix& aligned, const Matrix& attack_truth) {
  if (aligned.rows != attack_truth.rows || aligned.cols != attack_truth.cols) {
    throw std::invalid_argument("alignment_quality: shape mismatch");
  }
  QualityReport report;
  report.row_cosine.resize(aligned.rows);
  double sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < aligned.rows; ++i) {
    const auto a = aligned.row(i);
    const auto t = attack_truth.row(i);
    double na = 0.0, nt = 0.0, d = 0.0;
    for (std::size_t j = 0; j < aligned.cols; ++j) {
      na += a[j] * a[j];
      nt += t[j] * t[j];
      d += a[j] * t[j];
    }
    if (na == 0.0 || nt == 0.0) {
      report.row_cosine[i] = std::numeric_limits<double>::quiet_NaN();
      ++report.skipped_rows;
      continue;
    }
    const double cosv = d / (std::sqrt(na) * std::sqrt(nt));
    report.row_cosine[i] = cosv;
    sum += cosv;
    ++valid;
  }
  report.mean_cosine =
      valid > 0 ? sum / static_cast<double>(valid) : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace embinv
