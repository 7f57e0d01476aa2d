#pragma once

#include <cstddef>
#include <vector>

#include "embinv/matrix.hpp"

namespace embinv {

// Fitted linear map from the victim embedding space (dim m) into the attack
// space (dim n), with least-squares diagnostics.
struct AlignmentMap {
  Matrix w;                      // m x n
  std::size_t samples_used = 0;  // b
  double residual_fro = 0.0;     // ||attack - victim * w||_F
  std::size_t effective_rank = 0;
  double gradient_norm = 0.0;    // ||Ev^T Ev W - Ev^T Ea||_F, ~0 at the optimum
};

struct AlignmentOptions {
  double rcond = 1e-10;  // relative singular-value cutoff
  double ridge = 0.0;    // optional Tikhonov term; 0 keeps the pure pseudoinverse solution
};

// Minimum-norm least-squares fit w = pinv(victim) * attack. With ridge > 0
// the solution becomes (Ev^T Ev + ridge I)^-1 Ev^T Ea. Deterministic:
// identical inputs produce bitwise-identical maps.
AlignmentMap fit_alignment(const Matrix& victim, const Matrix& attack,
                           const AlignmentOptions& options = {});

// victim * w for a batch of victim-space rows.
Matrix apply_alignment(const AlignmentMap& map, const Matrix& victim);

// Row-wise cosine between aligned embeddings and ground truth. Zero-norm rows
// are recorded as NaN, counted in skipped_rows, and excluded from the mean.
struct QualityReport {
  std::vector<double> row_cosine;
  double mean_cosine = 0.0;
  std::size_t skipped_rows = 0;
};

QualityReport alignment_quality(const Matrix& aligned, const Matrix& attack_truth);

}  // namespace embinv
