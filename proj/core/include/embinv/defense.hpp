#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "embinv/matrix.hpp"

namespace embinv {

enum class DefenseKind { Wet, Shuffle, Gaussian, Ldp };
enum class LdpMechanism { PurMech, LapMech };

// One defense configuration. The seed fully determines every random choice
// the defense makes.
struct DefenseSpec {
  DefenseKind kind = DefenseKind::Gaussian;
  double lambda = 0.0;       // Gaussian noise scale
  double epsilon = 0.0;      // LDP privacy budget, > 0 when kind == Ldp
  LdpMechanism mechanism = LdpMechanism::PurMech;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument on bad parameters
};

// Serialized form: {"kind","lambda","epsilon","mechanism","seed"} with kind
// in {"WET","Shuffle","Gaussian","LDP"} and mechanism in {"PurMech","LapMech"}.
nlohmann::json defense_spec_to_json(const DefenseSpec& spec);
DefenseSpec defense_spec_from_json(const nlohmann::json& j);

// Full-rank, well-conditioned circulant transform used by the WET defense.
struct WetTransform {
  Matrix t;                        // dim x dim circulant
  double condition_estimate = 0.0; // sigma_max / sigma_min
};

// Builds a circulant matrix from a seeded random first row, regenerating
// until it is full rank at rcond 1e-10 with condition <= 1e6. Throws
// std::runtime_error when no admissible matrix is found after 64 attempts.
WetTransform wet_generate(std::size_t dim, std::uint64_t seed);

// T e / ||T e||. Throws std::invalid_argument when T e vanishes.
Vector wet_apply(const WetTransform& t, const Vector& e);

// Seeded coordinate permutation; one seed yields one permutation, applied
// identically to every vector of a defended dataset.
std::vector<std::size_t> shuffle_permutation(std::size_t dim, std::uint64_t seed);
Vector shuffle_apply(const Vector& e, std::uint64_t seed);

// (e + lambda g) / ||e + lambda g|| with g drawn i.i.d. standard normal from
// the seeded stream. Resamples once on an exactly-zero sum, then throws.
Vector gaussian_apply(const Vector& e, double lambda, std::uint64_t seed);

// Metric-LDP mechanisms on the unit sphere. The input is L2-normalized
// before privatization and the output is unit norm.
//
// LapMech adds noise z with density proportional to exp(-epsilon ||z||):
// magnitude ~ Gamma(d, 1/epsilon), direction uniform on the sphere, then
// renormalizes. PurMech draws a direction at angle theta from the input with
// density proportional to exp(-epsilon theta) sin^(d-2)(theta) on [0, pi].
Vector ldp_apply(const Vector& e, LdpMechanism mechanism, double epsilon,
                 std::uint64_t seed);

// Applies one defense to every row of a victim embedding matrix. WET uses a
// single transform and Shuffle a single permutation for the whole dataset;
// the noise mechanisms derive per-row seeds as seed ^ row_index.
Matrix apply_defense(const Matrix& victim, const DefenseSpec& spec);

}  // namespace embinv
