#include "embinv/defense.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "embinv/rng.hpp"
#include "embinv/svd.hpp"

namespace embinv {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Vector gaussian_vector(PhiloxRng& rng, std::size_t dim) {
  Vector g(dim);
  for (std::size_t i = 0; i < dim; ++i) g[i] = rng.next_gaussian();
  return g;
}

// Unit direction orthogonal to `axis` (itself unit norm).
Vector orthogonal_direction(PhiloxRng& rng, const Vector& axis) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    Vector g = gaussian_vector(rng, axis.dim());
    const double proj = dot(g, axis);
    for (std::size_t i = 0; i < g.dim(); ++i) g[i] -= proj * axis[i];
    const double n = g.norm();
    if (n > 0.0) {
      for (double& x : g.data) x /= n;
      return g;
    }
  }
  throw std::runtime_error("ldp_apply: degenerate orthogonal direction");
}

// Inverse-CDF sampler for the Purkayastha angle density
//   f(theta) ~ exp(-eps * theta) * sin^(d-2)(theta),  theta in [0, pi].
// Tabulated in log space on a grid covering the mass-bearing interval, so it
// stays accurate both for diffuse (eps ~ 1) and sharply concentrated
// (eps ~ 1e6) regimes.
class PurkayasthaAngleSampler {
public:
  PurkayasthaAngleSampler(std::size_t dim, double epsilon) {
    const double d2 = static_cast<double>(dim) - 2.0;
    double hi = kPi;
    if (epsilon > 0.0) {
      const double mode = d2 > 0.0 ? std::atan2(d2, epsilon) : 0.0;
      const double width = d2 > 0.0 ? std::sin(mode) / std::sqrt(d2) : 0.0;
      hi = std::min(kPi, mode + 16.0 * width + 60.0 / epsilon);
    }
    grid_.resize(kPoints + 1);
    std::vector<double> logw(kPoints + 1);
    double max_log = -1e300;
    for (std::size_t i = 0; i <= kPoints; ++i) {
      const double theta = hi * static_cast<double>(i) / static_cast<double>(kPoints);
      grid_[i] = theta;
      const double s = std::sin(theta);
      double lw = -epsilon * theta;
      if (d2 != 0.0) lw += (s > 0.0) ? d2 * std::log(s) : -1e300;
      logw[i] = lw;
      max_log = std::max(max_log, lw);
    }
    cdf_.resize(kPoints + 1, 0.0);
    for (std::size_t i = 1; i <= kPoints; ++i) {
      const double w0 = std::exp(logw[i - 1] - max_log);
      const double w1 = std::exp(logw[i] - max_log);
      cdf_[i] = cdf_[i - 1] + 0.5 * (w0 + w1) * (grid_[i] - grid_[i - 1]);
    }
  }

  double sample(double u) const {
    const double target = u * cdf_.back();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), target);
    if (it == cdf_.begin()) return grid_.front();
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    if (i > kPoints) return grid_.back();
    const double c0 = cdf_[i - 1], c1 = cdf_[i];
    const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
    return grid_[i - 1] + frac * (grid_[i] - grid_[i - 1]);
  }

private:
  static constexpr std::size_t kPoints = 16384;
  static constexpr double kPi = 3.14159265358979323846;
  std::vector<double> grid_;
  std::vector<double> cdf_;
};

Vector purkayastha_sample(const Vector& unit_e, double epsilon, PhiloxRng& rng) {
  const std::size_t d = unit_e.dim();
  if (d == 1) {
    // S^0: keep or flip the sign; flip odds follow the angle weights at 0 and pi.
    const double p_flip = std::exp(-epsilon * 3.14159265358979323846);
    const double u = rng.next_double();
    Vector out = unit_e;
    if (u < p_flip / (1.0 + p_flip)) out[0] = -out[0];
    return out;
  }
  const PurkayasthaAngleSampler sampler(d, epsilon);
  const double theta = sampler.sample(rng.next_double());
  const Vector perp = orthogonal_direction(rng, unit_e);
  Vector out(d);
  const double c = std::cos(theta), s = std::sin(theta);
  for (std::size_t i = 0; i < d; ++i) out[i] = c * unit_e[i] + s * perp[i];
  return out;
}

Vector planar_laplace_sample(const Vector& unit_e, double epsilon, PhiloxRng& rng) {
  const std::size_t d = unit_e.dim();
  for (int attempt = 0; attempt < 2; ++attempt) {
    // ||z|| ~ Gamma(d, 1/epsilon) as a sum of d exponentials; direction uniform.
    double radius = 0.0;
    for (std::size_t i = 0; i < d; ++i) radius += -std::log(rng.next_double_open()) / epsilon;
    Vector dir = gaussian_vector(rng, d);
    const double n = dir.norm();
    if (n == 0.0) continue;
    Vector out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = unit_e[i] + radius * dir[i] / n;
    const double on = out.norm();
    if (on == 0.0) continue;
    for (double& x : out.data) x /= on;
    return out;
  }
  throw std::runtime_error("ldp_apply: degenerate noise draw");
}

}  // namespace

void DefenseSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("defense: lambda must be finite and >= 0");
  }
  if (kind == DefenseKind::Ldp && (!(epsilon > 0.0) || !std::isfinite(epsilon))) {
    throw std::invalid_argument("defense: epsilon must be finite and > 0 for LDP");
  }
}

nlohmann::json defense_spec_to_json(const DefenseSpec& spec) {
  const char* kind = nullptr;
  switch (spec.kind) {
    case DefenseKind::Wet: kind = "WET"; break;
    case DefenseKind::Shuffle: kind = "Shuffle"; break;
    case DefenseKind::Gaussian: kind = "Gaussian"; break;
    case DefenseKind::Ldp: kind = "LDP"; break;
  }
  return nlohmann::json{
      {"kind", kind},
      {"lambda", spec.lambda},
      {"epsilon", spec.epsilon},
      {"mechanism", spec.mechanism == LdpMechanism::PurMech ? "PurMech" : "LapMech"},
      {"seed", spec.seed},
  };
}

DefenseSpec defense_spec_from_json(const nlohmann::json& j) {
  DefenseSpec spec;
  const std::string kind = to_lower(j.at("kind").get<std::string>());
  if (kind == "wet") {
    spec.kind = DefenseKind::Wet;
  } else if (kind == "shuffle") {
    spec.kind = DefenseKind::Shuffle;
  } else if (kind == "gaussian") {
    spec.kind = DefenseKind::Gaussian;
  } else if (kind == "ldp") {
    spec.kind = DefenseKind::Ldp;
  } else {
    throw std::invalid_argument("defense: unknown kind '" + j.at("kind").get<std::string>() + "'");
  }
  spec.lambda = j.value("lambda", 0.0);
  spec.epsilon = j.value("epsilon", 0.0);
  if (j.contains("mechanism") && !j.at("mechanism").get<std::string>().empty()) {
    const std::string mech = to_lower(j.at("mechanism").get<std::string>());
    if (mech == "purmech") {
      spec.mechanism = LdpMechanism::PurMech;
    } else if (mech == "lapmech") {
      spec.mechanism = LdpMechanism::LapMech;
    } else {
      throw std::invalid_argument("defense: unknown mechanism '" +
                                  j.at("mechanism").get<std::string>() + "'");
    }
  }
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.validate();
  return spec;
}

WetTransform wet_generate(std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("wet_generate: dim must be >= 1");
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    PhiloxRng rng(seed, attempt);
    std::vector<double> first_row(dim);
    for (double& x : first_row) x = rng.next_gaussian();

    Matrix t(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) t(i, j) = first_row[(j + dim - i) % dim];
    }

    const SvdFactors f = svd(t);
    const double sigma_max = f.singular_values.front();
    const double sigma_min = f.singular_values.back();
    if (sigma_max <= 0.0 || sigma_min <= 1e-10 * sigma_max) continue;
    const double cond = sigma_max / sigma_min;
    if (cond > 1e6) continue;
    return WetTransform{std::move(t), cond};
  }
  throw std::runtime_error("wet_generate: no admissible transform after 64 attempts");
}

Vector wet_apply(const WetTransform& t, const Vector& e) {
  if (t.t.cols != e.dim()) throw std::invalid_argument("wet_apply: dimension mismatch");
  Vector out(t.t.rows);
  for (std::size_t i = 0; i < t.t.rows; ++i) out[i] = dot(t.t.row(i), std::span<const double>(e.data));
  const double n = out.norm();
  if (n == 0.0) throw std::invalid_argument("wet_apply: transformed vector is zero");
  for (double& x : out.data) x /= n;
  return out;
}

std::vector<std::size_t> shuffle_permutation(std::size_t dim, std::uint64_t seed) {
  std::vector<std::size_t> perm(dim);
  for (std::size_t i = 0; i < dim; ++i) perm[i] = i;
  PhiloxRng rng(seed);
  for (std::size_t i = dim; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

Vector shuffle_apply(const Vector& e, std::uint64_t seed) {
  if (e.dim() < 1) throw std::invalid_argument("shuffle_apply: empty vector");
  const auto perm = shuffle_permutation(e.dim(), seed);
  Vector out(e.dim());
  for (std::size_t j = 0; j < e.dim(); ++j) out[j] = e[perm[j]];
  return out;
}

Vector gaussian_apply(const Vector& e, double lambda, std::uint64_t seed) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("gaussian_apply: lambda must be >= 0");
  if (e.norm() == 0.0) throw std::invalid_argument("gaussian_apply: zero input vector");
  if (lambda == 0.0) return l2_normalize(e);

  PhiloxRng rng(seed);
  for (int attempt = 0; attempt < 2; ++attempt) {
    Vector out(e.dim());
    for (std::size_t i = 0; i < e.dim(); ++i) out[i] = e[i] + lambda * rng.next_gaussian();
    const double n = out.norm();
    if (n == 0.0) continue;  // measure-zero; one resample allowed
    for (double& x : out.data) x /= n;
    return out;
  }
  throw std::runtime_error("gaussian_apply: noised vector vanished twice");
}

Vector ldp_apply(const Vector& e, LdpMechanism mechanism, double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("ldp_apply: epsilon must be finite and > 0");
  }
  const Vector unit = l2_normalize(e);
  PhiloxRng rng(seed);
  if (mechanism == LdpMechanism::LapMech) return planar_laplace_sample(unit, epsilon, rng);
  return purkayastha_sample(unit, epsilon, rng);
}

Matrix apply_defense(const Matrix& victim, const DefenseSpec& spec) {
  spec.validate();
  Matrix out(victim.rows, victim.cols);
  switch (spec.kind) {
    case DefenseKind::Wet: {
      const WetTransform t = wet_generate(victim.cols, spec.seed);
      for (std::size_t i = 0; i < victim.rows; ++i) {
        out.set_row(i, wet_apply(t, victim.row_vector(i)));
      }
      break;
    }
    case DefenseKind::Shuffle: {
      const auto perm = shuffle_permutation(victim.cols, spec.seed);
      for (std::size_t i = 0; i < victim.rows; ++i) {
        for (std::size_t j = 0; j < victim.cols; ++j) out(i, j) = victim(i, perm[j]);
      }
      break;
    }
    case DefenseKind::Gaussian: {
      for (std::size_t i = 0; i < victim.rows; ++i) {
        out.set_row(i, gaussian_apply(victim.row_vector(i), spec.lambda,
                                      spec.seed ^ static_cast<std::uint64_t>(i)));
      }
      break;
    }
    case DefenseKind::Ldp: {
      for (std::size_t i = 0; i < victim.rows; ++i) {
        out.set_row(i, ldp_apply(victim.row_vector(i), spec.mechanism, spec.epsilon,
                                 spec.seed ^ static_cast<std::uint64_t>(i)));
      }
      break;
    }
  }
  return out;
}

}  // namespace embinv
