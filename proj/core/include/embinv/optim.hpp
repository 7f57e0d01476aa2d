#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace embinv {

// Adaptive-moment optimizer with decoupled weight decay. One instance per
// parameter tensor; step() consumes the gradient for that tensor.
class AdamW {
public:
  struct Config {
    double lr = 1e-4;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  AdamW(std::size_t size, const Config& config)
      : config_(config), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double m_hat = m_[i] / bc1;
      const double v_hat = v_[i] / bc2;
      params[i] -= config_.lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                                 config_.weight_decay * params[i]);
    }
  }

private:
  Config config_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace embinv
