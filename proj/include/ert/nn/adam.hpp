#pragma once

// Adam with a linear learning-rate decay to zero over the configured
// training horizon.

#include "ert/nn/autodiff.hpp"

#include <cmath>
#include <vector>

namespace ert::nn {

struct AdamConfig {
  double alpha = 2.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;
};

struct LinearDecay {
  double max_steps = 1.0;  // denominator for progress
  double lr(double base_alpha, double consumed_steps) const {
    double progress = max_steps > 0 ? consumed_steps / max_steps : 1.0;
    if (progress > 1.0) progress = 1.0;
    return base_alpha * (1.0 - progress);
  }
};

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg, LinearDecay schedule)
      : params_(std::move(params)), cfg_(cfg), schedule_(schedule) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto* p : params_) {
      m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }

  // Consumes the gradients currently stored on the parameters.
  void step(double consumed_steps) {
    ++t_;
    double lr = schedule_.lr(cfg_.alpha, consumed_steps);
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const Mat& g = params_[i]->grad;
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
      Mat mhat = m_[i] / bc1;
      Mat vhat = v_[i] / bc2;
      params_[i]->value.array() -=
          lr * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
    }
  }

  long step_count() const { return t_; }
  void set_step_count(long t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }
  LinearDecay& schedule() { return schedule_; }

  std::vector<Mat>& first_moments() { return m_; }
  std::vector<Mat>& second_moments() { return v_; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  LinearDecay schedule_;
  std::vector<Mat> m_, v_;
  long t_ = 0;
};

}  // namespace ert::nn
