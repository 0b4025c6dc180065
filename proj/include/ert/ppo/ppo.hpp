#pragma once

// PPO clipped-surrogate update over a full rollout buffer: minibatched
// multi-epoch optimization with value and entropy terms.

#include "ert/nn/adam.hpp"
#include "ert/policy/model.hpp"
#include "ert/ppo/buffer.hpp"

#include <random>
#include <vector>

namespace ert::ppo {

struct PpoConfig {
  double clip_eps = 0.1;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int epochs = 4;
  int minibatch_envs = 4;  // environment-trajectory slices per minibatch
  double gamma = 0.99;
  double lambda = 0.95;
  bool normalize_advantages = true;
  bool clip_value_loss = false;
  long max_steps = 100'000'000;
};

struct LossTerms {
  nn::Var total, policy, value, entropy;
};

// Mean clipped-surrogate loss over the given samples. Advantages are
// expected pre-normalized when normalization is on.
LossTerms ppo_loss(const std::vector<nn::Var>& new_log_probs,
                   const std::vector<double>& old_log_probs,
                   const std::vector<double>& advantages,
                   const std::vector<nn::Var>& new_values,
                   const std::vector<double>& return_targets,
                   const std::vector<nn::Var>& entropies, const PpoConfig& cfg);

struct UpdateStats {
  double total_loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  long samples = 0;
};

// Runs cfg.epochs passes of shuffled env-sliced minibatches over the full
// buffer. consumed_steps drives the linear learning-rate decay.
UpdateStats update(const RolloutBuffer& buffer, policy::PolicyModel& model,
                   nn::Adam& optimizer, const PpoConfig& cfg,
                   std::mt19937_64& rng, long consumed_steps);

}  // namespace ert::ppo
