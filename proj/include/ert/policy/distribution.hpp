#pragma once

// Per-unit factorized action distribution over the 78-logit decomposition.
// Masked entries carry probability exactly zero; a fully masked parameter
// group degenerates to index 0 and contributes nothing to log-prob or
// entropy.

#include "ert/engine/types.hpp"
#include "ert/nn/autodiff.hpp"

#include <array>
#include <random>
#include <vector>

namespace ert::policy {

inline constexpr double kMaskPenalty = -1e8;

struct FactoredDistribution {
  int num_units = 0;
  std::vector<int> positions;  // grid index per unit row
  // Masked log-softmax per component, each num_units x width.
  std::array<nn::Var, engine::kNumComponents> component_log_probs;
  // valid[c][i]: component c of unit i has at least one legal entry.
  std::array<std::vector<std::uint8_t>, engine::kNumComponents> valid;
};

struct UnitChoice {
  std::array<int, engine::kNumComponents> component{};  // index per component
  engine::SubAction to_sub_action() const;
  static UnitChoice from_sub_action(const engine::SubAction& a);
};

struct SampleResult {
  std::vector<UnitChoice> choices;
  double log_prob = 0.0;
  double entropy = 0.0;
};

// Adds 0 / kMaskPenalty to the k x 78 logits according to the legality
// mask rows at each unit's position.
nn::Var mask_logits(nn::Var logits, const engine::LegalityMask& mask,
                    const std::vector<int>& positions);

FactoredDistribution make_distribution(nn::Var masked_logits,
                                       const engine::LegalityMask& mask,
                                       const std::vector<int>& positions);

SampleResult sample_joint(const FactoredDistribution& dist, std::mt19937_64& rng);

// Differentiable factorized log probability. Throws std::domain_error when
// the action selects a zero-probability entry (mask/rollout mismatch).
nn::Var log_prob_of(const FactoredDistribution& dist,
                    const std::vector<UnitChoice>& choices);

nn::Var entropy_of(const FactoredDistribution& dist);

}  // namespace ert::policy
