#pragma once

#include "ert/engine/types.hpp"
#include "ert/policy/distribution.hpp"

#include <vector>

namespace ert::ppo {

// One collected environment transition, stored with everything needed to
// recompute the policy forward pass during the update.
struct StepRecord {
  engine::ObservationTensor obs;
  engine::LegalityMask mask;
  std::vector<policy::UnitChoice> choices;  // sampled action per own unit
  double log_prob = 0.0;  // behavior log-prob at collection time
  double value = 0.0;     // behavior value estimate
  double reward = 0.0;    // shaped sum of event values
  bool done = false;      // the state after this step is a fresh reset
};

// Fixed-capacity num_envs x num_steps store, env-major.
struct RolloutBuffer {
  int num_envs = 0, num_steps = 0;
  std::vector<StepRecord> slots;
  std::vector<double> bootstrap_values;  // V(s_T) per env

  RolloutBuffer() = default;
  RolloutBuffer(int envs, int steps)
      : num_envs(envs), num_steps(steps),
        slots(static_cast<std::size_t>(envs) * steps),
        bootstrap_values(envs, 0.0) {}

  StepRecord& at(int env, int t) { return slots[env * num_steps + t]; }
  const StepRecord& at(int env, int t) const { return slots[env * num_steps + t]; }
  int size() const { return num_envs * num_steps; }
};

struct AdvantageSet {
  // Env-major, same indexing as RolloutBuffer::slots.
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + V(s_t)
};

// Standard recursive GAE with episode isolation at done flags.
AdvantageSet compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

}  // namespace ert::ppo
