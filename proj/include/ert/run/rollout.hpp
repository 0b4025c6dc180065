#pragma once

// Vectorized experience collection: a bank of independent games stepped in
// lockstep, the agent playing P1 against a cycling pool of scripted bots.

#include "ert/bots/bots.hpp"
#include "ert/engine/grid_state.hpp"
#include "ert/policy/model.hpp"
#include "ert/ppo/buffer.hpp"
#include "ert/run/config.hpp"

#include <array>
#include <random>
#include <vector>

namespace ert::run {

struct EnvInstance {
  engine::GridState state;
  bots::BotKind opponent;
  std::mt19937_64 bot_rng;
  double episode_return = 0.0;
  long episode_length = 0;
};

struct EpisodeStat {
  double episode_return = 0.0;
  long length = 0;
  engine::TerminalStatus terminal = engine::TerminalStatus::Ongoing;
  bots::BotKind opponent;
};

struct RolloutStats {
  std::vector<EpisodeStat> episodes;
  std::array<double, engine::kNumRewardKinds> reward_sums{};  // P1, by category
  long steps = 0;
  int entity_min = 0, entity_max = 0;
  double entity_mean = 0.0;  // entities seen per decision point
};

// Maps sampled per-unit choices back to engine commands via each unit's
// grid position at decision time.
engine::JointAction to_joint_action(const engine::GridState& state,
                                    const std::vector<policy::UnitChoice>& choices,
                                    const std::vector<int>& positions);

class VecEnv {
 public:
  VecEnv(const RunConfig& cfg, const engine::MapSpec& spec,
         const engine::UnitStatsTable& stats);

  // Fills the buffer with num_envs x num_steps transitions plus bootstrap
  // values. Sampling and dropout draw from policy_rng; dropout is off
  // during collection.
  RolloutStats collect(const policy::PolicyModel& model,
                       ppo::RolloutBuffer& buffer, std::mt19937_64& policy_rng);

  const std::vector<EnvInstance>& envs() const { return envs_; }

 private:
  RunConfig cfg_;
  engine::MapSpec spec_;
  engine::UnitStatsTable stats_;
  std::vector<EnvInstance> envs_;

  void reset_env(EnvInstance& env);
};

}  // namespace ert::run
