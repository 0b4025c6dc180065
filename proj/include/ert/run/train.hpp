#pragma once

// Training driver: alternating rollout collection and PPO updates, with an
// append-only metrics stream and periodic checkpoints under the run's
// output directory.

#include "ert/nn/adam.hpp"
#include "ert/run/config.hpp"
#include "ert/run/rollout.hpp"

#include <functional>
#include <memory>
#include <string>

namespace ert::run {

struct UpdateRecord {
  long update = 0;       // 1-based update index
  long global_step = 0;  // env steps consumed after this update
  double lr = 0.0;
  ppo::UpdateStats ppo;
  RolloutStats rollout;
  double seconds = 0.0;  // wall time for rollout + update
};

struct TrainResult {
  long global_step = 0;
  long updates = 0;
  std::string last_checkpoint;
};

class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg);

  // Restores parameters, optimizer moments, and the global step counter.
  void resume(const std::string& checkpoint_path);

  // Runs until total_steps are consumed. The callback (optional) fires
  // after every update with the same record written to metrics.jsonl.
  TrainResult run(const std::function<void(const UpdateRecord&)>& on_update = {});

  policy::PolicyModel& model() { return *model_; }
  nn::Adam& optimizer() { return *optimizer_; }
  long global_step() const { return global_step_; }
  long update_index() const { return update_index_; }
  const RunConfig& config() const { return cfg_; }

  std::string checkpoint_path(long update) const;
  std::string latest_checkpoint_path() const;

 private:
  RunConfig cfg_;
  engine::MapSpec spec_;
  engine::UnitStatsTable stats_;
  std::unique_ptr<policy::PolicyModel> model_;
  std::unique_ptr<nn::Adam> optimizer_;
  std::unique_ptr<VecEnv> envs_;
  std::mt19937_64 policy_rng_, update_rng_;
  long global_step_ = 0;
  long update_index_ = 0;

  void save(const std::string& path) const;
  void reseed();
};

}  // namespace ert::run
