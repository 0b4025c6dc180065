#pragma once

#include "ert/bots/bots.hpp"
#include "ert/engine/map_spec.hpp"
#include "ert/policy/model.hpp"
#include "ert/ppo/ppo.hpp"

#include <string>
#include <vector>

namespace ert::run {

struct RunConfig {
  std::string map = "basesWorkers8x8";
  unsigned seed = 0;
  std::string output_dir = "runs/default";
  std::string unit_stats_file;  // empty: built-in defaults

  policy::ModelConfig model;  // map dims and embedding filled by finalize()
  bool embedding_set = false;
  bool embedding = false;

  ppo::PpoConfig ppo;
  double learning_rate = 2.5e-4;
  double adam_eps = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;

  long total_steps = 100'000'000;
  int num_envs = 24;
  int steps_per_rollout = 256;
  int step_limit = 2000;
  int checkpoint_every = 50;  // updates
  bool strict_masking = true;
  bool eval_argmax = false;

  std::vector<bots::BotKind> opponents = {bots::BotKind::RandomBiased,
                                          bots::BotKind::WorkerRush,
                                          bots::BotKind::LightRush};

  // Resolves the map name, fills model dims, and applies the default
  // embedding rule (off on 8x8, on on 16x16) unless explicitly set.
  void finalize();

  nn::AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }

  static RunConfig load(const std::string& path);
  void apply(const std::string& key, const std::string& value);
};

// Accepts a bundled map name or a path to a map spec file.
engine::MapSpec resolve_map(const std::string& name_or_path);

}  // namespace ert::run
