#include "ert/run/train.hpp"

#include "ert/nn/checkpoint.hpp"
#include "ert/ppo/ppo.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ert::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json model_config_json(const RunConfig& cfg) {
  return json{{"map", cfg.map},
              {"map_h", cfg.model.map_h},
              {"map_w", cfg.model.map_w},
              {"embedding", cfg.model.embedding},
              {"embed_dim", cfg.model.embed_dim},
              {"layers", cfg.model.layers},
              {"heads", cfg.model.heads},
              {"ff_dim", cfg.model.ff_dim},
              {"dropout", cfg.model.dropout}};
}

}  // namespace

Trainer::Trainer(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.finalize();
  spec_ = resolve_map(cfg_.map);
  stats_ = cfg_.unit_stats_file.empty()
               ? engine::UnitStatsTable::defaults()
               : engine::UnitStatsTable::from_file(cfg_.unit_stats_file);
  model_ = std::make_unique<policy::PolicyModel>(cfg_.model, cfg_.seed);
  optimizer_ = std::make_unique<nn::Adam>(
      model_->params().all(), cfg_.adam(),
      nn::LinearDecay{static_cast<double>(cfg_.total_steps)});
  envs_ = std::make_unique<VecEnv>(cfg_, spec_, stats_);
  reseed();
}

void Trainer::reseed() {
  // Streams depend on the configured seed and the resume point, so a fresh
  // run and a resumed run never replay identical random sequences.
  policy_rng_.seed(cfg_.seed * 0x9e3779b97f4a7c15ull + 0x1234u +
                   static_cast<unsigned long long>(update_index_));
  update_rng_.seed(cfg_.seed * 0xbf58476d1ce4e5b9ull + 0x5678u +
                   static_cast<unsigned long long>(update_index_));
}

std::string Trainer::checkpoint_path(long update) const {
  char name[64];
  std::snprintf(name, sizeof(name), "update_%06ld.ckpt", update);
  return (fs::path(cfg_.output_dir) / "checkpoints" / name).string();
}

std::string Trainer::latest_checkpoint_path() const {
  return (fs::path(cfg_.output_dir) / "checkpoints" / "latest.ckpt").string();
}

void Trainer::save(const std::string& path) const {
  fs::create_directories(fs::path(path).parent_path());
  json cfg = model_config_json(cfg_);
  cfg["update_index"] = update_index_;
  cfg["total_steps"] = cfg_.total_steps;
  nn::save_checkpoint(path, cfg, global_step_, model_->params(), optimizer_.get());
}

void Trainer::resume(const std::string& checkpoint_path) {
  json header = nn::read_checkpoint_header(checkpoint_path);
  const json& cfg = header.at("config");
  json expected = model_config_json(cfg_);
  for (auto& [key, value] : expected.items())
    if (cfg.at(key) != value)
      throw std::runtime_error("resume: checkpoint config mismatch on '" + key +
                               "'");
  global_step_ = nn::load_checkpoint(checkpoint_path, model_->params(),
                                     optimizer_.get());
  update_index_ = cfg.at("update_index").get<long>();
  reseed();
}

TrainResult Trainer::run(const std::function<void(const UpdateRecord&)>& on_update) {
  fs::create_directories(cfg_.output_dir);
  std::ofstream metrics(fs::path(cfg_.output_dir) / "metrics.jsonl",
                        std::ios::app);
  if (!metrics)
    throw std::runtime_error("cannot open metrics stream in " + cfg_.output_dir);

  long steps_per_update =
      static_cast<long>(cfg_.num_envs) * cfg_.steps_per_rollout;
  ppo::RolloutBuffer buffer(cfg_.num_envs, cfg_.steps_per_rollout);
  TrainResult result;

  while (global_step_ < cfg_.total_steps) {
    auto start = std::chrono::steady_clock::now();
    RolloutStats rollout = envs_->collect(*model_, buffer, policy_rng_);
    global_step_ += steps_per_update;
    ppo::UpdateStats stats = ppo::update(buffer, *model_, *optimizer_, cfg_.ppo,
                                         update_rng_, global_step_);
    ++update_index_;
    double seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();

    UpdateRecord rec;
    rec.update = update_index_;
    rec.global_step = global_step_;
    rec.lr = optimizer_->schedule().lr(optimizer_->config().alpha,
                                       static_cast<double>(global_step_));
    rec.ppo = stats;
    rec.rollout = rollout;
    rec.seconds = seconds;

    json reward_sums = json::object();
    for (int k = 0; k < engine::kNumRewardKinds; ++k)
      reward_sums[engine::reward_kind_name(static_cast<engine::RewardKind>(k))] =
          rollout.reward_sums[k];
    long wins = 0, losses = 0, draws = 0;
    double ret_sum = 0.0;
    long len_sum = 0;
    for (const auto& ep : rollout.episodes) {
      ret_sum += ep.episode_return;
      len_sum += ep.length;
      if (ep.terminal == engine::TerminalStatus::P1Win) ++wins;
      else if (ep.terminal == engine::TerminalStatus::P2Win) ++losses;
      else ++draws;
    }
    long n_eps = static_cast<long>(rollout.episodes.size());
    json line{{"update", rec.update},
              {"global_step", rec.global_step},
              {"lr", rec.lr},
              {"total_loss", stats.total_loss},
              {"policy_loss", stats.policy_loss},
              {"value_loss", stats.value_loss},
              {"entropy", stats.entropy},
              {"clip_fraction", stats.clip_fraction},
              {"approx_kl", stats.approx_kl},
              {"grad_norm", stats.grad_norm},
              {"episodes", n_eps},
              {"episode_return_mean", n_eps > 0 ? ret_sum / n_eps : 0.0},
              {"episode_length_mean",
               n_eps > 0 ? static_cast<double>(len_sum) / n_eps : 0.0},
              {"wins", wins},
              {"losses", losses},
              {"draws", draws},
              {"reward_sums", reward_sums},
              {"entity_min", rollout.entity_min},
              {"entity_mean", rollout.entity_mean},
              {"entity_max", rollout.entity_max},
              {"steps_per_second",
               seconds > 0 ? steps_per_update / seconds : 0.0},
              {"seconds", seconds}};
    metrics << line.dump() << "\n";
    metrics.flush();

    if (on_update) on_update(rec);

    if (cfg_.checkpoint_every > 0 && update_index_ % cfg_.checkpoint_every == 0) {
      save(checkpoint_path(update_index_));
      save(latest_checkpoint_path());
      result.last_checkpoint = checkpoint_path(update_index_);
    }
  }

  save(latest_checkpoint_path());
  if (result.last_checkpoint.empty())
    result.last_checkpoint = latest_checkpoint_path();
  result.global_step = global_step_;
  result.updates = update_index_;
  return result;
}

}  // namespace ert::run
