// Command-line front end: train, eval, play, stats.

#include "ert/nn/checkpoint.hpp"
#include "ert/run/evaluate.hpp"
#include "ert/run/stats.hpp"
#include "ert/run/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

namespace {

using nlohmann::json;

ert::policy::ModelConfig model_config_from_header(const json& cfg) {
  ert::policy::ModelConfig mc;
  mc.map_h = cfg.at("map_h").get<int>();
  mc.map_w = cfg.at("map_w").get<int>();
  mc.embedding = cfg.at("embedding").get<bool>();
  mc.embed_dim = cfg.at("embed_dim").get<int>();
  mc.layers = cfg.at("layers").get<int>();
  mc.heads = cfg.at("heads").get<int>();
  mc.ff_dim = cfg.at("ff_dim").get<int>();
  mc.dropout = cfg.at("dropout").get<double>();
  return mc;
}

int run_train(const std::string& config_path, int seed, long total_steps,
              const std::string& map, const std::string& output,
              const std::string& resume) {
  ert::run::RunConfig cfg =
      config_path.empty() ? ert::run::RunConfig{} : ert::run::RunConfig::load(config_path);
  if (seed >= 0) cfg.seed = static_cast<unsigned>(seed);
  if (total_steps > 0) cfg.total_steps = total_steps;
  if (!map.empty()) cfg.map = map;
  if (!output.empty()) cfg.output_dir = output;
  cfg.finalize();

  ert::run::Trainer trainer(cfg);
  if (!resume.empty()) trainer.resume(resume);
  std::printf("training on %s for %ld steps (%d envs x %d steps/update)\n",
              cfg.map.c_str(), cfg.total_steps, cfg.num_envs,
              cfg.steps_per_rollout);
  ert::run::TrainResult result = trainer.run([](const ert::run::UpdateRecord& rec) {
    long n = static_cast<long>(rec.rollout.episodes.size());
    double ret = 0.0;
    for (const auto& ep : rec.rollout.episodes) ret += ep.episode_return;
    std::printf(
        "update %ld step %ld loss %.4f entropy %.4f kl %.5f eps %ld ret %.2f "
        "(%.0f sps)\n",
        rec.update, rec.global_step, rec.ppo.total_loss, rec.ppo.entropy,
        rec.ppo.approx_kl, n, n > 0 ? ret / n : 0.0,
        rec.seconds > 0 ? rec.rollout.steps / rec.seconds : 0.0);
    std::fflush(stdout);
  });
  std::printf("done: %ld steps, %ld updates, checkpoint %s\n",
              result.global_step, result.updates,
              result.last_checkpoint.c_str());
  return 0;
}

void print_report(const ert::run::EvalReport& report) {
  std::printf(
      "vs %-13s  games %3d  W/T/L %d/%d/%d  win rate %.1f%%  mean return "
      "%.2f  mean length %.1f  entities mean %.1f max %d\n",
      ert::bots::bot_name(report.opponent).c_str(), report.games, report.wins,
      report.ties, report.losses, 100.0 * report.win_rate(),
      report.mean_return, report.mean_length, report.entity_mean,
      report.entity_max);
}

int run_eval(const std::string& checkpoint, const std::string& opponent,
             int games, int seed, bool argmax, const std::string& replay_dir) {
  json header = ert::nn::read_checkpoint_header(checkpoint);
  const json& hcfg = header.at("config");

  ert::run::RunConfig cfg;
  cfg.map = hcfg.at("map").get<std::string>();
  cfg.model = model_config_from_header(hcfg);
  cfg.eval_argmax = argmax;

  ert::policy::PolicyModel model(cfg.model, 0);
  ert::nn::load_checkpoint(checkpoint, model.params(), nullptr);

  std::vector<ert::bots::BotKind> pool;
  if (opponent == "all")
    pool = {ert::bots::BotKind::RandomBiased, ert::bots::BotKind::WorkerRush,
            ert::bots::BotKind::LightRush};
  else
    pool = {ert::bots::bot_kind_from_name(opponent)};

  for (ert::bots::BotKind kind : pool) {
    ert::run::EvalReport report = ert::run::evaluate(
        model, cfg, kind, games, static_cast<unsigned>(seed), replay_dir);
    print_report(report);
  }
  return 0;
}

int run_play(const std::string& p1, const std::string& p2,
             const std::string& map, int games, int seed,
             const std::string& record_dir) {
  ert::engine::MapSpec spec = ert::run::resolve_map(map);
  ert::engine::UnitStatsTable stats = ert::engine::UnitStatsTable::defaults();
  ert::bots::BotKind k1 = ert::bots::bot_kind_from_name(p1);
  ert::bots::BotKind k2 = ert::bots::bot_kind_from_name(p2);
  std::mt19937_64 rng1(static_cast<unsigned>(seed) * 2654435761u + 1u);
  std::mt19937_64 rng2(static_cast<unsigned>(seed) * 2654435761u + 2u);
  if (!record_dir.empty()) std::filesystem::create_directories(record_dir);

  int wins1 = 0, wins2 = 0, draws = 0;
  for (int g = 0; g < games; ++g) {
    ert::run::PlayedGame game =
        ert::run::play_bot_game(spec, stats, k1, k2, 2000, rng1, rng2);
    if (game.terminal == ert::engine::TerminalStatus::P1Win) ++wins1;
    else if (game.terminal == ert::engine::TerminalStatus::P2Win) ++wins2;
    else ++draws;
    if (!record_dir.empty()) {
      std::string path = (std::filesystem::path(record_dir) /
                          ("game_" + std::to_string(g) + ".replay"))
                             .string();
      game.replay.save(path);
    }
  }
  std::printf("%s vs %s on %s: %d games, P1 %d / draw %d / P2 %d\n", p1.c_str(),
              p2.c_str(), spec.name.c_str(), games, wins1, draws, wins2);
  return 0;
}

int run_stats(const std::string& input, const std::string& out) {
  ert::run::StatsResult result = ert::run::summarize_run(input, out);
  std::printf(
      "metrics records %ld (skipped %ld), replays %ld (skipped %ld), "
      "entities mean %.1f max %d\n",
      result.metrics_records, result.malformed_records, result.replays,
      result.malformed_replays, result.entity_mean, result.entity_max);
  std::printf("wrote returns.csv, winrate.csv, entity_histogram.csv to %s\n",
              out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity-transformer RTS agent"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train a policy with PPO");
  std::string config_path, map, output, resume;
  int seed = -1;
  long total_steps = 0;
  train->add_option("--config", config_path, "Run config file");
  train->add_option("--seed", seed, "Override the run seed");
  train->add_option("--total-steps", total_steps, "Override total env steps");
  train->add_option("--map", map, "Map name or map spec path");
  train->add_option("--output", output, "Output directory");
  train->add_option("--resume", resume, "Checkpoint to resume from");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string checkpoint, opponent = "all", replay_dir;
  int games = 50, eval_seed = 0;
  bool argmax = false;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--opponent", opponent, "Opponent bot name, or 'all'");
  eval->add_option("--games", games, "Games per opponent");
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_flag("--argmax", argmax, "Greedy action selection");
  eval->add_option("--replays", replay_dir, "Directory for replay files");

  auto* play = app.add_subcommand("play", "Scripted bot vs scripted bot");
  std::string p1 = "worker-rush", p2 = "random-biased", play_map = "basesWorkers8x8",
              record_dir;
  int play_games = 1, play_seed = 0;
  play->add_option("--p1", p1, "P1 bot name");
  play->add_option("--p2", p2, "P2 bot name");
  play->add_option("--map", play_map, "Map name or map spec path");
  play->add_option("--games", play_games, "Number of games");
  play->add_option("--seed", play_seed, "Bot seed");
  play->add_option("--record", record_dir, "Directory for replay files");

  auto* stats = app.add_subcommand("stats", "Summarize a run directory");
  std::string input_dir, out_dir = "stats";
  stats->add_option("--input", input_dir, "Run directory")->required();
  stats->add_option("--out", out_dir, "Output directory for CSV files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train))
      return run_train(config_path, seed, total_steps, map, output, resume);
    if (app.got_subcommand(eval))
      return run_eval(checkpoint, opponent, games, eval_seed, argmax, replay_dir);
    if (app.got_subcommand(play))
      return run_play(p1, p2, play_map, play_games, play_seed, record_dir);
    if (app.got_subcommand(stats)) return run_stats(input_dir, out_dir);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
