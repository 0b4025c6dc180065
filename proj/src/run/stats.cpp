#include "ert/run/stats.hpp"

#include "ert/engine/replay.hpp"
#include "ert/run/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ert::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kRewardColumns[engine::kNumRewardKinds] = {
    "win", "loss", "draw", "harvest", "attack",
    "build_building", "build_worker", "build_combat"};

void count_replay_entities(const engine::Replay& replay, StatsResult& out) {
  engine::MapSpec spec = resolve_map(replay.map_name);
  engine::GridState state = engine::new_game(spec, replay.seed);
  for (const auto& rec : replay.records) {
    int e = state.unit_count(engine::PlayerId::P1) +
            state.unit_count(engine::PlayerId::P2) +
            state.unit_count(engine::PlayerId::Neutral);
    if (e >= static_cast<int>(out.entity_histogram.size()))
      out.entity_histogram.resize(e + 1, 0);
    ++out.entity_histogram[e];
    out.entity_max = std::max(out.entity_max, e);
    engine::StepResult res = engine::step(state, rec.a1, rec.a2);
    if (state.digest() != rec.digest)
      throw std::runtime_error("replay digest mismatch at tick " +
                               std::to_string(rec.tick));
    (void)res;
  }
}

}  // namespace

StatsResult summarize_run(const std::string& input_dir,
                          const std::string& out_dir, double ema_alpha) {
  StatsResult result;
  fs::create_directories(out_dir);

  std::ofstream returns(fs::path(out_dir) / "returns.csv");
  std::ofstream winrate(fs::path(out_dir) / "winrate.csv");
  returns << "update,global_step,episode_return_mean";
  for (const char* col : kRewardColumns) returns << ',' << col;
  returns << '\n';
  winrate << "update,global_step,episodes,wins,losses,draws,win_rate,win_rate_ema\n";

  std::ifstream metrics(fs::path(input_dir) / "metrics.jsonl");
  double ema = 0.0;
  bool ema_started = false;
  if (metrics) {
    std::string line;
    while (std::getline(metrics, line)) {
      if (line.empty()) continue;
      try {
        json rec = json::parse(line);
        long update = rec.at("update").get<long>();
        long step = rec.at("global_step").get<long>();
        returns << update << ',' << step << ','
                << rec.at("episode_return_mean").get<double>();
        const json& sums = rec.at("reward_sums");
        for (int k = 0; k < engine::kNumRewardKinds; ++k)
          returns << ','
                  << sums.at(engine::reward_kind_name(
                                 static_cast<engine::RewardKind>(k)))
                         .get<double>();
        returns << '\n';

        long wins = rec.at("wins").get<long>();
        long losses = rec.at("losses").get<long>();
        long draws = rec.at("draws").get<long>();
        long eps = rec.at("episodes").get<long>();
        double wr = eps > 0 ? static_cast<double>(wins) / eps : 0.0;
        if (eps > 0) {
          ema = ema_started ? ema_alpha * wr + (1.0 - ema_alpha) * ema : wr;
          ema_started = true;
        }
        winrate << update << ',' << step << ',' << eps << ',' << wins << ','
                << losses << ',' << draws << ',' << wr << ',' << ema << '\n';
        ++result.metrics_records;
      } catch (const std::exception&) {
        ++result.malformed_records;
      }
    }
  }

  if (fs::exists(input_dir))
    for (const auto& entry : fs::recursive_directory_iterator(input_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".replay")
        continue;
      try {
        engine::Replay replay = engine::Replay::load(entry.path().string());
        count_replay_entities(replay, result);
        ++result.replays;
      } catch (const std::exception&) {
        ++result.malformed_replays;
      }
    }

  long total = 0, weighted = 0;
  std::ofstream histogram(fs::path(out_dir) / "entity_histogram.csv");
  histogram << "entities,count\n";
  for (std::size_t e = 0; e < result.entity_histogram.size(); ++e) {
    histogram << e << ',' << result.entity_histogram[e] << '\n';
    total += result.entity_histogram[e];
    weighted += static_cast<long>(e) * result.entity_histogram[e];
  }
  if (total > 0) result.entity_mean = static_cast<double>(weighted) / total;
  return result;
}

}  // namespace ert::run
