#pragma once

// Evaluation games: the trained policy (always P1) against one scripted
// opponent, with optional replay recording and entity-count accounting.

#include "ert/bots/bots.hpp"
#include "ert/engine/replay.hpp"
#include "ert/policy/model.hpp"
#include "ert/run/config.hpp"

#include <random>
#include <string>
#include <vector>

namespace ert::run {

struct PlayedGame {
  engine::Replay replay;
  engine::TerminalStatus terminal = engine::TerminalStatus::Ongoing;
  double p1_return = 0.0;
  long length = 0;
  std::vector<int> entity_counts;  // entities per decision point
};

// One policy-vs-bot game. argmax switches per-component greedy selection
// in place of sampling.
PlayedGame play_policy_game(const policy::PolicyModel& model,
                            const engine::MapSpec& spec,
                            const engine::UnitStatsTable& stats,
                            bots::BotKind opponent, int step_limit,
                            std::mt19937_64& policy_rng,
                            std::mt19937_64& bot_rng, bool argmax);

// One bot-vs-bot game (used by the play subcommand).
PlayedGame play_bot_game(const engine::MapSpec& spec,
                         const engine::UnitStatsTable& stats, bots::BotKind p1,
                         bots::BotKind p2, int step_limit,
                         std::mt19937_64& rng1, std::mt19937_64& rng2);

struct EvalReport {
  bots::BotKind opponent;
  int games = 0, wins = 0, ties = 0, losses = 0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  std::vector<long> entity_histogram;  // index = entity count
  int entity_max = 0;
  double entity_mean = 0.0;
  std::vector<std::string> replay_paths;

  double win_rate() const { return games > 0 ? static_cast<double>(wins) / games : 0.0; }
};

// Plays `games` evaluation games against the opponent. When replay_dir is
// non-empty, each game is saved there as <opponent>_game_<i>.replay.
EvalReport evaluate(const policy::PolicyModel& model, const RunConfig& cfg,
                    bots::BotKind opponent, int games, unsigned seed,
                    const std::string& replay_dir);

}  // namespace ert::run
