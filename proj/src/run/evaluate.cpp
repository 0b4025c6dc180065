#include "ert/run/evaluate.hpp"

#include "ert/run/rollout.hpp"

#include <algorithm>
#include <filesystem>

namespace ert::run {

namespace {

std::vector<policy::UnitChoice> argmax_choices(const policy::FactoredDistribution& dist) {
  std::vector<policy::UnitChoice> choices(dist.num_units);
  for (int i = 0; i < dist.num_units; ++i) {
    for (int c = 0; c < engine::kNumComponents; ++c) {
      if (!dist.valid[c][i]) continue;  // degenerate group stays at index 0
      const nn::Mat& ls = dist.component_log_probs[c].value();
      Eigen::Index best;
      ls.row(i).maxCoeff(&best);
      choices[i].component[c] = static_cast<int>(best);
    }
  }
  return choices;
}

void finish_step(PlayedGame& game, engine::GridState& state,
                 const engine::JointAction& a1, const engine::JointAction& a2,
                 const engine::StepResult& res) {
  engine::ReplayRecord rec;
  rec.tick = state.tick;  // tick after the step; records are 1-based
  rec.a1 = a1;
  rec.a2 = a2;
  rec.events_p1 = res.events[0];
  rec.events_p2 = res.events[1];
  rec.digest = state.digest();
  game.replay.records.push_back(std::move(rec));
  for (const auto& ev : res.events[0]) game.p1_return += ev.value;
  game.length += 1;
  game.terminal = res.terminal;
}

}  // namespace

PlayedGame play_policy_game(const policy::PolicyModel& model,
                            const engine::MapSpec& spec,
                            const engine::UnitStatsTable& stats,
                            bots::BotKind opponent, int step_limit,
                            std::mt19937_64& policy_rng,
                            std::mt19937_64& bot_rng, bool argmax) {
  PlayedGame game;
  game.replay.map_name = spec.name;
  game.replay.step_limit = step_limit;
  engine::GridState state = engine::new_game(spec, stats, 0);
  state.step_limit = step_limit;
  nn::Tape tape;

  while (true) {
    engine::ObservationTensor obs = engine::observe(state, engine::PlayerId::P1);
    engine::LegalityMask mask = engine::legality_mask(state, engine::PlayerId::P1);
    policy::EntityLayout layout = policy::extract_entities(obs);
    game.entity_counts.push_back(layout.e());

    tape.reset();
    auto fwd = model.forward(tape, layout, mask, policy_rng, false);
    engine::JointAction a1;
    if (fwd.has_actor) {
      std::vector<policy::UnitChoice> choices =
          argmax ? argmax_choices(fwd.dist)
                 : policy::sample_joint(fwd.dist, policy_rng).choices;
      a1 = to_joint_action(state, choices, fwd.dist.positions);
    }
    engine::JointAction a2 =
        bots::act(opponent, state, engine::PlayerId::P2, bot_rng);

    engine::StepResult res = engine::step(state, a1, a2);
    finish_step(game, state, a1, a2, res);
    if (res.terminal != engine::TerminalStatus::Ongoing) break;
  }
  game.replay.terminal = game.terminal;
  return game;
}

PlayedGame play_bot_game(const engine::MapSpec& spec,
                         const engine::UnitStatsTable& stats, bots::BotKind p1,
                         bots::BotKind p2, int step_limit,
                         std::mt19937_64& rng1, std::mt19937_64& rng2) {
  PlayedGame game;
  game.replay.map_name = spec.name;
  game.replay.step_limit = step_limit;
  engine::GridState state = engine::new_game(spec, stats, 0);
  state.step_limit = step_limit;
  while (true) {
    game.entity_counts.push_back(state.unit_count(engine::PlayerId::P1) +
                                 state.unit_count(engine::PlayerId::P2) +
                                 state.unit_count(engine::PlayerId::Neutral));
    engine::JointAction a1 = bots::act(p1, state, engine::PlayerId::P1, rng1);
    engine::JointAction a2 = bots::act(p2, state, engine::PlayerId::P2, rng2);
    engine::StepResult res = engine::step(state, a1, a2);
    finish_step(game, state, a1, a2, res);
    if (res.terminal != engine::TerminalStatus::Ongoing) break;
  }
  game.replay.terminal = game.terminal;
  return game;
}

EvalReport evaluate(const policy::PolicyModel& model, const RunConfig& cfg,
                    bots::BotKind opponent, int games, unsigned seed,
                    const std::string& replay_dir) {
  engine::MapSpec spec = resolve_map(cfg.map);
  engine::UnitStatsTable stats =
      cfg.unit_stats_file.empty() ? engine::UnitStatsTable::defaults()
                                  : engine::UnitStatsTable::from_file(cfg.unit_stats_file);

  EvalReport report;
  report.opponent = opponent;
  report.games = games;
  std::mt19937_64 policy_rng(seed * 0x9e3779b97f4a7c15ull + 0xe7a1u);
  std::mt19937_64 bot_rng(seed * 0xbf58476d1ce4e5b9ull + 0xb07u);
  if (!replay_dir.empty()) std::filesystem::create_directories(replay_dir);

  double ret_sum = 0.0;
  long len_sum = 0, entity_sum = 0, entity_points = 0;
  for (int g = 0; g < games; ++g) {
    PlayedGame game = play_policy_game(model, spec, stats, opponent,
                                       cfg.step_limit, policy_rng, bot_rng,
                                       cfg.eval_argmax);
    if (game.terminal == engine::TerminalStatus::P1Win) ++report.wins;
    else if (game.terminal == engine::TerminalStatus::P2Win) ++report.losses;
    else ++report.ties;
    ret_sum += game.p1_return;
    len_sum += game.length;
    for (int e : game.entity_counts) {
      if (e >= static_cast<int>(report.entity_histogram.size()))
        report.entity_histogram.resize(e + 1, 0);
      ++report.entity_histogram[e];
      report.entity_max = std::max(report.entity_max, e);
      entity_sum += e;
      ++entity_points;
    }
    if (!replay_dir.empty()) {
      std::string path =
          (std::filesystem::path(replay_dir) /
           (bots::bot_name(opponent) + "_game_" + std::to_string(g) + ".replay"))
              .string();
      game.replay.save(path);
      report.replay_paths.push_back(path);
    }
  }
  if (games > 0) {
    report.mean_return = ret_sum / games;
    report.mean_length = static_cast<double>(len_sum) / games;
  }
  if (entity_points > 0)
    report.entity_mean = static_cast<double>(entity_sum) / entity_points;
  return report;
}

}  // namespace ert::run
