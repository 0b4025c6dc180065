#include "ert/run/rollout.hpp"

#include <limits>
#include <stdexcept>

namespace ert::run {

engine::JointAction to_joint_action(const engine::GridState& state,
                                    const std::vector<policy::UnitChoice>& choices,
                                    const std::vector<int>& positions) {
  engine::JointAction joint;
  joint.reserve(choices.size());
  for (std::size_t i = 0; i < choices.size(); ++i) {
    int r = positions[i] / state.w, c = positions[i] % state.w;
    const engine::Unit* u = state.unit_at(r, c);
    if (!u) throw std::logic_error("to_joint_action: no unit at sampled position");
    joint.push_back({u->id, choices[i].to_sub_action()});
  }
  return joint;
}

VecEnv::VecEnv(const RunConfig& cfg, const engine::MapSpec& spec,
               const engine::UnitStatsTable& stats)
    : cfg_(cfg), spec_(spec), stats_(stats) {
  envs_.resize(cfg_.num_envs);
  for (int i = 0; i < cfg_.num_envs; ++i) {
    envs_[i].opponent = cfg_.opponents[i % cfg_.opponents.size()];
    envs_[i].bot_rng.seed(cfg_.seed * 7919u + 31u * static_cast<unsigned>(i) + 1u);
    reset_env(envs_[i]);
  }
}

void VecEnv::reset_env(EnvInstance& env) {
  env.state = engine::new_game(spec_, stats_, cfg_.seed);
  env.state.step_limit = cfg_.step_limit;
  env.episode_return = 0.0;
  env.episode_length = 0;
}

RolloutStats VecEnv::collect(const policy::PolicyModel& model,
                             ppo::RolloutBuffer& buffer,
                             std::mt19937_64& policy_rng) {
  if (buffer.num_envs != cfg_.num_envs || buffer.num_steps != cfg_.steps_per_rollout)
    throw std::invalid_argument("collect: buffer shape mismatch");

  RolloutStats stats;
  stats.entity_min = std::numeric_limits<int>::max();
  long entity_sum = 0;
  nn::Tape tape;

  for (int t = 0; t < buffer.num_steps; ++t) {
    for (int e = 0; e < buffer.num_envs; ++e) {
      EnvInstance& env = envs_[e];
      ppo::StepRecord& rec = buffer.at(e, t);
      rec.obs = engine::observe(env.state, engine::PlayerId::P1);
      rec.mask = engine::legality_mask(env.state, engine::PlayerId::P1);

      policy::EntityLayout layout = policy::extract_entities(rec.obs);
      tape.reset();
      auto fwd = model.forward(tape, layout, rec.mask, policy_rng, false);
      rec.value = fwd.value.scalar();

      engine::JointAction a1;
      if (fwd.has_actor) {
        policy::SampleResult sampled = policy::sample_joint(fwd.dist, policy_rng);
        rec.choices = sampled.choices;
        rec.log_prob = sampled.log_prob;
        a1 = to_joint_action(env.state, sampled.choices, fwd.dist.positions);
      } else {
        rec.choices.clear();
        rec.log_prob = 0.0;
      }
      engine::JointAction a2 =
          bots::act(env.opponent, env.state, engine::PlayerId::P2, env.bot_rng);

      long coercions_before = env.state.coercions;
      engine::StepResult res = engine::step(env.state, a1, a2);
      if (cfg_.strict_masking && env.state.coercions != coercions_before)
        throw std::runtime_error("collect: sampled action was coerced to NOOP");

      double reward = 0.0;
      for (const auto& ev : res.events[0]) {
        reward += ev.value;
        stats.reward_sums[static_cast<int>(ev.kind)] += ev.value;
      }
      rec.reward = reward;
      rec.done = res.terminal != engine::TerminalStatus::Ongoing;

      env.episode_return += reward;
      env.episode_length += 1;
      ++stats.steps;
      entity_sum += layout.e();
      stats.entity_min = std::min(stats.entity_min, layout.e());
      stats.entity_max = std::max(stats.entity_max, layout.e());

      if (rec.done) {
        stats.episodes.push_back(
            {env.episode_return, env.episode_length, res.terminal, env.opponent});
        reset_env(env);
      }
    }
  }

  for (int e = 0; e < buffer.num_envs; ++e) {
    engine::ObservationTensor obs = engine::observe(envs_[e].state, engine::PlayerId::P1);
    policy::EntityLayout layout = policy::extract_entities(obs);
    tape.reset();
    nn::Var encoded = model.encode(tape, layout, policy_rng, false);
    buffer.bootstrap_values[e] = model.critic_value(tape, encoded, layout).scalar();
  }

  if (stats.steps > 0) stats.entity_mean = static_cast<double>(entity_sum) / stats.steps;
  if (stats.entity_min == std::numeric_limits<int>::max()) stats.entity_min = 0;
  return stats;
}

}  // namespace ert::run
