#include "ert/ppo/ppo.hpp"

#include "ert/policy/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ert::ppo {

LossTerms ppo_loss(const std::vector<nn::Var>& new_log_probs,
                   const std::vector<double>& old_log_probs,
                   const std::vector<double>& advantages,
                   const std::vector<nn::Var>& new_values,
                   const std::vector<double>& return_targets,
                   const std::vector<nn::Var>& entropies, const PpoConfig& cfg) {
  std::size_t n = new_log_probs.size();
  if (old_log_probs.size() != n || advantages.size() != n ||
      new_values.size() != n || return_targets.size() != n || entropies.size() != n)
    throw std::invalid_argument("ppo_loss: mismatched sample counts");
  nn::Tape* t = new_log_probs[0].tape;
  nn::Var surrogate = t->constant(nn::Mat::Zero(1, 1));
  nn::Var value_mse = t->constant(nn::Mat::Zero(1, 1));
  nn::Var entropy_sum = t->constant(nn::Mat::Zero(1, 1));
  for (std::size_t i = 0; i < n; ++i) {
    nn::Var old_lp = t->constant(nn::Mat::Constant(1, 1, old_log_probs[i]));
    nn::Var ratio = exp_elem(sub(new_log_probs[i], old_lp));
    nn::Var unclipped = scale(ratio, advantages[i]);
    nn::Var clipped =
        scale(clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps), advantages[i]);
    surrogate = add(surrogate, vmin(unclipped, clipped));
    nn::Var ret = t->constant(nn::Mat::Constant(1, 1, return_targets[i]));
    nn::Var diff = sub(new_values[i], ret);
    value_mse = add(value_mse, hadamard(diff, diff));
    entropy_sum = add(entropy_sum, entropies[i]);
  }
  double inv_n = 1.0 / static_cast<double>(n);
  LossTerms terms;
  terms.policy = scale(surrogate, -inv_n);
  terms.value = scale(value_mse, 0.5 * cfg.value_coef * inv_n);
  terms.entropy = scale(entropy_sum, -cfg.entropy_coef * inv_n);
  terms.total = add(add(terms.policy, terms.value), terms.entropy);
  return terms;
}

namespace {

double grad_l2_norm(const nn::ParamStore& params) {
  double sq = 0.0;
  for (const auto* p : params.all()) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

}  // namespace

UpdateStats update(const RolloutBuffer& buffer, policy::PolicyModel& model,
                   nn::Adam& optimizer, const PpoConfig& cfg,
                   std::mt19937_64& rng, long consumed_steps) {
  if (buffer.num_envs % cfg.minibatch_envs != 0)
    throw std::invalid_argument("update: minibatch size must divide env count");
  AdvantageSet adv = compute_gae(buffer, cfg.gamma, cfg.lambda);

  UpdateStats stats;
  long minibatches = 0;
  nn::Tape tape;
  std::vector<int> env_order(buffer.num_envs);
  std::iota(env_order.begin(), env_order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the caller's rng keeps the update reproducible.
    for (int i = buffer.num_envs - 1; i > 0; --i) {
      int j = static_cast<int>(rng() % static_cast<unsigned long>(i + 1));
      std::swap(env_order[i], env_order[j]);
    }
    for (int mb = 0; mb < buffer.num_envs; mb += cfg.minibatch_envs) {
      std::vector<std::pair<int, int>> samples;  // (env, t)
      for (int s = 0; s < cfg.minibatch_envs; ++s)
        for (int t = 0; t < buffer.num_steps; ++t)
          samples.emplace_back(env_order[mb + s], t);
      int m = static_cast<int>(samples.size());

      double adv_mean = 0.0, adv_std = 1.0;
      if (cfg.normalize_advantages) {
        double sum = 0.0, sq = 0.0;
        for (auto [e, t] : samples) sum += adv.advantages[e * buffer.num_steps + t];
        adv_mean = sum / m;
        for (auto [e, t] : samples) {
          double d = adv.advantages[e * buffer.num_steps + t] - adv_mean;
          sq += d * d;
        }
        adv_std = std::sqrt(sq / m) + 1e-8;
      }

      model.params().zero_grads();
      double mb_total = 0, mb_policy = 0, mb_value = 0, mb_entropy = 0;
      long clipped_count = 0;
      double kl_sum = 0.0;
      // One sample per tape keeps peak memory at a single graph; the 1/m
      // backward seed makes the accumulated gradient equal the batch mean.
      for (auto [e, t] : samples) {
        const StepRecord& rec = buffer.at(e, t);
        int idx = e * buffer.num_steps + t;
        double a = (adv.advantages[idx] - adv_mean) / adv_std;

        tape.reset();
        policy::EntityLayout layout = policy::extract_entities(rec.obs);
        auto fwd = model.forward(tape, layout, rec.mask, rng, true);
        nn::Var new_lp = log_prob_of(fwd.dist, rec.choices);
        nn::Var ent = entropy_of(fwd.dist);
        LossTerms terms = ppo_loss({new_lp}, {rec.log_prob}, {a}, {fwd.value},
                                   {adv.returns[idx]}, {ent}, cfg);
        double total = terms.total.scalar();
        if (!std::isfinite(total)) {
          std::ostringstream msg;
          msg << "update: non-finite loss at env " << e << " step " << t
              << " (policy " << terms.policy.scalar() << ", value "
              << terms.value.scalar() << ", entropy " << terms.entropy.scalar()
              << ", old_lp " << rec.log_prob << ", new_lp " << new_lp.scalar()
              << ", adv " << a << ")";
          throw std::runtime_error(msg.str());
        }
        tape.backward(terms.total, 1.0 / m);

        mb_total += total;
        mb_policy += terms.policy.scalar();
        mb_value += terms.value.scalar();
        if (cfg.entropy_coef != 0.0)
          mb_entropy += -terms.entropy.scalar() / cfg.entropy_coef;
        double ratio = std::exp(new_lp.scalar() - rec.log_prob);
        if (std::abs(ratio - 1.0) > cfg.clip_eps) ++clipped_count;
        kl_sum += rec.log_prob - new_lp.scalar();
      }
      stats.total_loss += mb_total / m;
      stats.policy_loss += mb_policy / m;
      stats.value_loss += mb_value / m;
      stats.entropy += mb_entropy / m;
      stats.clip_fraction += static_cast<double>(clipped_count) / m;
      stats.approx_kl += kl_sum / m;
      stats.grad_norm += grad_l2_norm(model.params());
      optimizer.step(static_cast<double>(consumed_steps));
      ++minibatches;
      stats.samples += m;
    }
  }
  stats.total_loss /= minibatches;
  stats.policy_loss /= minibatches;
  stats.value_loss /= minibatches;
  stats.entropy /= minibatches;
  stats.clip_fraction /= minibatches;
  stats.approx_kl /= minibatches;
  stats.grad_norm /= minibatches;
  return stats;
}

}  // namespace ert::ppo
