#include "ert/ppo/buffer.hpp"

namespace ert::ppo {

AdvantageSet compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  AdvantageSet out;
  out.advantages.assign(buffer.slots.size(), 0.0);
  out.returns.assign(buffer.slots.size(), 0.0);
  for (int e = 0; e < buffer.num_envs; ++e) {
    double carry = 0.0;
    for (int t = buffer.num_steps - 1; t >= 0; --t) {
      const StepRecord& s = buffer.at(e, t);
      double next_nonterminal = s.done ? 0.0 : 1.0;
      double next_value = t + 1 < buffer.num_steps ? buffer.at(e, t + 1).value
                                                   : buffer.bootstrap_values[e];
      double delta = s.reward + gamma * next_value * next_nonterminal - s.value;
      carry = delta + gamma * lambda * next_nonterminal * carry;
      out.advantages[e * buffer.num_steps + t] = carry;
      out.returns[e * buffer.num_steps + t] = carry + s.value;
    }
  }
  return out;
}

}  // namespace ert::ppo
