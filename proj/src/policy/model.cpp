#include "ert/policy/model.hpp"

#include <stdexcept>

namespace ert::policy {

using namespace engine;

PolicyModel::PolicyModel(const ModelConfig& cfg, unsigned init_seed) : cfg_(cfg) {
  int d = cfg.model_dim();
  if (d % cfg.heads != 0)
    throw std::invalid_argument("model dim must be divisible by head count");
  std::mt19937_64 rng(init_seed);
  auto he = [&](nn::Parameter& p, int fan_in) {
    nn::init_gaussian(p, cfg.init_std_scale / std::sqrt(static_cast<double>(fan_in)),
                      rng);
  };
  if (cfg.embedding) {
    w_embed_ = &params_.create("embed.W", cfg.map_h * cfg.map_w, cfg.embed_dim);
    he(*w_embed_, cfg.map_h * cfg.map_w);
  }
  nn::EncoderConfig enc = cfg.encoder();
  for (int i = 0; i < cfg.layers; ++i)
    layers_.push_back(nn::make_encoder_layer(params_, "enc." + std::to_string(i),
                                             enc, rng, cfg.init_std_scale));
  actor_W_ = &params_.create("actor.W", d, kSubActionLogits);
  he(*actor_W_, d);
  actor_b_ = &params_.create("actor.b", 1, kSubActionLogits);
  critic_W_ = &params_.create("critic.W", d, 1);
  he(*critic_W_, d);
  critic_b_ = &params_.create("critic.b", 1, 1);
  agg_w_ = &params_.create("critic.agg_w", 1, 6);
  he(*agg_w_, 6);
  agg_b_ = &params_.create("critic.agg_b", 1, 6);
}

PolicyModel::CountBreakdown PolicyModel::count_breakdown() const {
  CountBreakdown b;
  if (w_embed_) b.embedding = w_embed_->size();
  b.actor_head = actor_W_->size() + actor_b_->size();
  b.critic_head = critic_W_->size() + critic_b_->size();
  b.critic_aggregation = agg_w_->size() + agg_b_->size();
  b.encoder = param_count() - b.embedding - b.actor_head - b.critic_head -
              b.critic_aggregation;
  return b;
}

nn::Var PolicyModel::encode(nn::Tape& t, const EntityLayout& layout,
                            std::mt19937_64& rng, bool training) const {
  PositionEmbedding emb{w_embed_, cfg_.embedding};
  nn::Var x = feature_rows(t, layout, emb);
  return nn::encode_stack(t, x, cfg_.encoder(), layers_, rng, training);
}

nn::Var PolicyModel::actor_logits(nn::Tape& t, nn::Var encoded, int k) const {
  std::vector<int> rows(k);
  for (int i = 0; i < k; ++i) rows[i] = i;
  return linear(gather_rows(encoded, rows), t.leaf(*actor_W_), t.leaf(*actor_b_));
}

nn::Var PolicyModel::critic_value(nn::Tape& t, nn::Var encoded,
                                  const EntityLayout& layout) const {
  nn::Var per_entity = linear(encoded, t.leaf(*critic_W_), t.leaf(*critic_b_));
  nn::Var w = t.leaf(*agg_w_);
  nn::Var b = t.leaf(*agg_b_);
  nn::Var value = t.constant(nn::Mat::Zero(1, 1));
  int counts[3] = {layout.k, layout.l, layout.m};
  int start = 0;
  for (int g = 0; g < 3; ++g) {
    nn::Var w_sum = pick(w, 0, 2 * g), w_mean = pick(w, 0, 2 * g + 1);
    nn::Var b_sum = pick(b, 0, 2 * g), b_mean = pick(b, 0, 2 * g + 1);
    if (counts[g] > 0) {
      std::vector<int> rows(counts[g]);
      for (int i = 0; i < counts[g]; ++i) rows[i] = start + i;
      nn::Var group_sum = sum_all(gather_rows(per_entity, rows));
      nn::Var group_mean = scale(group_sum, 1.0 / counts[g]);
      value = add(value, hadamard(w_sum, group_sum));
      value = add(value, hadamard(w_mean, group_mean));
    }
    // Empty groups contribute sum = mean = 0; biases still apply.
    value = add(value, b_sum);
    value = add(value, b_mean);
    start += counts[g];
  }
  return value;
}

ForwardResult PolicyModel::forward(nn::Tape& t, const EntityLayout& layout,
                                   const LegalityMask& mask, std::mt19937_64& rng,
                                   bool training) const {
  ForwardResult res;
  res.encoded = encode(t, layout, rng, training);
  res.value = critic_value(t, res.encoded, layout);
  if (layout.k > 0) {
    std::vector<int> own_positions(layout.positions.begin(),
                                   layout.positions.begin() + layout.k);
    nn::Var logits = actor_logits(t, res.encoded, layout.k);
    res.masked_logits = mask_logits(logits, mask, own_positions);
    res.dist = make_distribution(res.masked_logits, mask, own_positions);
    res.has_actor = true;
  }
  return res;
}

}  // namespace ert::policy
