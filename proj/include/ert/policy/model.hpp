#pragma once

// Entity-transformer actor-critic: feature map -> shared encoder -> shared
// per-entity actor head (91 -> 78) on own units, per-entity critic head
// (91 -> 1) with per-player sum/mean aggregation into a scalar value.

#include "ert/engine/types.hpp"
#include "ert/nn/transformer.hpp"
#include "ert/policy/distribution.hpp"
#include "ert/policy/feature_map.hpp"

#include <random>
#include <string>
#include <vector>

namespace ert::policy {

struct ModelConfig {
  int map_h = 8, map_w = 8;
  bool embedding = false;  // 8x8 disables, 16x16 enables
  int embed_dim = 64;
  int layers = 5;
  int heads = 7;
  int ff_dim = 512;
  double dropout = 0.1;
  double init_std_scale = 1.4142135623730951;  // sqrt(2), He-style

  int model_dim() const {
    return (embedding ? embed_dim : map_h * map_w) + engine::kObsFeatures;
  }
  nn::EncoderConfig encoder() const {
    return {layers, heads, model_dim(), ff_dim, dropout};
  }
};

struct ForwardResult {
  nn::Var encoded;       // e x d
  nn::Var masked_logits; // k x 78 (empty when k == 0)
  nn::Var value;         // 1 x 1
  FactoredDistribution dist;
  bool has_actor = false;  // false when the player controls no units
};

class PolicyModel {
 public:
  explicit PolicyModel(const ModelConfig& cfg, unsigned init_seed = 0);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  long param_count() const { return params_.total_size(); }

  struct CountBreakdown {
    long embedding = 0, encoder = 0, actor_head = 0, critic_head = 0,
         critic_aggregation = 0;
    long total() const {
      return embedding + encoder + actor_head + critic_head + critic_aggregation;
    }
  };
  CountBreakdown count_breakdown() const;

  nn::Var encode(nn::Tape& t, const EntityLayout& layout, std::mt19937_64& rng,
                 bool training) const;
  // Shared affine head over the first k rows of the encoded matrix.
  nn::Var actor_logits(nn::Tape& t, nn::Var encoded, int k) const;
  nn::Var critic_value(nn::Tape& t, nn::Var encoded, const EntityLayout& layout) const;

  ForwardResult forward(nn::Tape& t, const EntityLayout& layout,
                        const engine::LegalityMask& mask, std::mt19937_64& rng,
                        bool training) const;

 private:
  ModelConfig cfg_;
  nn::ParamStore params_;
  nn::Parameter* w_embed_ = nullptr;
  std::vector<nn::EncoderLayerWeights> layers_;
  nn::Parameter* actor_W_ = nullptr;
  nn::Parameter* actor_b_ = nullptr;
  nn::Parameter* critic_W_ = nullptr;
  nn::Parameter* critic_b_ = nullptr;
  nn::Parameter* agg_w_ = nullptr;  // 1x6: (sum, mean) per player group
  nn::Parameter* agg_b_ = nullptr;  // 1x6
};

}  // namespace ert::policy
