#pragma once

// Transformer encoder built on the autodiff tape: multi-head self-attention,
// post-norm residual layers, ReLU feed-forward.

#include "ert/nn/autodiff.hpp"

#include <deque>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace ert::nn {

struct EncoderConfig {
  int layers = 5;
  int heads = 7;
  int model_dim = 91;
  int ff_dim = 512;
  double dropout = 0.1;
};

// Owns parameters; deque keeps addresses stable across growth.
class ParamStore {
 public:
  Parameter& create(const std::string& name, int rows, int cols) {
    store_.emplace_back(name, Mat::Zero(rows, cols));
    index_.push_back(&store_.back());
    return store_.back();
  }

  std::vector<Parameter*>& all() { return index_; }
  const std::vector<Parameter*>& all() const { return index_; }

  Parameter* find(const std::string& name) {
    for (auto* p : index_)
      if (p->name == name) return p;
    return nullptr;
  }

  long total_size() const {
    long n = 0;
    for (auto* p : index_) n += static_cast<long>(p->size());
    return n;
  }

  void zero_grads() {
    for (auto* p : index_) p->zero_grad();
  }

 private:
  std::deque<Parameter> store_;
  std::vector<Parameter*> index_;
};

// He-style Gaussian init: std = init_std_scale / sqrt(fan_in), biases zero.
inline void init_gaussian(Parameter& p, double std_dev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std_dev);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value(i) = dist(rng);
}

struct AttentionWeights {
  Parameter *Wq, *bq, *Wk, *bk, *Wv, *bv, *Wo, *bo;
};

struct EncoderLayerWeights {
  AttentionWeights attn;
  Parameter *ln1_gain, *ln1_bias;
  Parameter *ff_W1, *ff_b1, *ff_W2, *ff_b2;
  Parameter *ln2_gain, *ln2_bias;
};

inline EncoderLayerWeights make_encoder_layer(ParamStore& ps, const std::string& prefix,
                                              const EncoderConfig& cfg,
                                              std::mt19937_64& rng,
                                              double init_std_scale = std::sqrt(2.0)) {
  int d = cfg.model_dim, f = cfg.ff_dim;
  EncoderLayerWeights w;
  auto mk = [&](const std::string& n, int r, int c, bool init) -> Parameter* {
    Parameter& p = ps.create(prefix + "." + n, r, c);
    if (init) init_gaussian(p, init_std_scale / std::sqrt(static_cast<double>(r)), rng);
    return &p;
  };
  w.attn.Wq = mk("attn.Wq", d, d, true);
  w.attn.bq = mk("attn.bq", 1, d, false);
  w.attn.Wk = mk("attn.Wk", d, d, true);
  w.attn.bk = mk("attn.bk", 1, d, false);
  w.attn.Wv = mk("attn.Wv", d, d, true);
  w.attn.bv = mk("attn.bv", 1, d, false);
  w.attn.Wo = mk("attn.Wo", d, d, true);
  w.attn.bo = mk("attn.bo", 1, d, false);
  w.ln1_gain = mk("ln1.gain", 1, d, false);
  w.ln1_gain->value.setOnes();
  w.ln1_bias = mk("ln1.bias", 1, d, false);
  w.ff_W1 = mk("ff.W1", d, f, true);
  w.ff_b1 = mk("ff.b1", 1, f, false);
  w.ff_W2 = mk("ff.W2", f, d, true);
  w.ff_b2 = mk("ff.b2", 1, d, false);
  w.ln2_gain = mk("ln2.gain", 1, d, false);
  w.ln2_gain->value.setOnes();
  w.ln2_bias = mk("ln2.bias", 1, d, false);
  return w;
}

// softmax(Q K^T / sqrt(d_k)) V per head, concatenated and projected.
inline Var multi_head_attention(Tape& t, Var x, const AttentionWeights& w, int heads) {
  Eigen::Index d = x.cols();
  if (d % heads != 0)
    throw std::invalid_argument("multi_head_attention: dim not divisible by heads");
  Eigen::Index dk = d / heads;
  Var q = linear(x, t.leaf(*w.Wq), t.leaf(*w.bq));
  Var k = linear(x, t.leaf(*w.Wk), t.leaf(*w.bk));
  Var v = linear(x, t.leaf(*w.Wv), t.leaf(*w.bv));
  std::vector<Var> outs;
  outs.reserve(heads);
  double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  for (int h = 0; h < heads; ++h) {
    Var qh = slice_cols(q, h * dk, dk);
    Var kh = slice_cols(k, h * dk, dk);
    Var vh = slice_cols(v, h * dk, dk);
    Var scores = scale(matmul_nt(qh, kh), inv_sqrt_dk);
    Var attn = softmax_rows(scores);
    outs.push_back(matmul(attn, vh));
  }
  Var cat = concat_cols(outs);
  return linear(cat, t.leaf(*w.Wo), t.leaf(*w.bo));
}

// Post-norm layer: LN(x + drop(MHA(x))) then LN(x + drop(FF(x))).
inline Var encoder_layer(Tape& t, Var x, const EncoderLayerWeights& w,
                         const EncoderConfig& cfg, std::mt19937_64& rng, bool training) {
  Var attn = multi_head_attention(t, x, w.attn, cfg.heads);
  attn = dropout(attn, cfg.dropout, rng, training);
  Var h = layer_norm_rows(add(x, attn), t.leaf(*w.ln1_gain), t.leaf(*w.ln1_bias));
  Var ff = linear(relu(linear(h, t.leaf(*w.ff_W1), t.leaf(*w.ff_b1))),
                  t.leaf(*w.ff_W2), t.leaf(*w.ff_b2));
  ff = dropout(ff, cfg.dropout, rng, training);
  return layer_norm_rows(add(h, ff), t.leaf(*w.ln2_gain), t.leaf(*w.ln2_bias));
}

inline Var encode_stack(Tape& t, Var x, const EncoderConfig& cfg,
                        const std::vector<EncoderLayerWeights>& layers,
                        std::mt19937_64& rng, bool training) {
  Var h = x;
  for (const auto& w : layers) h = encoder_layer(t, h, w, cfg, rng, training);
  return h;
}

}  // namespace ert::nn
