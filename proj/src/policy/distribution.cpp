#include "ert/policy/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace ert::policy {

using namespace engine;

SubAction UnitChoice::to_sub_action() const {
  SubAction a;
  for (int c = 0; c < kNumComponents; ++c) a.set_component(c, component[c]);
  return a;
}

UnitChoice UnitChoice::from_sub_action(const SubAction& a) {
  UnitChoice ch;
  for (int c = 0; c < kNumComponents; ++c) ch.component[c] = a.component(c);
  return ch;
}

nn::Var mask_logits(nn::Var logits, const LegalityMask& mask,
                    const std::vector<int>& positions) {
  Eigen::Index k = logits.rows();
  if (k != static_cast<Eigen::Index>(positions.size()))
    throw std::invalid_argument("mask_logits: row/position count mismatch");
  nn::Mat penalty = nn::Mat::Zero(k, kSubActionLogits);
  for (Eigen::Index i = 0; i < k; ++i) {
    int r = positions[i] / mask.w, c = positions[i] % mask.w;
    for (int b = 0; b < kSubActionLogits; ++b)
      if (!mask.bit(r, c, b)) penalty(i, b) = kMaskPenalty;
  }
  return add(logits, logits.tape->constant(std::move(penalty)));
}

FactoredDistribution make_distribution(nn::Var masked_logits,
                                       const LegalityMask& mask,
                                       const std::vector<int>& positions) {
  FactoredDistribution dist;
  dist.num_units = static_cast<int>(masked_logits.rows());
  dist.positions = positions;
  for (int c = 0; c < kNumComponents; ++c) {
    int off = component_offset(c), width = kComponentWidths[c];
    dist.component_log_probs[c] =
        log_softmax_rows(slice_cols(masked_logits, off, width));
    dist.valid[c].resize(dist.num_units);
    for (int i = 0; i < dist.num_units; ++i) {
      int r = positions[i] / mask.w, col = positions[i] % mask.w;
      bool any = false;
      for (int b = 0; b < width; ++b) any = any || mask.bit(r, col, off + b);
      dist.valid[c][i] = any ? 1 : 0;
    }
  }
  return dist;
}

SampleResult sample_joint(const FactoredDistribution& dist, std::mt19937_64& rng) {
  SampleResult res;
  res.choices.resize(dist.num_units);
  for (int i = 0; i < dist.num_units; ++i) {
    for (int c = 0; c < kNumComponents; ++c) {
      if (!dist.valid[c][i]) {
        res.choices[i].component[c] = 0;  // degenerate-group convention
        continue;
      }
      const nn::Mat& ls = dist.component_log_probs[c].value();
      int width = kComponentWidths[c];
      double u = std::ldexp(static_cast<double>(rng() >> 11), -53);
      double acc = 0.0;
      int pickv = width - 1;
      for (int b = 0; b < width; ++b) {
        acc += std::exp(ls(i, b));
        if (u < acc) {
          pickv = b;
          break;
        }
      }
      res.choices[i].component[c] = pickv;
      res.log_prob += ls(i, pickv);
      for (int b = 0; b < width; ++b) {
        double p = std::exp(ls(i, b));
        if (p > 0.0) res.entropy -= p * ls(i, b);
      }
    }
  }
  return res;
}

nn::Var log_prob_of(const FactoredDistribution& dist,
                    const std::vector<UnitChoice>& choices) {
  if (static_cast<int>(choices.size()) != dist.num_units)
    throw std::invalid_argument("log_prob_of: unit count mismatch");
  nn::Tape* t = dist.component_log_probs[0].tape;
  nn::Var total = t->constant(nn::Mat::Zero(1, 1));
  for (int i = 0; i < dist.num_units; ++i) {
    for (int c = 0; c < kNumComponents; ++c) {
      if (!dist.valid[c][i]) continue;
      int idx = choices[i].component[c];
      if (std::exp(dist.component_log_probs[c].value()(i, idx)) == 0.0)
        throw std::domain_error("log_prob_of: action has zero probability");
      total = add(total, pick(dist.component_log_probs[c], i, idx));
    }
  }
  return total;
}

nn::Var entropy_of(const FactoredDistribution& dist) {
  nn::Tape* t = dist.component_log_probs[0].tape;
  nn::Var total = t->constant(nn::Mat::Zero(1, 1));
  for (int c = 0; c < kNumComponents; ++c) {
    std::vector<int> valid_rows;
    for (int i = 0; i < dist.num_units; ++i)
      if (dist.valid[c][i]) valid_rows.push_back(i);
    if (valid_rows.empty()) continue;
    nn::Var ls = gather_rows(dist.component_log_probs[c], valid_rows);
    nn::Var p = exp_elem(ls);
    total = sub(total, sum_all(hadamard(p, ls)));
  }
  return total;
}

}  // namespace ert::policy
