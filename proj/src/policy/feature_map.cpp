#include "ert/policy/feature_map.hpp"

#include <stdexcept>

namespace ert::policy {

using namespace engine;

EntityLayout extract_entities(const ObservationTensor& obs) {
  EntityLayout lay;
  lay.h = obs.h;
  lay.w = obs.w;
  // Owner group is egocentric: slot 0 self, 1 none/neutral, 2 opponent.
  std::vector<int> self_pos, opp_pos, neutral_pos;
  for (int r = 0; r < obs.h; ++r)
    for (int c = 0; c < obs.w; ++c) {
      bool empty = obs.at(r, c, 13) != 0;  // unit-type "none" class
      if (empty) continue;
      int pos = r * obs.w + c;
      if (obs.at(r, c, 10)) self_pos.push_back(pos);
      else if (obs.at(r, c, 12)) opp_pos.push_back(pos);
      else neutral_pos.push_back(pos);
    }
  lay.k = static_cast<int>(self_pos.size());
  lay.l = static_cast<int>(opp_pos.size());
  lay.m = static_cast<int>(neutral_pos.size());
  lay.positions = std::move(self_pos);
  lay.positions.insert(lay.positions.end(), opp_pos.begin(), opp_pos.end());
  lay.positions.insert(lay.positions.end(), neutral_pos.begin(), neutral_pos.end());
  lay.features.resize(lay.e(), kObsFeatures);
  for (int i = 0; i < lay.e(); ++i) {
    int r = lay.positions[i] / obs.w, c = lay.positions[i] % obs.w;
    for (int f = 0; f < kObsFeatures; ++f)
      lay.features(i, f) = static_cast<double>(obs.at(r, c, f));
  }
  return lay;
}

nn::Var feature_rows(nn::Tape& tape, const EntityLayout& layout,
                     const PositionEmbedding& embedding) {
  nn::Var feats = tape.constant(layout.features);
  nn::Var pos_enc;
  if (embedding.enabled) {
    if (!embedding.W_embed)
      throw std::invalid_argument("feature_rows: embedding enabled without weights");
    pos_enc = gather_rows(tape.leaf(*embedding.W_embed), layout.positions);
  } else {
    nn::Mat onehot = nn::Mat::Zero(layout.e(), layout.h * layout.w);
    for (int i = 0; i < layout.e(); ++i) onehot(i, layout.positions[i]) = 1.0;
    pos_enc = tape.constant(std::move(onehot));
  }
  return nn::concat_cols<double>({pos_enc, feats});
}

}  // namespace ert::policy
