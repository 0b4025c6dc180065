#pragma once

// Converts the grid observation into per-entity rows: position encoding
// (one-hot, or one-hot through a trainable embedding) concatenated with the
// cell's 27 features. Rows are ordered self block, opponent block, neutral
// block; ties broken row-major by grid position.

#include "ert/engine/types.hpp"
#include "ert/nn/autodiff.hpp"

#include <vector>

namespace ert::policy {

struct EntityLayout {
  int h = 0, w = 0;
  int k = 0, l = 0, m = 0;        // self / opponent / neutral entity counts
  std::vector<int> positions;     // grid index (r*w + c) per row
  nn::Mat features;               // e x 27 cell features

  int e() const { return k + l + m; }
};

EntityLayout extract_entities(const engine::ObservationTensor& obs);

struct PositionEmbedding {
  nn::Parameter* W_embed = nullptr;  // (h*w) x embed_dim
  bool enabled = false;
};

// Differentiable entity matrix: e x (hw + 27), or e x (embed_dim + 27) with
// the embedding enabled.
nn::Var feature_rows(nn::Tape& tape, const EntityLayout& layout,
                     const PositionEmbedding& embedding);

}  // namespace ert::policy
