#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ert/engine/grid_state.hpp"
#include "ert/policy/model.hpp"

#include <cmath>
#include <random>

using namespace ert;
using namespace ert::engine;

namespace {

policy::ModelConfig small_config() {
  policy::ModelConfig cfg;
  cfg.map_h = 2;
  cfg.map_w = 2;
  cfg.embedding = false;
  cfg.layers = 1;
  cfg.heads = 1;
  cfg.ff_dim = 8;
  cfg.dropout = 0.0;
  return cfg;  // model_dim 4 + 27 = 31
}

LegalityMask empty_mask(int h, int w) {
  LegalityMask m;
  m.h = h;
  m.w = w;
  m.source.assign(static_cast<std::size_t>(h) * w, 0);
  m.component.assign(static_cast<std::size_t>(h) * w * kSubActionLogits, 0);
  return m;
}

nn::Mat random_mat(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  nn::Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = d(rng);
  return m;
}

}  // namespace

TEST_CASE("feature widths per map and embedding mode") {
  policy::ModelConfig c8;
  c8.map_h = c8.map_w = 8;
  c8.embedding = false;
  CHECK(c8.model_dim() == 91);

  policy::ModelConfig c16raw;
  c16raw.map_h = c16raw.map_w = 16;
  c16raw.embedding = false;
  CHECK(c16raw.model_dim() == 283);
  // 283 is not divisible by 7 heads: the model refuses it
  CHECK_THROWS_AS(policy::PolicyModel(c16raw, 0), std::invalid_argument);

  policy::ModelConfig c16;
  c16.map_h = c16.map_w = 16;
  c16.embedding = true;
  CHECK(c16.model_dim() == 91);
}

TEST_CASE("entity extraction: block ordering and features") {
  GridState s = new_game(MapSpec::bundled("basesWorkers8x8"), 0);
  ObservationTensor obs = observe(s, PlayerId::P1);
  policy::EntityLayout lay = policy::extract_entities(obs);
  CHECK(lay.k == 2);  // own worker + base
  CHECK(lay.l == 2);
  CHECK(lay.m == 2);  // two mines
  CHECK(lay.e() == 6);
  // self block row-major: worker (1,1)=9 before base (2,1)=17
  CHECK(lay.positions[0] == 9);
  CHECK(lay.positions[1] == 17);
  // opponent block: base (5,6)=46 then worker (6,6)=54
  CHECK(lay.positions[2] == 46);
  CHECK(lay.positions[3] == 54);
  // neutral block: mines (0,0)=0 and (7,7)=63
  CHECK(lay.positions[4] == 0);
  CHECK(lay.positions[5] == 63);
  // features copy the 27 cell features verbatim
  for (int f = 0; f < kObsFeatures; ++f)
    CHECK(lay.features(0, f) == static_cast<double>(obs.at(1, 1, f)));

  // one-hot position rows when the embedding is disabled
  nn::Tape t;
  policy::PositionEmbedding none;
  nn::Mat rows = feature_rows(t, lay, none).value();
  CHECK(rows.rows() == 6);
  CHECK(rows.cols() == 91);
  for (int i = 0; i < 6; ++i) {
    CHECK(rows.row(i).head(64).sum() == 1.0);
    CHECK(rows(i, lay.positions[i]) == 1.0);
  }
}

TEST_CASE("parameter counts: heads exact, totals itemized") {
  policy::ModelConfig c8;
  c8.map_h = c8.map_w = 8;
  c8.embedding = false;
  policy::PolicyModel m8(c8, 0);
  auto b8 = m8.count_breakdown();
  CHECK(b8.actor_head == 7176);  // 91*78 + 78
  CHECK(b8.critic_head == 92);   // 91 + 1
  CHECK(b8.critic_aggregation == 12);
  CHECK(b8.embedding == 0);
  // per layer: 4*(91*91+91) attention + LN 2*2*91 + FF (91*512+512 + 512*91+91)
  CHECK(b8.encoder % 5 == 0);
  CHECK(b8.encoder / 5 == 127639);
  CHECK(b8.total() == 645475);
  CHECK(m8.param_count() == b8.total());

  policy::ModelConfig c16;
  c16.map_h = c16.map_w = 16;
  c16.embedding = true;
  policy::PolicyModel m16(c16, 0);
  auto b16 = m16.count_breakdown();
  CHECK(b16.embedding == 256 * 64);
  CHECK(b16.total() == 661859);
}

TEST_CASE("mask adds the penalty exactly where illegal") {
  nn::Tape t;
  LegalityMask m = empty_mask(1, 2);
  // unit at cell 0: action types NOOP..ATTACK legal except PRODUCE
  for (int b : {0, 1, 2, 3, 5}) m.set_bit(0, 0, b);
  nn::Mat logits = nn::Mat::Zero(1, kSubActionLogits);
  nn::Var masked = policy::mask_logits(t.constant(logits), m, {0});
  for (int b = 0; b < kSubActionLogits; ++b) {
    bool legal = (b < 6 && b != 4);
    if (legal) CHECK(masked.value()(0, b) == 0.0);
    else CHECK(masked.value()(0, b) == policy::kMaskPenalty);
  }
}

TEST_CASE("uniform masked distribution: -ln6 log-probs and ln4 entropy") {
  nn::Tape t;
  LegalityMask m = empty_mask(1, 1);
  for (int b = 0; b < 6; ++b) m.set_bit(0, 0, b);  // all action types
  for (int d = 0; d < 4; ++d) m.set_bit(0, 0, component_offset(1) + d);
  nn::Var logits = t.constant(nn::Mat::Zero(1, kSubActionLogits));
  nn::Var masked = policy::mask_logits(logits, m, {0});
  policy::FactoredDistribution dist = policy::make_distribution(masked, m, {0});

  CHECK(dist.valid[0][0] == 1);
  CHECK(dist.valid[1][0] == 1);
  for (int c = 2; c < kNumComponents; ++c) CHECK(dist.valid[c][0] == 0);

  for (int v = 0; v < 6; ++v)
    CHECK(dist.component_log_probs[0].value()(0, v) ==
          doctest::Approx(-std::log(6.0)).epsilon(1e-12));
  for (int v = 0; v < 4; ++v)
    CHECK(dist.component_log_probs[1].value()(0, v) ==
          doctest::Approx(-std::log(4.0)).epsilon(1e-12));

  // joint entropy = ln6 + ln4; degenerate groups contribute nothing
  nn::Var ent = policy::entropy_of(dist);
  CHECK(ent.scalar() == doctest::Approx(std::log(6.0) + std::log(4.0)).epsilon(1e-10));

  policy::UnitChoice ch;
  ch.component[0] = 2;
  ch.component[1] = 3;
  nn::Var lp = policy::log_prob_of(dist, {ch});
  CHECK(lp.scalar() ==
        doctest::Approx(-std::log(6.0) - std::log(4.0)).epsilon(1e-10));
}

TEST_CASE("masked entries carry probability numerically zero") {
  nn::Tape t;
  LegalityMask m = empty_mask(1, 1);
  m.set_bit(0, 0, 0);
  m.set_bit(0, 0, 1);  // NOOP and MOVE legal, others masked
  nn::Var masked =
      policy::mask_logits(t.constant(nn::Mat::Zero(1, kSubActionLogits)), m, {0});
  policy::FactoredDistribution dist = policy::make_distribution(masked, m, {0});
  for (int v = 2; v < 6; ++v) {
    double p = std::exp(dist.component_log_probs[0].value()(0, v));
    CHECK(p <= 1e-30);
  }
  // selecting a masked action is a hard error
  policy::UnitChoice bad;
  bad.component[0] = 4;
  CHECK_THROWS_AS(policy::log_prob_of(dist, {bad}), std::domain_error);
}

TEST_CASE("degenerate groups sample index 0 with zero contribution") {
  nn::Tape t;
  LegalityMask m = empty_mask(1, 1);
  m.set_bit(0, 0, 0);  // only NOOP: every parameter group is fully masked
  nn::Var masked =
      policy::mask_logits(t.constant(nn::Mat::Zero(1, kSubActionLogits)), m, {0});
  policy::FactoredDistribution dist = policy::make_distribution(masked, m, {0});
  std::mt19937_64 rng(1);
  policy::SampleResult s = policy::sample_joint(dist, rng);
  for (int c = 1; c < kNumComponents; ++c) CHECK(s.choices[0].component[c] == 0);
  CHECK(s.choices[0].component[0] == 0);  // NOOP is the only non-zero-prob type
  CHECK(s.log_prob == 0.0);               // P = 1 over the valid group
  CHECK(s.entropy == 0.0);
  CHECK(policy::log_prob_of(dist, s.choices).scalar() == 0.0);
}

TEST_CASE("sampling consistency on a real state") {
  policy::ModelConfig cfg;
  cfg.map_h = cfg.map_w = 8;
  cfg.embedding = false;
  cfg.dropout = 0.0;
  policy::PolicyModel model(cfg, 3);

  GridState s = new_game(MapSpec::bundled("basesWorkers8x8"), 0);
  ObservationTensor obs = observe(s, PlayerId::P1);
  LegalityMask mask = legality_mask(s, PlayerId::P1);
  policy::EntityLayout lay = policy::extract_entities(obs);

  nn::Tape t;
  std::mt19937_64 rng(7);
  auto fwd = model.forward(t, lay, mask, rng, false);
  REQUIRE(fwd.has_actor);
  CHECK(fwd.masked_logits.rows() == lay.k);
  CHECK(fwd.masked_logits.cols() == kSubActionLogits);

  policy::SampleResult sample = policy::sample_joint(fwd.dist, rng);
  // the differentiable log-prob of the sampled action reproduces the
  // sampling-time value exactly (same additions in the same order)
  nn::Var lp = policy::log_prob_of(fwd.dist, sample.choices);
  CHECK(lp.scalar() == sample.log_prob);

  // factorization: joint equals the sum of per-unit per-component picks
  double manual = 0.0;
  for (int i = 0; i < fwd.dist.num_units; ++i)
    for (int c = 0; c < kNumComponents; ++c)
      if (fwd.dist.valid[c][i])
        manual +=
            fwd.dist.component_log_probs[c].value()(i, sample.choices[i].component[c]);
  CHECK(lp.scalar() == doctest::Approx(manual).epsilon(1e-12));

  // sampled actions always pass the engine mask
  for (int i = 0; i < fwd.dist.num_units; ++i) {
    int pos = fwd.dist.positions[i];
    SubAction a = sample.choices[i].to_sub_action();
    CHECK(mask.bit(pos / 8, pos % 8, static_cast<int>(a.type)));
  }
}

TEST_CASE("critic: single-entity closed form") {
  policy::ModelConfig cfg = small_config();
  policy::PolicyModel model(cfg, 5);
  std::mt19937_64 rng(9);
  int d = cfg.model_dim();

  policy::EntityLayout lay;
  lay.h = lay.w = 2;
  lay.k = 1;
  lay.l = 0;
  lay.m = 0;
  lay.positions = {0};
  lay.features = nn::Mat::Zero(1, kObsFeatures);

  nn::Tape t;
  nn::Mat enc = random_mat(1, d, rng);
  nn::Var value = model.critic_value(t, t.constant(enc), lay);

  const nn::Mat& W = model.params().find("critic.W")->value;
  const nn::Mat& b = model.params().find("critic.b")->value;
  const nn::Mat& aw = model.params().find("critic.agg_w")->value;
  const nn::Mat& ab = model.params().find("critic.agg_b")->value;
  double v = (enc * W)(0, 0) + b(0, 0);
  // one self entity: sum == mean == v; empty groups leave only biases
  double expect = aw(0, 0) * v + aw(0, 1) * v + ab.sum();
  CHECK(value.scalar() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("critic: permutation invariance within groups") {
  policy::ModelConfig cfg = small_config();
  policy::PolicyModel model(cfg, 6);
  std::mt19937_64 rng(10);
  int d = cfg.model_dim();

  policy::EntityLayout lay;
  lay.h = lay.w = 2;
  lay.k = 2;
  lay.l = 1;
  lay.m = 1;
  lay.positions = {0, 1, 2, 3};
  lay.features = nn::Mat::Zero(4, kObsFeatures);

  nn::Mat enc = random_mat(4, d, rng);
  nn::Tape t1;
  double v1 = model.critic_value(t1, t1.constant(enc), lay).scalar();

  nn::Mat swapped = enc;
  swapped.row(0) = enc.row(1);
  swapped.row(1) = enc.row(0);  // both rows belong to the self group
  nn::Tape t2;
  double v2 = model.critic_value(t2, t2.constant(swapped), lay).scalar();
  CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
}

TEST_CASE("full policy gradient check on a 2x2 duel") {
  policy::ModelConfig cfg = small_config();
  policy::PolicyModel model(cfg, 11);

  GridState s = new_game(MapSpec::parse("map tiny 2 2\nworker p1 0 0\nworker p2 1 1\n"), 0);
  ObservationTensor obs = observe(s, PlayerId::P1);
  LegalityMask mask = legality_mask(s, PlayerId::P1);
  policy::EntityLayout lay = policy::extract_entities(obs);
  REQUIRE(lay.k == 1);
  REQUIRE(lay.e() == 2);

  // fixed action: attack the diagonal enemy; pick the first legal bit in
  // every other parameter group so the choice has non-zero probability
  policy::UnitChoice ch;
  for (int c = 0; c < kNumComponents; ++c)
    for (int b = 0; b < kComponentWidths[c]; ++b)
      if (mask.bit(0, 0, component_offset(c) + b)) {
        ch.component[c] = b;
        break;
      }
  ch.component[0] = static_cast<int>(ActionType::Attack);
  ch.component[6] = attack_offset_index(1, 1);
  REQUIRE(mask.bit(0, 0, static_cast<int>(ActionType::Attack)));
  REQUIRE(mask.bit(0, 0, component_offset(6) + ch.component[6]));

  auto loss_value = [&](nn::Tape& t) {
    std::mt19937_64 rng(0);  // dropout off; rng is unused
    auto fwd = model.forward(t, lay, mask, rng, false);
    nn::Var lp = policy::log_prob_of(fwd.dist, {ch});
    nn::Var ent = policy::entropy_of(fwd.dist);
    return add(add(lp, fwd.value), scale(ent, 0.5));
  };

  nn::Tape tape;
  model.params().zero_grads();
  tape.backward(loss_value(tape));

  const double h = 1e-6, tol = 1e-4;
  for (auto* p : model.params().all()) {
    // sample entries to keep runtime in check; heads are checked densely
    Eigen::Index stride = p->value.size() > 200 ? 97 : 1;
    for (Eigen::Index i = 0; i < p->value.size(); i += stride) {
      double orig = p->value(i);
      p->value(i) = orig + h;
      nn::Tape tp;
      double up = loss_value(tp).scalar();
      p->value(i) = orig - h;
      nn::Tape tm;
      double dn = loss_value(tm).scalar();
      p->value(i) = orig;
      double num = (up - dn) / (2.0 * h);
      CAPTURE(p->name);
      CAPTURE(i);
      CHECK(std::abs(num - p->grad(i)) <= tol * std::max(1.0, std::abs(num)));
    }
  }
}
