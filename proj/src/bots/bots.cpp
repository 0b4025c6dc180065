#include "ert/bots/bots.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ert::bots {

using namespace engine;

BotKind bot_kind_from_name(const std::string& name) {
  if (name == "random-biased") return BotKind::RandomBiased;
  if (name == "worker-rush") return BotKind::WorkerRush;
  if (name == "light-rush") return BotKind::LightRush;
  throw std::invalid_argument("unknown bot: " + name);
}

std::string bot_name(BotKind kind) {
  switch (kind) {
    case BotKind::RandomBiased: return "random-biased";
    case BotKind::WorkerRush: return "worker-rush";
    default: return "light-rush";
  }
}

namespace {

struct MaskView {
  const LegalityMask* mask;
  int r, c;
  bool type(ActionType t) const { return mask->bit(r, c, static_cast<int>(t)); }
  bool param(int component, int v) const {
    return mask->bit(r, c, component_offset(component) + v);
  }
};

// Closest enemy by Manhattan distance, ties broken by lower unit id.
const Unit* closest_enemy(const GridState& s, const Unit& u, PlayerId player) {
  const Unit* best = nullptr;
  int best_dist = std::numeric_limits<int>::max();
  for (const auto& e : s.units) {
    if (e.owner != opponent_of(player)) continue;
    int d = std::abs(e.row - u.row) + std::abs(e.col - u.col);
    if (d < best_dist || (d == best_dist && best && e.id < best->id)) {
      best = &e;
      best_dist = d;
    }
  }
  return best;
}

// Attack offset of the closest in-range enemy, or -1.
int best_attack_offset(const GridState& s, const Unit& u, const MaskView& mv) {
  if (!mv.type(ActionType::Attack)) return -1;
  int best = -1, best_dist = std::numeric_limits<int>::max(), best_id = -1;
  for (int off = 0; off < kNumAttackOffsets; ++off) {
    if (!mv.param(6, off)) continue;
    auto [dr, dc] = attack_offset_delta(off);
    const Unit* t = s.unit_at(u.row + dr, u.col + dc);
    if (!t) continue;
    int d = std::abs(dr) + std::abs(dc);
    if (d < best_dist || (d == best_dist && t->id < best_id)) {
      best = off;
      best_dist = d;
      best_id = t->id;
    }
  }
  return best;
}

// Greedy Manhattan step toward (tr, tc): reduce the row delta first, then
// the column delta, then fall back to any legal move.
int move_dir_toward(const MaskView& mv, int r, int c, int tr, int tc) {
  if (!mv.type(ActionType::Move)) return -1;
  std::vector<int> prefs;
  if (tr < r) prefs.push_back(0);
  if (tr > r) prefs.push_back(2);
  if (tc > c) prefs.push_back(1);
  if (tc < c) prefs.push_back(3);
  for (int d = 0; d < kNumDirections; ++d)
    if (std::find(prefs.begin(), prefs.end(), d) == prefs.end()) prefs.push_back(d);
  for (int d : prefs)
    if (mv.param(1, d)) return d;
  return -1;
}

int first_legal_param(const MaskView& mv, int component, int count) {
  for (int v = 0; v < count; ++v)
    if (mv.param(component, v)) return v;
  return -1;
}

const Unit* closest_mine(const GridState& s, const Unit& u) {
  const Unit* best = nullptr;
  int best_dist = std::numeric_limits<int>::max();
  for (const auto& m : s.units) {
    if (m.kind != UnitKind::Resource || m.carried_resources == 0) continue;
    int d = std::abs(m.row - u.row) + std::abs(m.col - u.col);
    if (d < best_dist || (d == best_dist && best && m.id < best->id)) {
      best = &m;
      best_dist = d;
    }
  }
  return best;
}

const Unit* own_base(const GridState& s, PlayerId player) {
  for (const auto& b : s.units)
    if (b.owner == player && b.kind == UnitKind::Base) return &b;
  return nullptr;
}

// Harvest-duty behavior shared by both rush bots.
SubAction harvester_action(const GridState& s, const Unit& u, PlayerId player,
                           const MaskView& mv) {
  SubAction a;
  if (u.carried_resources > 0) {
    int d = first_legal_param(mv, 3, kNumDirections);
    if (mv.type(ActionType::Return) && d >= 0) {
      a.type = ActionType::Return;
      a.return_dir = d;
      return a;
    }
    if (const Unit* base = own_base(s, player)) {
      int md = move_dir_toward(mv, u.row, u.col, base->row, base->col);
      if (md >= 0) {
        a.type = ActionType::Move;
        a.move_dir = md;
      }
    }
    return a;
  }
  int hd = first_legal_param(mv, 2, kNumDirections);
  if (mv.type(ActionType::Harvest) && hd >= 0) {
    a.type = ActionType::Harvest;
    a.harvest_dir = hd;
    return a;
  }
  if (const Unit* mine = closest_mine(s, u)) {
    int md = move_dir_toward(mv, u.row, u.col, mine->row, mine->col);
    if (md >= 0) {
      a.type = ActionType::Move;
      a.move_dir = md;
    }
  }
  return a;
}

SubAction attacker_action(const GridState& s, const Unit& u, PlayerId player,
                          const MaskView& mv) {
  SubAction a;
  int off = best_attack_offset(s, u, mv);
  if (off >= 0) {
    a.type = ActionType::Attack;
    a.attack_offset = off;
    return a;
  }
  if (const Unit* enemy = closest_enemy(s, u, player)) {
    int md = move_dir_toward(mv, u.row, u.col, enemy->row, enemy->col);
    if (md >= 0) {
      a.type = ActionType::Move;
      a.move_dir = md;
    }
  }
  return a;
}

}  // namespace

JointAction act_random_biased(const GridState& state, PlayerId player,
                              std::mt19937_64& rng) {
  LegalityMask mask = legality_mask(state, player);
  JointAction ja;
  for (const auto& u : state.units) {
    if (u.owner != player) continue;
    MaskView mv{&mask, u.row, u.col};
    struct Option {
      SubAction action;
      int weight;
    };
    std::vector<Option> options;
    if (mv.type(ActionType::Move))
      for (int d = 0; d < kNumDirections; ++d)
        if (mv.param(1, d)) {
          SubAction a;
          a.type = ActionType::Move;
          a.move_dir = d;
          options.push_back({a, 1});
        }
    if (mv.type(ActionType::Harvest))
      for (int d = 0; d < kNumDirections; ++d)
        if (mv.param(2, d)) {
          SubAction a;
          a.type = ActionType::Harvest;
          a.harvest_dir = d;
          options.push_back({a, 5});
        }
    if (mv.type(ActionType::Return))
      for (int d = 0; d < kNumDirections; ++d)
        if (mv.param(3, d)) {
          SubAction a;
          a.type = ActionType::Return;
          a.return_dir = d;
          options.push_back({a, 1});
        }
    if (mv.type(ActionType::Produce))
      for (int d = 0; d < kNumDirections; ++d) {
        if (!mv.param(4, d)) continue;
        for (int k = 0; k < kNumUnitKinds; ++k)
          if (mv.param(5, k)) {
            SubAction a;
            a.type = ActionType::Produce;
            a.produce_dir = d;
            a.produce_kind = k;
            options.push_back({a, 1});
          }
      }
    if (mv.type(ActionType::Attack))
      for (int off = 0; off < kNumAttackOffsets; ++off)
        if (mv.param(6, off)) {
          SubAction a;
          a.type = ActionType::Attack;
          a.attack_offset = off;
          options.push_back({a, 5});
        }

    SubAction chosen;  // NOOP when no other option exists
    if (!options.empty()) {
      long total = 0;
      for (const auto& o : options) total += o.weight;
      long pickv = static_cast<long>(rng() % static_cast<unsigned long>(total));
      for (const auto& o : options) {
        pickv -= o.weight;
        if (pickv < 0) {
          chosen = o.action;
          break;
        }
      }
    }
    ja.push_back({u.id, chosen});
  }
  return ja;
}

JointAction act_worker_rush(const GridState& state, PlayerId player,
                            std::mt19937_64& rng) {
  (void)rng;
  LegalityMask mask = legality_mask(state, player);
  JointAction ja;
  int harvester_id = -1;
  for (const auto& u : state.units)
    if (u.owner == player && u.kind == UnitKind::Worker &&
        (harvester_id < 0 || u.id < harvester_id))
      harvester_id = u.id;
  for (const auto& u : state.units) {
    if (u.owner != player) continue;
    MaskView mv{&mask, u.row, u.col};
    SubAction a;
    if (u.busy) {
      ja.push_back({u.id, a});
      continue;
    }
    if (u.kind == UnitKind::Base) {
      int d = first_legal_param(mv, 4, kNumDirections);
      if (mv.type(ActionType::Produce) && d >= 0 &&
          mv.param(5, static_cast<int>(UnitKind::Worker))) {
        a.type = ActionType::Produce;
        a.produce_dir = d;
        a.produce_kind = static_cast<int>(UnitKind::Worker);
      }
    } else if (u.id == harvester_id) {
      a = harvester_action(state, u, player, mv);
    } else {
      a = attacker_action(state, u, player, mv);
    }
    ja.push_back({u.id, a});
  }
  return ja;
}

JointAction act_light_rush(const GridState& state, PlayerId player,
                           std::mt19937_64& rng) {
  (void)rng;
  LegalityMask mask = legality_mask(state, player);
  JointAction ja;
  int harvester_id = -1, builder_id = -1, worker_count = 0;
  bool have_barracks = false;
  for (const auto& u : state.units) {
    if (u.owner != player) continue;
    if (u.kind == UnitKind::Barracks) have_barracks = true;
    if (u.busy && u.busy->action.type == ActionType::Produce &&
        u.busy->action.produce_kind == static_cast<int>(UnitKind::Barracks))
      have_barracks = true;  // already under construction
    if (u.kind == UnitKind::Worker) {
      ++worker_count;
      if (harvester_id < 0 || u.id < harvester_id) harvester_id = u.id;
    }
  }
  for (const auto& u : state.units)
    if (u.owner == player && u.kind == UnitKind::Worker && u.id != harvester_id &&
        (builder_id < 0 || u.id < builder_id))
      builder_id = u.id;

  for (const auto& u : state.units) {
    if (u.owner != player) continue;
    MaskView mv{&mask, u.row, u.col};
    SubAction a;
    if (u.busy) {
      ja.push_back({u.id, a});
      continue;
    }
    if (u.kind == UnitKind::Base) {
      int d = first_legal_param(mv, 4, kNumDirections);
      if (worker_count < 2 && mv.type(ActionType::Produce) && d >= 0 &&
          mv.param(5, static_cast<int>(UnitKind::Worker))) {
        a.type = ActionType::Produce;
        a.produce_dir = d;
        a.produce_kind = static_cast<int>(UnitKind::Worker);
      }
    } else if (u.kind == UnitKind::Barracks) {
      int d = first_legal_param(mv, 4, kNumDirections);
      if (mv.type(ActionType::Produce) && d >= 0 &&
          mv.param(5, static_cast<int>(UnitKind::Light))) {
        a.type = ActionType::Produce;
        a.produce_dir = d;
        a.produce_kind = static_cast<int>(UnitKind::Light);
      }
    } else if (u.id == harvester_id) {
      a = harvester_action(state, u, player, mv);
    } else if (u.kind == UnitKind::Worker && u.id == builder_id && !have_barracks &&
               mv.type(ActionType::Produce) &&
               mv.param(5, static_cast<int>(UnitKind::Barracks))) {
      int d = first_legal_param(mv, 4, kNumDirections);
      if (d >= 0) {
        a.type = ActionType::Produce;
        a.produce_dir = d;
        a.produce_kind = static_cast<int>(UnitKind::Barracks);
      }
    } else {
      a = attacker_action(state, u, player, mv);
    }
    ja.push_back({u.id, a});
  }
  return ja;
}

JointAction act(BotKind kind, const GridState& state, PlayerId player,
                std::mt19937_64& rng) {
  switch (kind) {
    case BotKind::RandomBiased: return act_random_biased(state, player, rng);
    case BotKind::WorkerRush: return act_worker_rush(state, player, rng);
    default: return act_light_rush(state, player, rng);
  }
}

}  // namespace ert::bots
