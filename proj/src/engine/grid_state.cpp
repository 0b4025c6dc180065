#include "ert/engine/grid_state.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ert::engine {

void GridState::rebuild_occupancy() const {
  occupancy_.assign(static_cast<std::size_t>(h) * w, -1);
  for (std::size_t i = 0; i < units.size(); ++i)
    occupancy_[units[i].row * w + units[i].col] = static_cast<int>(i);
  occupancy_valid_ = true;
}

const Unit* GridState::unit_at(int r, int c) const {
  if (!in_bounds(r, c)) return nullptr;
  if (!occupancy_valid_) rebuild_occupancy();
  int i = occupancy_[r * w + c];
  return i < 0 ? nullptr : &units[i];
}

Unit* GridState::unit_at(int r, int c) {
  return const_cast<Unit*>(static_cast<const GridState*>(this)->unit_at(r, c));
}

const Unit* GridState::unit_by_id(int id) const {
  for (const auto& u : units)
    if (u.id == id) return &u;
  return nullptr;
}

int GridState::unit_count(PlayerId p) const {
  int n = 0;
  for (const auto& u : units)
    if (u.owner == p) ++n;
  return n;
}

long GridState::mine_resources_total() const {
  long n = 0;
  for (const auto& u : units)
    if (u.kind == UnitKind::Resource) n += u.carried_resources;
  return n;
}

long GridState::carried_total() const {
  long n = 0;
  for (const auto& u : units)
    if (u.kind != UnitKind::Resource) n += u.carried_resources;
  return n;
}

long GridState::resource_ledger_total() const {
  return mine_resources_total() + carried_total() + stockpile[0] + stockpile[1] +
         escrow[0] + escrow[1] + spent_completed[0] + spent_completed[1] +
         lost[0] + lost[1];
}

std::string GridState::serialize() const {
  std::ostringstream out;
  out << "map " << map_id << ' ' << h << ' ' << w << '\n';
  out << "tick " << tick << " limit " << step_limit << '\n';
  out << "stockpile " << stockpile[0] << ' ' << stockpile[1] << '\n';
  out << "escrow " << escrow[0] << ' ' << escrow[1] << '\n';
  out << "spent " << spent_completed[0] << ' ' << spent_completed[1] << '\n';
  out << "lost " << lost[0] << ' ' << lost[1] << '\n';
  for (const auto& u : units) {
    out << "unit " << u.id << ' ' << player_name(u.owner) << ' '
        << unit_kind_name(u.kind) << ' ' << u.hp << ' ' << u.carried_resources
        << ' ' << u.row << ' ' << u.col;
    if (u.busy) {
      const SubAction& a = u.busy->action;
      out << " busy " << action_type_name(a.type) << ' ' << a.move_dir << ' '
          << a.harvest_dir << ' ' << a.return_dir << ' ' << a.produce_dir << ' '
          << a.produce_kind << ' ' << a.attack_offset << ' '
          << u.busy->remaining_ticks;
    }
    out << '\n';
  }
  return out.str();
}

std::uint64_t GridState::digest() const {
  std::string s = serialize();
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

GridState new_game(const MapSpec& spec, const UnitStatsTable& stats, unsigned seed) {
  (void)seed;  // layouts are deterministic; seed is part of run provenance
  spec.validate();
  GridState s;
  s.h = spec.h;
  s.w = spec.w;
  s.step_limit = spec.step_limit;
  s.map_id = spec.name;
  s.stats = stats;
  s.stockpile = {spec.initial_stockpile, spec.initial_stockpile};
  for (const auto& p : spec.placements) {
    Unit u;
    u.id = s.next_unit_id++;
    u.owner = p.owner;
    u.kind = p.kind;
    u.row = p.row;
    u.col = p.col;
    if (p.kind == UnitKind::Resource) {
      u.hp = 0;
      u.carried_resources = p.resources;
    } else {
      u.hp = stats.of(p.kind).max_hp;
    }
    s.units.push_back(u);
  }
  s.invalidate();
  return s;
}

namespace {

int clamp_bucket(int v) { return v < 0 ? 0 : (v > 4 ? 4 : v); }

}  // namespace

ObservationTensor observe(const GridState& state, PlayerId player) {
  if (player != PlayerId::P1 && player != PlayerId::P2)
    throw std::invalid_argument("observe: player must be P1 or P2");
  ObservationTensor obs;
  obs.h = state.h;
  obs.w = state.w;
  obs.data.assign(static_cast<std::size_t>(state.h) * state.w * kObsFeatures, 0);
  // Defaults for empty cells: every group selects its zero/none class.
  for (int r = 0; r < state.h; ++r)
    for (int c = 0; c < state.w; ++c) {
      obs.at(r, c, 0) = 1;       // 0 HP
      obs.at(r, c, 5) = 1;       // 0 resources
      obs.at(r, c, 10 + 1) = 1;  // no owner
      obs.at(r, c, 13 + 0) = 1;  // no unit
      obs.at(r, c, 21 + 0) = 1;  // no current action
    }
  for (const auto& u : state.units) {
    int r = u.row, c = u.col;
    std::fill_n(&obs.at(r, c, 0), kObsFeatures, std::uint8_t{0});
    obs.at(r, c, clamp_bucket(u.hp)) = 1;
    int res;
    if (u.kind == UnitKind::Resource) {
      res = u.carried_resources;
    } else if (u.kind == UnitKind::Base) {
      // Stockpile surfaces through the base cell, mirroring microRTS.
      res = state.stockpile[static_cast<int>(u.owner)];
    } else {
      res = u.carried_resources;
    }
    obs.at(r, c, 5 + clamp_bucket(res)) = 1;
    int owner_slot = u.owner == PlayerId::Neutral ? 1 : (u.owner == player ? 0 : 2);
    obs.at(r, c, 10 + owner_slot) = 1;
    obs.at(r, c, 13 + 1 + static_cast<int>(u.kind)) = 1;
    int action_slot = u.busy ? static_cast<int>(u.busy->action.type) : 0;
    obs.at(r, c, 21 + action_slot) = 1;
  }
  return obs;
}

namespace {

// Distance used for attack range checks: Chebyshev, matching the square
// 7x7 relative attack window.
int chebyshev(int dr, int dc) { return std::max(std::abs(dr), std::abs(dc)); }

}  // namespace

LegalityMask legality_mask(const GridState& state, PlayerId player) {
  LegalityMask mask;
  mask.h = state.h;
  mask.w = state.w;
  mask.source.assign(static_cast<std::size_t>(state.h) * state.w, 0);
  mask.component.assign(
      static_cast<std::size_t>(state.h) * state.w * kSubActionLogits, 0);
  for (const auto& u : state.units) {
    if (u.owner != player) continue;
    int r = u.row, c = u.col;
    mask.source[r * state.w + c] = 1;
    mask.set_bit(r, c, static_cast<int>(ActionType::Noop));
    if (u.busy) continue;  // durative-action lockout: only NOOP
    const KindStats& ks = state.stats.of(u.kind);

    if (ks.move_time > 0) {
      bool any = false;
      for (int d = 0; d < kNumDirections; ++d) {
        int nr = r + kDirDelta[d][0], nc = c + kDirDelta[d][1];
        if (state.cell_free(nr, nc)) {
          mask.set_bit(r, c, component_offset(1) + d);
          any = true;
        }
      }
      if (any) mask.set_bit(r, c, static_cast<int>(ActionType::Move));
    }

    if (ks.can_harvest && u.carried_resources == 0) {
      bool any = false;
      for (int d = 0; d < kNumDirections; ++d) {
        int nr = r + kDirDelta[d][0], nc = c + kDirDelta[d][1];
        const Unit* t = state.unit_at(nr, nc);
        if (t && t->kind == UnitKind::Resource && t->carried_resources > 0) {
          mask.set_bit(r, c, component_offset(2) + d);
          any = true;
        }
      }
      if (any) mask.set_bit(r, c, static_cast<int>(ActionType::Harvest));
    }

    if (ks.can_harvest && u.carried_resources > 0) {
      bool any = false;
      for (int d = 0; d < kNumDirections; ++d) {
        int nr = r + kDirDelta[d][0], nc = c + kDirDelta[d][1];
        const Unit* t = state.unit_at(nr, nc);
        if (t && t->kind == UnitKind::Base && t->owner == player) {
          mask.set_bit(r, c, component_offset(3) + d);
          any = true;
        }
      }
      if (any) mask.set_bit(r, c, static_cast<int>(ActionType::Return));
    }

    bool any_kind = false;
    for (int k = 0; k < kNumUnitKinds; ++k) {
      if (ks.produces[k] &&
          state.stockpile[static_cast<int>(player)] >=
              state.stats.kinds[k].cost) {
        any_kind = true;
      }
    }
    if (any_kind) {
      bool any_dir = false;
      for (int d = 0; d < kNumDirections; ++d) {
        int nr = r + kDirDelta[d][0], nc = c + kDirDelta[d][1];
        if (state.cell_free(nr, nc)) {
          mask.set_bit(r, c, component_offset(4) + d);
          any_dir = true;
        }
      }
      if (any_dir) {
        for (int k = 0; k < kNumUnitKinds; ++k)
          if (ks.produces[k] &&
              state.stockpile[static_cast<int>(player)] >= state.stats.kinds[k].cost)
            mask.set_bit(r, c, component_offset(5) + k);
        mask.set_bit(r, c, static_cast<int>(ActionType::Produce));
      }
    }

    if (ks.can_attack) {
      bool any = false;
      PlayerId enemy = opponent_of(player);
      for (int off = 0; off < kNumAttackOffsets; ++off) {
        auto [dr, dc] = attack_offset_delta(off);
        if (chebyshev(dr, dc) > ks.attack_range) continue;
        const Unit* t = state.unit_at(r + dr, c + dc);
        if (t && t->owner == enemy) {
          mask.set_bit(r, c, component_offset(6) + off);
          any = true;
        }
      }
      if (any) mask.set_bit(r, c, static_cast<int>(ActionType::Attack));
    }
  }
  return mask;
}

namespace {

int action_duration(const GridState& s, const Unit& u, const SubAction& a) {
  const KindStats& ks = s.stats.of(u.kind);
  switch (a.type) {
    case ActionType::Move: return ks.move_time;
    case ActionType::Harvest: return ks.harvest_time;
    case ActionType::Return: return ks.return_time;
    case ActionType::Produce: return s.stats.kinds[a.produce_kind].produce_time;
    case ActionType::Attack: return ks.attack_time;
    default: return 0;
  }
}

bool action_passes_mask(const LegalityMask& mask, const Unit& u, const SubAction& a) {
  int r = u.row, c = u.col;
  if (!mask.bit(r, c, static_cast<int>(a.type))) return false;
  switch (a.type) {
    case ActionType::Move:
      return mask.bit(r, c, component_offset(1) + a.move_dir);
    case ActionType::Harvest:
      return mask.bit(r, c, component_offset(2) + a.harvest_dir);
    case ActionType::Return:
      return mask.bit(r, c, component_offset(3) + a.return_dir);
    case ActionType::Produce:
      return mask.bit(r, c, component_offset(4) + a.produce_dir) &&
             mask.bit(r, c, component_offset(5) + a.produce_kind);
    case ActionType::Attack:
      return mask.bit(r, c, component_offset(6) + a.attack_offset);
    default:
      return true;
  }
}

void remove_unit(GridState& s, int id, std::array<std::vector<RewardEvent>, 2>&) {
  for (std::size_t i = 0; i < s.units.size(); ++i) {
    if (s.units[i].id != id) continue;
    Unit& u = s.units[i];
    // Refund escrow from an in-flight production so resources stay accounted.
    if (u.busy && u.busy->action.type == ActionType::Produce &&
        u.owner != PlayerId::Neutral) {
      int cost = s.stats.kinds[u.busy->action.produce_kind].cost;
      s.stockpile[static_cast<int>(u.owner)] += cost;
      s.escrow[static_cast<int>(u.owner)] -= cost;
    }
    if (u.kind != UnitKind::Resource && u.owner != PlayerId::Neutral)
      s.lost[static_cast<int>(u.owner)] += u.carried_resources;
    s.units.erase(s.units.begin() + static_cast<long>(i));
    return;
  }
}

}  // namespace

StepResult step(GridState& state, const JointAction& a1, const JointAction& a2) {
  StepResult result;
  if (state.tick >= state.step_limit)
    throw std::logic_error("step: episode already at step limit");

  std::array<LegalityMask, 2> masks = {legality_mask(state, PlayerId::P1),
                                       legality_mask(state, PlayerId::P2)};

  // Validate shape and merge both players' commands ordered by unit id.
  struct Cmd {
    int unit_id;
    PlayerId player;
    SubAction action;
  };
  std::vector<Cmd> cmds;
  auto collect = [&](const JointAction& ja, PlayerId p) {
    std::vector<int> seen;
    for (const auto& uc : ja) {
      const Unit* u = state.unit_by_id(uc.unit_id);
      if (!u || u->owner != p)
        throw std::invalid_argument("step: command for a unit not owned by player");
      if (std::find(seen.begin(), seen.end(), uc.unit_id) != seen.end())
        throw std::invalid_argument("step: duplicate command for a unit");
      seen.push_back(uc.unit_id);
      const SubAction& a = uc.action;
      auto bad = [](int v, int lo, int hi) { return v < lo || v >= hi; };
      if (bad(static_cast<int>(a.type), 0, kNumActionTypes) ||
          bad(a.move_dir, 0, 4) || bad(a.harvest_dir, 0, 4) ||
          bad(a.return_dir, 0, 4) || bad(a.produce_dir, 0, 4) ||
          bad(a.produce_kind, 0, kNumUnitKinds) ||
          bad(a.attack_offset, 0, kNumAttackOffsets))
        throw std::invalid_argument("step: malformed sub-action");
      cmds.push_back({uc.unit_id, p, a});
    }
  };
  collect(a1, PlayerId::P1);
  collect(a2, PlayerId::P2);
  std::sort(cmds.begin(), cmds.end(),
            [](const Cmd& a, const Cmd& b) { return a.unit_id < b.unit_id; });

  // Issue phase. Mask violations coerce to NOOP; intra-tick stockpile
  // contention cancels the later (higher id) unit's action.
  for (const auto& cmd : cmds) {
    if (cmd.action.type == ActionType::Noop) continue;
    Unit* u = nullptr;
    for (auto& cand : state.units)
      if (cand.id == cmd.unit_id) u = &cand;
    if (!u) continue;
    if (u->busy || !action_passes_mask(masks[static_cast<int>(cmd.player)], *u,
                                       cmd.action)) {
      ++state.coercions;
      continue;
    }
    if (cmd.action.type == ActionType::Produce) {
      int cost = state.stats.kinds[cmd.action.produce_kind].cost;
      int pi = static_cast<int>(cmd.player);
      if (state.stockpile[pi] < cost) {
        ++state.conflicts;  // exhausted by an earlier issue this tick
        continue;
      }
      state.stockpile[pi] -= cost;
      state.escrow[pi] += cost;
    }
    u->busy = PendingAction{cmd.action, action_duration(state, *u, cmd.action)};
  }

  // Tick phase: durative actions count down; completions apply in id order.
  std::vector<int> completed;
  for (auto& u : state.units) {
    if (!u.busy) continue;
    if (--u.busy->remaining_ticks <= 0) completed.push_back(u.id);
  }
  std::sort(completed.begin(), completed.end());

  for (int id : completed) {
    Unit* u = nullptr;
    for (auto& cand : state.units)
      if (cand.id == id) u = &cand;
    if (!u || !u->busy) continue;  // killed by an earlier completion
    SubAction a = u->busy->action;
    u->busy.reset();
    int pi = static_cast<int>(u->owner);
    switch (a.type) {
      case ActionType::Move: {
        int nr = u->row + kDirDelta[a.move_dir][0];
        int nc = u->col + kDirDelta[a.move_dir][1];
        if (state.cell_free(nr, nc)) {
          u->row = nr;
          u->col = nc;
          state.invalidate();
        } else {
          ++state.conflicts;
        }
        break;
      }
      case ActionType::Harvest: {
        int nr = u->row + kDirDelta[a.harvest_dir][0];
        int nc = u->col + kDirDelta[a.harvest_dir][1];
        Unit* mine = state.unit_at(nr, nc);
        if (mine && mine->kind == UnitKind::Resource && mine->carried_resources > 0 &&
            u->carried_resources == 0) {
          mine->carried_resources -= 1;
          u->carried_resources = 1;
          result.events[pi].push_back(
              {RewardKind::Harvest, kRewardValues[static_cast<int>(RewardKind::Harvest)]});
          if (mine->carried_resources == 0) {
            remove_unit(state, mine->id, result.events);
            state.invalidate();
          }
        } else {
          ++state.conflicts;
        }
        break;
      }
      case ActionType::Return: {
        int nr = u->row + kDirDelta[a.return_dir][0];
        int nc = u->col + kDirDelta[a.return_dir][1];
        const Unit* base = state.unit_at(nr, nc);
        if (base && base->kind == UnitKind::Base && base->owner == u->owner &&
            u->carried_resources > 0) {
          state.stockpile[pi] += u->carried_resources;
          u->carried_resources = 0;
        } else {
          ++state.conflicts;
        }
        break;
      }
      case ActionType::Produce: {
        int nr = u->row + kDirDelta[a.produce_dir][0];
        int nc = u->col + kDirDelta[a.produce_dir][1];
        int cost = state.stats.kinds[a.produce_kind].cost;
        if (state.cell_free(nr, nc)) {
          Unit made;
          made.id = state.next_unit_id++;
          made.owner = u->owner;
          made.kind = static_cast<UnitKind>(a.produce_kind);
          made.hp = state.stats.kinds[a.produce_kind].max_hp;
          made.row = nr;
          made.col = nc;
          state.units.push_back(made);
          state.invalidate();
          state.escrow[pi] -= cost;
          state.spent_completed[pi] += cost;
          RewardKind rk;
          if (made.kind == UnitKind::Worker) rk = RewardKind::BuildWorker;
          else if (made.kind == UnitKind::Base || made.kind == UnitKind::Barracks)
            rk = RewardKind::BuildBuilding;
          else rk = RewardKind::BuildCombat;
          result.events[pi].push_back({rk, kRewardValues[static_cast<int>(rk)]});
        } else {
          ++state.conflicts;
          state.escrow[pi] -= cost;
          state.stockpile[pi] += cost;  // refund the cancelled production
        }
        break;
      }
      case ActionType::Attack: {
        auto [dr, dc] = attack_offset_delta(a.attack_offset);
        Unit* target = state.unit_at(u->row + dr, u->col + dc);
        if (target && target->owner == opponent_of(u->owner)) {
          target->hp -= state.stats.of(u->kind).damage;
          result.events[pi].push_back(
              {RewardKind::Attack, kRewardValues[static_cast<int>(RewardKind::Attack)]});
          if (target->hp <= 0) {
            remove_unit(state, target->id, result.events);
            state.invalidate();
          }
        } else {
          ++state.conflicts;
        }
        break;
      }
      default:
        break;
    }
  }

  state.tick += 1;
  state.invalidate();

  int n1 = state.unit_count(PlayerId::P1);
  int n2 = state.unit_count(PlayerId::P2);
  if (n1 == 0 && n2 == 0) {
    result.terminal = TerminalStatus::Draw;
  } else if (n2 == 0) {
    result.terminal = TerminalStatus::P1Win;
  } else if (n1 == 0) {
    result.terminal = TerminalStatus::P2Win;
  } else if (state.tick >= state.step_limit) {
    result.terminal = TerminalStatus::Draw;
  }
  if (result.terminal == TerminalStatus::P1Win) {
    result.events[0].push_back({RewardKind::Win, kRewardValues[0]});
    result.events[1].push_back({RewardKind::Loss, kRewardValues[1]});
  } else if (result.terminal == TerminalStatus::P2Win) {
    result.events[1].push_back({RewardKind::Win, kRewardValues[0]});
    result.events[0].push_back({RewardKind::Loss, kRewardValues[1]});
  } else if (result.terminal == TerminalStatus::Draw) {
    result.events[0].push_back({RewardKind::Draw, 0.0});
    result.events[1].push_back({RewardKind::Draw, 0.0});
  }
  return result;
}

}  // namespace ert::engine
