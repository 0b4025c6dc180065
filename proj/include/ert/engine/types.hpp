#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ert::engine {

enum class PlayerId : int { P1 = 0, P2 = 1, Neutral = 2 };

inline PlayerId opponent_of(PlayerId p) {
  return p == PlayerId::P1 ? PlayerId::P2 : PlayerId::P1;
}

// 7 concrete kinds; the observation's 8-wide one-hot adds a "none" class.
enum class UnitKind : int {
  Resource = 0,
  Base = 1,
  Barracks = 2,
  Worker = 3,
  Light = 4,
  Heavy = 5,
  Ranged = 6,
};
inline constexpr int kNumUnitKinds = 7;

enum class ActionType : int {
  Noop = 0,
  Move = 1,
  Harvest = 2,
  Return = 3,
  Produce = 4,
  Attack = 5,
};
inline constexpr int kNumActionTypes = 6;

// Orthogonal directions: 0 north (row-1), 1 east, 2 south, 3 west.
inline constexpr int kNumDirections = 4;
inline constexpr int kDirDelta[4][2] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};

// Relative attack window is 7x7 centered on the acting unit.
inline constexpr int kAttackWindow = 7;
inline constexpr int kAttackRadius = kAttackWindow / 2;
inline constexpr int kNumAttackOffsets = kAttackWindow * kAttackWindow;

// Factorized sub-action logit layout: 6+4+4+4+4+7+49 = 78.
inline constexpr int kComponentWidths[7] = {
    kNumActionTypes, kNumDirections, kNumDirections, kNumDirections,
    kNumDirections,  kNumUnitKinds,  kNumAttackOffsets};
inline constexpr int kNumComponents = 7;
inline constexpr int kSubActionLogits = 78;

inline constexpr int component_offset(int c) {
  int off = 0;
  for (int i = 0; i < c; ++i) off += kComponentWidths[i];
  return off;
}

struct SubAction {
  ActionType type = ActionType::Noop;
  int move_dir = 0;
  int harvest_dir = 0;
  int return_dir = 0;
  int produce_dir = 0;
  int produce_kind = 0;                       // index into UnitKind
  int attack_offset = 0;                      // index into the 7x7 window

  int component(int c) const {
    switch (c) {
      case 0: return static_cast<int>(type);
      case 1: return move_dir;
      case 2: return harvest_dir;
      case 3: return return_dir;
      case 4: return produce_dir;
      case 5: return produce_kind;
      default: return attack_offset;
    }
  }
  void set_component(int c, int v) {
    switch (c) {
      case 0: type = static_cast<ActionType>(v); break;
      case 1: move_dir = v; break;
      case 2: harvest_dir = v; break;
      case 3: return_dir = v; break;
      case 4: produce_dir = v; break;
      case 5: produce_kind = v; break;
      default: attack_offset = v; break;
    }
  }
};

inline std::pair<int, int> attack_offset_delta(int offset) {
  return {offset / kAttackWindow - kAttackRadius,
          offset % kAttackWindow - kAttackRadius};
}
inline int attack_offset_index(int dr, int dc) {
  return (dr + kAttackRadius) * kAttackWindow + (dc + kAttackRadius);
}

struct PendingAction {
  SubAction action;
  int remaining_ticks = 0;
};

struct Unit {
  int id = -1;
  PlayerId owner = PlayerId::Neutral;
  UnitKind kind = UnitKind::Resource;
  int hp = 0;
  int carried_resources = 0;   // worker cargo, or remaining contents of a mine
  int row = 0, col = 0;
  std::optional<PendingAction> busy;
};

struct UnitCommand {
  int unit_id = -1;
  SubAction action;
};
using JointAction = std::vector<UnitCommand>;

enum class RewardKind : int {
  Win = 0,
  Loss = 1,
  Draw = 2,
  Harvest = 3,
  Attack = 4,
  BuildBuilding = 5,
  BuildWorker = 6,
  BuildCombat = 7,
};
inline constexpr int kNumRewardKinds = 8;

struct RewardEvent {
  RewardKind kind;
  double value;
};

inline constexpr double kRewardValues[kNumRewardKinds] = {10.0, -10.0, 0.0, 1.0,
                                                          1.0,  0.2,   1.0, 4.0};

enum class TerminalStatus : int { Ongoing = 0, P1Win = 1, P2Win = 2, Draw = 3 };

// Observation feature groups: 5 HP, 5 resources, 3 owner, 8 unit type,
// 6 current action. Owner encoding is egocentric: [self, none, opponent].
inline constexpr int kObsFeatures = 27;
inline constexpr int kObsGroupWidths[5] = {5, 5, 3, 8, 6};

struct ObservationTensor {
  int h = 0, w = 0;
  std::vector<std::uint8_t> data;  // h*w*27, row-major cells

  std::uint8_t& at(int r, int c, int f) { return data[(r * w + c) * kObsFeatures + f]; }
  std::uint8_t at(int r, int c, int f) const {
    return data[(r * w + c) * kObsFeatures + f];
  }
};

struct LegalityMask {
  int h = 0, w = 0;
  std::vector<std::uint8_t> source;     // h*w
  std::vector<std::uint8_t> component;  // h*w*78

  bool source_at(int r, int c) const { return source[r * w + c] != 0; }
  bool bit(int r, int c, int b) const {
    return component[(r * w + c) * kSubActionLogits + b] != 0;
  }
  void set_bit(int r, int c, int b) {
    component[(r * w + c) * kSubActionLogits + b] = 1;
  }
};

std::string player_name(PlayerId p);
std::string unit_kind_name(UnitKind k);
std::string action_type_name(ActionType a);
std::string reward_kind_name(RewardKind k);

}  // namespace ert::engine
