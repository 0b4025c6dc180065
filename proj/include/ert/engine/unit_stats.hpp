#pragma once

#include "ert/engine/types.hpp"

#include <array>
#include <string>

namespace ert::engine {

// Per-kind combat and production statistics. Values default to the public
// microRTS tables and may be overridden from a key/value config file.
struct KindStats {
  int cost = 0;
  int max_hp = 0;
  int damage = 0;
  int attack_range = 0;
  int produce_time = 0;  // ticks needed to produce a unit of this kind
  int move_time = 0;     // 0 means the kind cannot move
  int attack_time = 0;
  int harvest_time = 0;
  int return_time = 0;
  bool can_attack = false;
  bool can_harvest = false;
  std::array<bool, kNumUnitKinds> produces{};  // kinds this unit can build
};

struct UnitStatsTable {
  std::array<KindStats, kNumUnitKinds> kinds;

  const KindStats& of(UnitKind k) const { return kinds[static_cast<int>(k)]; }

  static UnitStatsTable defaults();
  // Parses "kind.field = value" lines; unknown keys are an error.
  static UnitStatsTable from_file(const std::string& path);
};

}  // namespace ert::engine
