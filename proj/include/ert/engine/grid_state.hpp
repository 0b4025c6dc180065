#pragma once

#include "ert/engine/map_spec.hpp"
#include "ert/engine/types.hpp"
#include "ert/engine/unit_stats.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ert::engine {

struct StepResult {
  std::array<std::vector<RewardEvent>, 2> events;  // per player
  TerminalStatus terminal = TerminalStatus::Ongoing;
};

// Authoritative game state. Value type: copying yields an independent game.
class GridState {
 public:
  GridState() = default;

  int h = 0, w = 0;
  long tick = 0;
  int step_limit = 2000;
  std::string map_id;
  UnitStatsTable stats;
  std::vector<Unit> units;                 // ordered by ascending id
  std::array<int, 2> stockpile{0, 0};      // resources available for production
  std::array<long, 2> escrow{0, 0};        // committed to in-flight production
  std::array<long, 2> spent_completed{0, 0};
  std::array<long, 2> lost{0, 0};          // cargo destroyed with its carrier
  long coercions = 0;   // mask-illegal sub-actions coerced to NOOP
  long conflicts = 0;   // legal actions cancelled by issue/completion contention
  int next_unit_id = 0;

  const Unit* unit_at(int r, int c) const;
  Unit* unit_at(int r, int c);
  const Unit* unit_by_id(int id) const;
  bool in_bounds(int r, int c) const { return r >= 0 && r < h && c >= 0 && c < w; }
  bool cell_free(int r, int c) const { return in_bounds(r, c) && unit_at(r, c) == nullptr; }

  int unit_count(PlayerId p) const;
  long mine_resources_total() const;
  long carried_total() const;
  // Conserved quantity: mines + carried + stockpiles + escrow + spent + lost.
  long resource_ledger_total() const;

  std::string serialize() const;        // canonical text form
  std::uint64_t digest() const;         // FNV-1a over serialize()

 private:
  mutable std::vector<int> occupancy_;  // cell -> index into units, -1 if free
  mutable bool occupancy_valid_ = false;
  void rebuild_occupancy() const;
  friend GridState new_game(const MapSpec&, const UnitStatsTable&, unsigned);
  friend StepResult step(GridState&, const JointAction&, const JointAction&);
  void invalidate() { occupancy_valid_ = false; }
};

GridState new_game(const MapSpec& spec, const UnitStatsTable& stats, unsigned seed);
inline GridState new_game(const MapSpec& spec, unsigned seed) {
  return new_game(spec, UnitStatsTable::defaults(), seed);
}

ObservationTensor observe(const GridState& state, PlayerId player);
LegalityMask legality_mask(const GridState& state, PlayerId player);

// Advances one tick with both players' joint actions. Mask-illegal
// sub-actions are coerced to NOOP and counted on the state.
StepResult step(GridState& state, const JointAction& a1, const JointAction& a2);

}  // namespace ert::engine
