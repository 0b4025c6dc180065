#pragma once

// Line-delimited replay format, one record per tick. Byte-exact layout is
// documented in docs/replay_format.md.

#include "ert/engine/grid_state.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ert::engine {

struct ReplayRecord {
  long tick = 0;
  JointAction a1, a2;
  std::vector<RewardEvent> events_p1, events_p2;
  std::uint64_t digest = 0;  // digest of the state after the tick
};

struct Replay {
  std::string map_name;
  unsigned seed = 0;
  int step_limit = 0;  // 0: the map's own limit
  std::vector<ReplayRecord> records;
  TerminalStatus terminal = TerminalStatus::Ongoing;

  void save(const std::string& path) const;
  static Replay load(const std::string& path);
};

std::string format_record(const ReplayRecord& rec);
ReplayRecord parse_record(const std::string& line);

// Re-runs the recorded game through the engine and checks every state
// digest. Returns false on the first mismatch.
bool verify_replay(const Replay& replay, const UnitStatsTable& stats);

}  // namespace ert::engine
