#pragma once

// Offline summaries of a finished run: CSV return/win-rate series from the
// metrics stream and an entity-count distribution recovered from replays.

#include <string>
#include <vector>

namespace ert::run {

struct StatsResult {
  long metrics_records = 0;
  long malformed_records = 0;   // skipped metrics lines
  long replays = 0;
  long malformed_replays = 0;   // unreadable or non-verifying replay files
  std::vector<long> entity_histogram;  // index = entities at a decision point
  int entity_max = 0;
  double entity_mean = 0.0;
};

// Reads <input_dir>/metrics.jsonl plus every *.replay file under input_dir
// (recursively) and writes returns.csv, winrate.csv, and
// entity_histogram.csv into out_dir.
StatsResult summarize_run(const std::string& input_dir,
                          const std::string& out_dir, double ema_alpha = 0.1);

}  // namespace ert::run
