#include "ert/engine/replay.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ert::engine {

namespace {

void write_actions(std::ostream& out, const JointAction& ja) {
  out << ' ' << ja.size();
  for (const auto& uc : ja) {
    const SubAction& a = uc.action;
    out << ' ' << uc.unit_id << ' ' << static_cast<int>(a.type) << ' '
        << a.move_dir << ' ' << a.harvest_dir << ' ' << a.return_dir << ' '
        << a.produce_dir << ' ' << a.produce_kind << ' ' << a.attack_offset;
  }
}

JointAction read_actions(std::istream& in) {
  std::size_t n;
  if (!(in >> n)) throw std::invalid_argument("replay: truncated action list");
  JointAction ja(n);
  for (auto& uc : ja) {
    int type;
    if (!(in >> uc.unit_id >> type >> uc.action.move_dir >> uc.action.harvest_dir >>
          uc.action.return_dir >> uc.action.produce_dir >> uc.action.produce_kind >>
          uc.action.attack_offset))
      throw std::invalid_argument("replay: truncated action");
    uc.action.type = static_cast<ActionType>(type);
  }
  return ja;
}

void write_events(std::ostream& out, const std::vector<RewardEvent>& evs) {
  out << ' ' << evs.size();
  for (const auto& e : evs) out << ' ' << static_cast<int>(e.kind);
}

std::vector<RewardEvent> read_events(std::istream& in) {
  std::size_t n;
  if (!(in >> n)) throw std::invalid_argument("replay: truncated event list");
  std::vector<RewardEvent> evs(n);
  for (auto& e : evs) {
    int k;
    if (!(in >> k)) throw std::invalid_argument("replay: truncated event");
    e.kind = static_cast<RewardKind>(k);
    e.value = e.kind == RewardKind::Draw ? 0.0 : kRewardValues[k];
  }
  return evs;
}

}  // namespace

std::string format_record(const ReplayRecord& rec) {
  std::ostringstream out;
  out << "step " << rec.tick << " a1";
  write_actions(out, rec.a1);
  out << " a2";
  write_actions(out, rec.a2);
  out << " ev1";
  write_events(out, rec.events_p1);
  out << " ev2";
  write_events(out, rec.events_p2);
  out << " digest " << std::hex << rec.digest;
  return out.str();
}

ReplayRecord parse_record(const std::string& line) {
  std::istringstream in(line);
  std::string tok;
  ReplayRecord rec;
  auto expect = [&](const char* want) {
    if (!(in >> tok) || tok != want)
      throw std::invalid_argument(std::string("replay: expected token ") + want);
  };
  expect("step");
  in >> rec.tick;
  expect("a1");
  rec.a1 = read_actions(in);
  expect("a2");
  rec.a2 = read_actions(in);
  expect("ev1");
  rec.events_p1 = read_events(in);
  expect("ev2");
  rec.events_p2 = read_events(in);
  expect("digest");
  in >> std::hex >> rec.digest;
  return rec;
}

void Replay::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write replay: " + path);
  out << "replay v1 map " << map_name << " seed " << seed;
  if (step_limit > 0) out << " steplimit " << step_limit;
  out << '\n';
  for (const auto& rec : records) out << format_record(rec) << '\n';
  out << "terminal " << static_cast<int>(terminal) << '\n';
}

Replay Replay::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read replay: " + path);
  Replay rep;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("replay: empty file");
  {
    std::istringstream hs(line);
    std::string r, v, m;
    if (!(hs >> r >> v >> m >> rep.map_name) || r != "replay" || v != "v1" || m != "map")
      throw std::invalid_argument("replay: bad header");
    std::string s;
    while (hs >> s) {
      if (s == "seed") hs >> rep.seed;
      else if (s == "steplimit") hs >> rep.step_limit;
      else throw std::invalid_argument("replay: bad header field " + s);
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("terminal", 0) == 0) {
      int t = 0;
      std::istringstream ts(line.substr(8));
      ts >> t;
      rep.terminal = static_cast<TerminalStatus>(t);
      continue;
    }
    rep.records.push_back(parse_record(line));
  }
  return rep;
}

bool verify_replay(const Replay& replay, const UnitStatsTable& stats) {
  GridState state = new_game(MapSpec::bundled(replay.map_name), stats, replay.seed);
  if (replay.step_limit > 0) state.step_limit = replay.step_limit;
  for (const auto& rec : replay.records) {
    step(state, rec.a1, rec.a2);
    if (state.digest() != rec.digest) return false;
  }
  return true;
}

}  // namespace ert::engine
