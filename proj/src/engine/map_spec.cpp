#include "ert/engine/map_spec.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ert::engine {

namespace {

const char* kBases8x8 = R"(map basesWorkers8x8 8 8
stockpile 5
steplimit 2000
mine 0 0 25
mine 7 7 25
base p1 2 1
worker p1 1 1
base p2 5 6
worker p2 6 6
)";

const char* kBases16x16 = R"(map basesWorkers16x16 16 16
stockpile 5
steplimit 2000
mine 0 0 25
mine 0 1 25
mine 15 15 25
mine 15 14 25
base p1 2 2
worker p1 1 1
base p2 13 13
worker p2 14 14
)";

UnitKind parse_kind(const std::string& s) {
  for (int k = 0; k < kNumUnitKinds; ++k)
    if (unit_kind_name(static_cast<UnitKind>(k)) == s) return static_cast<UnitKind>(k);
  throw std::invalid_argument("map spec: unknown unit kind " + s);
}

PlayerId parse_player(const std::string& s) {
  if (s == "p1") return PlayerId::P1;
  if (s == "p2") return PlayerId::P2;
  throw std::invalid_argument("map spec: unknown player " + s);
}

}  // namespace

MapSpec MapSpec::parse(const std::string& text) {
  MapSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("map spec line " + std::to_string(lineno) + ": " + why);
    };
    if (tok == "map") {
      if (!(ls >> spec.name >> spec.h >> spec.w)) fail("expected: map <name> <h> <w>");
    } else if (tok == "stockpile") {
      if (!(ls >> spec.initial_stockpile)) fail("expected: stockpile <n>");
    } else if (tok == "steplimit") {
      if (!(ls >> spec.step_limit)) fail("expected: steplimit <n>");
    } else if (tok == "mine") {
      Placement p{UnitKind::Resource, PlayerId::Neutral, 0, 0, 0};
      if (!(ls >> p.row >> p.col >> p.resources)) fail("expected: mine <r> <c> <amount>");
      spec.placements.push_back(p);
    } else {
      Placement p{parse_kind(tok), PlayerId::Neutral, 0, 0, 0};
      std::string player;
      if (!(ls >> player >> p.row >> p.col)) fail("expected: <kind> <player> <r> <c>");
      p.owner = parse_player(player);
      spec.placements.push_back(p);
    }
  }
  if (spec.h <= 0 || spec.w <= 0)
    throw std::invalid_argument("map spec: missing map dimensions");
  spec.validate();
  return spec;
}

MapSpec MapSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map spec: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

MapSpec MapSpec::bundled(const std::string& name) {
  if (name == "basesWorkers8x8" || name == "8x8") return parse(kBases8x8);
  if (name == "basesWorkers16x16" || name == "16x16") return parse(kBases16x16);
  throw std::invalid_argument("unknown bundled map: " + name);
}

void MapSpec::validate() const {
  std::set<std::pair<int, int>> occupied;
  for (const auto& p : placements) {
    if (p.row < 0 || p.row >= h || p.col < 0 || p.col >= w)
      throw std::invalid_argument("map spec: placement out of bounds");
    if (!occupied.insert({p.row, p.col}).second)
      throw std::invalid_argument("map spec: overlapping placements");
    if (p.kind == UnitKind::Resource && p.owner != PlayerId::Neutral)
      throw std::invalid_argument("map spec: mines must be neutral");
    if (p.kind != UnitKind::Resource && p.owner == PlayerId::Neutral)
      throw std::invalid_argument("map spec: only mines may be neutral");
  }
  // 180-degree rotational symmetry: every placement must have a mirrored
  // counterpart of the same kind owned by the other player (or neutral).
  auto mirrored = [&](const Placement& p) {
    Placement m = p;
    m.row = h - 1 - p.row;
    m.col = w - 1 - p.col;
    if (p.owner != PlayerId::Neutral) m.owner = opponent_of(p.owner);
    return m;
  };
  for (const auto& p : placements) {
    Placement m = mirrored(p);
    bool found = false;
    for (const auto& q : placements) {
      if (q.row == m.row && q.col == m.col && q.kind == m.kind &&
          q.owner == m.owner && q.resources == m.resources) {
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("map spec: layout is not mirrored");
  }
}

}  // namespace ert::engine
