#include "ert/engine/unit_stats.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ert::engine {

namespace {

int kind_index(const std::string& name) {
  for (int k = 0; k < kNumUnitKinds; ++k)
    if (unit_kind_name(static_cast<UnitKind>(k)) == name) return k;
  throw std::invalid_argument("unknown unit kind: " + name);
}

}  // namespace

UnitStatsTable UnitStatsTable::defaults() {
  UnitStatsTable t;
  auto& k = t.kinds;

  auto& base = k[static_cast<int>(UnitKind::Base)];
  base.cost = 10;
  base.max_hp = 10;
  base.produce_time = 250;
  base.produces[static_cast<int>(UnitKind::Worker)] = true;

  auto& barracks = k[static_cast<int>(UnitKind::Barracks)];
  barracks.cost = 5;
  barracks.max_hp = 4;
  barracks.produce_time = 200;
  barracks.produces[static_cast<int>(UnitKind::Light)] = true;
  barracks.produces[static_cast<int>(UnitKind::Heavy)] = true;
  barracks.produces[static_cast<int>(UnitKind::Ranged)] = true;

  auto& worker = k[static_cast<int>(UnitKind::Worker)];
  worker.cost = 1;
  worker.max_hp = 1;
  worker.damage = 1;
  worker.attack_range = 1;
  worker.produce_time = 50;
  worker.move_time = 10;
  worker.attack_time = 5;
  worker.harvest_time = 20;
  worker.return_time = 10;
  worker.can_attack = true;
  worker.can_harvest = true;
  worker.produces[static_cast<int>(UnitKind::Base)] = true;
  worker.produces[static_cast<int>(UnitKind::Barracks)] = true;

  auto& light = k[static_cast<int>(UnitKind::Light)];
  light.cost = 2;
  light.max_hp = 4;
  light.damage = 2;
  light.attack_range = 1;
  light.produce_time = 80;
  light.move_time = 8;
  light.attack_time = 5;
  light.can_attack = true;

  auto& heavy = k[static_cast<int>(UnitKind::Heavy)];
  heavy.cost = 3;
  heavy.max_hp = 8;
  heavy.damage = 4;
  heavy.attack_range = 1;
  heavy.produce_time = 120;
  heavy.move_time = 10;
  heavy.attack_time = 5;
  heavy.can_attack = true;

  auto& ranged = k[static_cast<int>(UnitKind::Ranged)];
  ranged.cost = 2;
  ranged.max_hp = 1;
  ranged.damage = 1;
  ranged.attack_range = 3;
  ranged.produce_time = 100;
  ranged.move_time = 10;
  ranged.attack_time = 5;
  ranged.can_attack = true;

  return t;
}

UnitStatsTable UnitStatsTable::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open unit stats file: " + path);
  UnitStatsTable t = defaults();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq;
    if (!(ls >> key)) continue;
    long value;
    if (!(ls >> eq >> value) || eq != "=")
      throw std::invalid_argument("bad unit stats line " + std::to_string(lineno));
    auto dot = key.find('.');
    if (dot == std::string::npos)
      throw std::invalid_argument("bad unit stats key: " + key);
    KindStats& ks = t.kinds[kind_index(key.substr(0, dot))];
    std::string field = key.substr(dot + 1);
    if (field == "cost") ks.cost = static_cast<int>(value);
    else if (field == "hp") ks.max_hp = static_cast<int>(value);
    else if (field == "damage") ks.damage = static_cast<int>(value);
    else if (field == "attack_range") ks.attack_range = static_cast<int>(value);
    else if (field == "produce_time") ks.produce_time = static_cast<int>(value);
    else if (field == "move_time") ks.move_time = static_cast<int>(value);
    else if (field == "attack_time") ks.attack_time = static_cast<int>(value);
    else if (field == "harvest_time") ks.harvest_time = static_cast<int>(value);
    else if (field == "return_time") ks.return_time = static_cast<int>(value);
    else throw std::invalid_argument("unknown unit stats field: " + field);
  }
  return t;
}

}  // namespace ert::engine
