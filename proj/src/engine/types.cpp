#include "ert/engine/types.hpp"

namespace ert::engine {

std::string player_name(PlayerId p) {
  switch (p) {
    case PlayerId::P1: return "p1";
    case PlayerId::P2: return "p2";
    default: return "neutral";
  }
}

std::string unit_kind_name(UnitKind k) {
  switch (k) {
    case UnitKind::Resource: return "resource";
    case UnitKind::Base: return "base";
    case UnitKind::Barracks: return "barracks";
    case UnitKind::Worker: return "worker";
    case UnitKind::Light: return "light";
    case UnitKind::Heavy: return "heavy";
    default: return "ranged";
  }
}

std::string action_type_name(ActionType a) {
  switch (a) {
    case ActionType::Noop: return "noop";
    case ActionType::Move: return "move";
    case ActionType::Harvest: return "harvest";
    case ActionType::Return: return "return";
    case ActionType::Produce: return "produce";
    default: return "attack";
  }
}

std::string reward_kind_name(RewardKind k) {
  switch (k) {
    case RewardKind::Win: return "win";
    case RewardKind::Loss: return "loss";
    case RewardKind::Draw: return "draw";
    case RewardKind::Harvest: return "harvest";
    case RewardKind::Attack: return "attack";
    case RewardKind::BuildBuilding: return "build_building";
    case RewardKind::BuildWorker: return "build_worker";
    default: return "build_combat";
  }
}

}  // namespace ert::engine
