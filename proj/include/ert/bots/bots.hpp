#pragma once

// Deterministic-seedable scripted opponents. Every bot emits only actions
// admitted by the engine's legality mask.

#include "ert/engine/grid_state.hpp"

#include <memory>
#include <random>
#include <string>

namespace ert::bots {

using engine::GridState;
using engine::JointAction;
using engine::PlayerId;

enum class BotKind { RandomBiased, WorkerRush, LightRush };

BotKind bot_kind_from_name(const std::string& name);
std::string bot_name(BotKind kind);

// Random moves, but 5x likelier to harvest or attack: each legal concrete
// harvest/attack option carries weight 5 versus weight 1 for the rest.
JointAction act_random_biased(const GridState& state, PlayerId player,
                              std::mt19937_64& rng);

// Trains workers constantly; one worker harvests, the rest rush the
// closest enemy unit.
JointAction act_worker_rush(const GridState& state, PlayerId player,
                            std::mt19937_64& rng);

// Builds one barracks, then streams light units at the closest enemy while
// one worker keeps harvesting.
JointAction act_light_rush(const GridState& state, PlayerId player,
                           std::mt19937_64& rng);

JointAction act(BotKind kind, const GridState& state, PlayerId player,
                std::mt19937_64& rng);

}  // namespace ert::bots
