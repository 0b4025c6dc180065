#pragma once

// Versioned checkpoint container: JSON header (config, global step, tensor
// directory) followed by raw little-endian float64 payloads for parameter
// values and optimizer moments.

#include "ert/nn/adam.hpp"
#include "ert/nn/transformer.hpp"

#include <json.hpp>

#include <string>

namespace ert::nn {

inline constexpr char kCheckpointMagic[8] = {'E', 'R', 'T', 'C', 'K', 'P', 'T', '1'};

void save_checkpoint(const std::string& path, const nlohmann::json& config,
                     long global_step, const ParamStore& params,
                     const Adam* optimizer);

// Reads only the JSON header (to construct a matching model first).
nlohmann::json read_checkpoint_header(const std::string& path);

// Fills an already-constructed ParamStore (and optionally optimizer
// moments). Throws on name/shape mismatch. Returns the stored global step.
long load_checkpoint(const std::string& path, ParamStore& params, Adam* optimizer);

}  // namespace ert::nn
