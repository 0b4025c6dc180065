#include "ert/run/config.hpp"

#include "ert/engine/map_spec.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ert::run {

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: expected boolean, got " + v);
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "map") map = value;
  else if (key == "seed") seed = static_cast<unsigned>(std::stoul(value));
  else if (key == "output_dir") output_dir = value;
  else if (key == "unit_stats") unit_stats_file = value;
  else if (key == "transformer_layers") model.layers = std::stoi(value);
  else if (key == "transformer_ff_neurons") model.ff_dim = std::stoi(value);
  else if (key == "transformer_attention_heads") model.heads = std::stoi(value);
  else if (key == "transformer_dropout") model.dropout = std::stod(value);
  else if (key == "weight_init_std") model.init_std_scale = std::stod(value);
  else if (key == "position_embedding") {
    embedding = parse_bool(value);
    embedding_set = true;
  } else if (key == "embedding_dim") model.embed_dim = std::stoi(value);
  else if (key == "learning_rate") learning_rate = std::stod(value);
  else if (key == "adam_eps") adam_eps = std::stod(value);
  else if (key == "adam_beta1") adam_beta1 = std::stod(value);
  else if (key == "adam_beta2") adam_beta2 = std::stod(value);
  else if (key == "max_training_steps") total_steps = std::stol(value);
  else if (key == "exploration_steps") steps_per_rollout = std::stoi(value);
  else if (key == "parallel_environments") num_envs = std::stoi(value);
  else if (key == "minibatch_size") ppo.minibatch_envs = std::stoi(value);
  else if (key == "gamma") ppo.gamma = std::stod(value);
  else if (key == "gae_lambda") ppo.lambda = std::stod(value);
  else if (key == "entropy_coef") ppo.entropy_coef = std::stod(value);
  else if (key == "value_coef") ppo.value_coef = std::stod(value);
  else if (key == "clip_coef") ppo.clip_eps = std::stod(value);
  else if (key == "update_epochs") ppo.epochs = std::stoi(value);
  else if (key == "normalize_advantages") ppo.normalize_advantages = parse_bool(value);
  else if (key == "clip_value_loss") ppo.clip_value_loss = parse_bool(value);
  else if (key == "step_limit") step_limit = std::stoi(value);
  else if (key == "checkpoint_every") checkpoint_every = std::stoi(value);
  else if (key == "strict_masking") strict_masking = parse_bool(value);
  else if (key == "eval_argmax") eval_argmax = parse_bool(value);
  else if (key == "opponents") {
    opponents.clear();
    std::istringstream ss(value);
    std::string name;
    while (std::getline(ss, name, ','))
      if (!name.empty()) opponents.push_back(bots::bot_kind_from_name(name));
    if (opponents.empty()) throw std::invalid_argument("config: empty opponent pool");
  } else {
    throw std::invalid_argument("config: unknown key " + key);
  }
}

engine::MapSpec resolve_map(const std::string& name_or_path) {
  try {
    return engine::MapSpec::bundled(name_or_path);
  } catch (const std::invalid_argument&) {
    return engine::MapSpec::load(name_or_path);  // custom map spec path
  }
}

void RunConfig::finalize() {
  engine::MapSpec spec = resolve_map(map);
  model.map_h = spec.h;
  model.map_w = spec.w;
  model.embedding = embedding_set ? embedding : (spec.h * spec.w > 64);
  ppo.max_steps = total_steps;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key)) continue;
    if (!(ls >> eq >> value) || eq != "=")
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    cfg.apply(key, value);
  }
  return cfg;
}

}  // namespace ert::run
