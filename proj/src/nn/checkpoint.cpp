#include "ert/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ert::nn {

namespace {

using nlohmann::json;

void write_matrix(std::ostream& out, const Mat& m) {
  // Column-major contiguous buffer, little-endian doubles.
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_matrix(std::istream& in, Mat& m) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated tensor payload");
}

json open_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path);
  return json::parse(header);
}

}  // namespace

void save_checkpoint(const std::string& path, const nlohmann::json& config,
                     long global_step, const ParamStore& params,
                     const Adam* optimizer) {
  json header;
  header["version"] = 1;
  header["config"] = config;
  header["global_step"] = global_step;
  json tensors = json::array();
  for (const auto* p : params.all())
    tensors.push_back({{"name", p->name},
                       {"rows", p->value.rows()},
                       {"cols", p->value.cols()}});
  header["tensors"] = tensors;
  header["has_optimizer"] = optimizer != nullptr;
  if (optimizer) header["optimizer_step"] = optimizer->step_count();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 8);
  std::string hs = header.dump();
  std::uint64_t header_len = hs.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto* p : params.all()) write_matrix(out, p->value);
  if (optimizer) {
    auto* opt = const_cast<Adam*>(optimizer);
    for (const auto& m : opt->first_moments()) write_matrix(out, m);
    for (const auto& v : opt->second_moments()) write_matrix(out, v);
  }
}

nlohmann::json read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  return open_header(in, path);
}

long load_checkpoint(const std::string& path, ParamStore& params, Adam* optimizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  json header = open_header(in, path);
  const auto& tensors = header.at("tensors");
  auto& all = params.all();
  if (tensors.size() != all.size())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& t = tensors[i];
    if (t.at("name").get<std::string>() != all[i]->name ||
        t.at("rows").get<Eigen::Index>() != all[i]->value.rows() ||
        t.at("cols").get<Eigen::Index>() != all[i]->value.cols())
      throw std::runtime_error("checkpoint: tensor mismatch at " + all[i]->name);
    read_matrix(in, all[i]->value);
  }
  if (optimizer) {
    if (!header.value("has_optimizer", false))
      throw std::runtime_error("checkpoint: no optimizer state stored");
    for (auto& m : optimizer->first_moments()) read_matrix(in, m);
    for (auto& v : optimizer->second_moments()) read_matrix(in, v);
    optimizer->set_step_count(header.at("optimizer_step").get<long>());
  }
  return header.at("global_step").get<long>();
}

}  // namespace ert::nn
