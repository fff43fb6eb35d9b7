#include "wgcl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wgcl/error.hpp"

namespace wgcl {
namespace {

constexpr const char* kModule = "checkpoint";
constexpr std::array<char, 8> kMagic = {'W', 'G', 'C', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary checkpoints assume little-endian");

std::string encode(double x) { return fmt::format("{:016x}", std::bit_cast<std::uint64_t>(x)); }

double decode(const std::string& hex) {
  if (hex.size() != 16) throw DataError(kModule, fmt::format("bad hex double '{}'", hex));
  std::uint64_t bits = 0;
  for (const char c : hex) {
    bits <<= 4;
    if (c >= '0' && c <= '9') bits |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') bits |= static_cast<std::uint64_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') bits |= static_cast<std::uint64_t>(c - 'A' + 10);
    else throw DataError(kModule, fmt::format("bad hex double '{}'", hex));
  }
  return std::bit_cast<double>(bits);
}

template <typename Dense>
nlohmann::json encode_dense(const Dense& m) {
  nlohmann::json arr = nlohmann::json::array();
  const double* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) arr.push_back(encode(p[i]));
  return arr;
}

template <typename Dense>
void decode_dense(const nlohmann::json& arr, Dense& m) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(m.size())) {
    throw DataError(kModule, fmt::format("expected {} values, found {}", m.size(), arr.size()));
  }
  double* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) p[i] = decode(arr[static_cast<std::size_t>(i)].get<std::string>());
}

ModelParams shaped(std::size_t num_nodes, const std::vector<std::size_t>& dims) {
  if (dims.size() < 2 || dims.front() != 1) throw DataError(kModule, "dims must start at 1 and have K + 1 entries");
  for (std::size_t k = 1; k < dims.size(); ++k)
    if (dims[k] <= dims[k - 1]) throw DataError(kModule, "dims must be strictly increasing");
  ModelParams p;
  p.base.resize(static_cast<Eigen::Index>(dims.back()), static_cast<Eigen::Index>(num_nodes));
  for (std::size_t k = 1; k < dims.size(); ++k) {
    p.weights.emplace_back(static_cast<Eigen::Index>(dims[k]), static_cast<Eigen::Index>(dims[k - 1]));
    p.biases.emplace_back(static_cast<Eigen::Index>(dims[k]));
  }
  return p;
}

void write_u64(std::ostream& out, std::uint64_t x) { out.write(reinterpret_cast<const char*>(&x), sizeof x); }

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t x = 0;
  if (!in.read(reinterpret_cast<char*>(&x), sizeof x)) throw DataError(kModule, "truncated binary checkpoint");
  return x;
}

template <typename Dense>
void write_dense(std::ostream& out, const Dense& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

template <typename Dense>
void read_dense(std::istream& in, Dense& m) {
  if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)))) {
    throw DataError(kModule, "truncated binary checkpoint");
  }
}

void save_binary(const std::filesystem::path& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(kModule, fmt::format("cannot write {}", path.string()));
  const auto dims = c.params.dims();
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  write_u64(out, c.params.num_nodes());
  write_u64(out, c.num_users);
  write_u64(out, c.params.dim());
  write_u64(out, c.params.depth());
  write_u64(out, c.layers);
  for (const auto d : dims) write_u64(out, d);
  write_dense(out, c.params.base);
  for (std::size_t k = 0; k < c.params.depth(); ++k) {
    write_dense(out, c.params.weights[k]);
    write_dense(out, c.params.biases[k]);
  }
  if (!out) throw DataError(kModule, fmt::format("write failed for {}", path.string()));
}

Checkpoint load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(kModule, fmt::format("cannot open {}", path.string()));
  std::array<char, 8> magic{};
  std::uint32_t version = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || magic != kMagic) throw DataError(kModule, fmt::format("{} is not a binary checkpoint", path.string()));
  if (version != kVersion) throw DataError(kModule, fmt::format("unsupported checkpoint version {}", version));

  const auto num_nodes = read_u64(in);
  Checkpoint c;
  c.num_users = static_cast<std::uint32_t>(read_u64(in));
  const auto d = read_u64(in);
  const auto depth = read_u64(in);
  c.layers = read_u64(in);
  if (depth < 1 || depth > 64) throw DataError(kModule, "implausible excitation depth");
  std::vector<std::size_t> dims(depth + 1);
  for (auto& x : dims) x = read_u64(in);
  if (dims.back() != d) throw DataError(kModule, "dims do not end at d");
  c.params = shaped(num_nodes, dims);
  read_dense(in, c.params.base);
  for (std::size_t k = 0; k < depth; ++k) {
    read_dense(in, c.params.weights[k]);
    read_dense(in, c.params.biases[k]);
  }
  return c;
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& c) {
  nlohmann::ordered_json j;
  j["format"] = "wgcl-checkpoint";
  j["version"] = kVersion;
  j["num_nodes"] = c.params.num_nodes();
  j["num_users"] = c.num_users;
  j["d"] = c.params.dim();
  j["K"] = c.params.depth();
  j["dims"] = c.params.dims();
  j["L"] = c.layers;
  j["base"] = encode_dense(c.params.base);
  auto weights = nlohmann::json::array();
  auto biases = nlohmann::json::array();
  for (std::size_t k = 0; k < c.params.depth(); ++k) {
    weights.push_back(encode_dense(c.params.weights[k]));
    biases.push_back(encode_dense(c.params.biases[k]));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != "wgcl-checkpoint") throw DataError(kModule, "not a wgcl checkpoint");
    if (j.at("version").get<std::uint32_t>() != kVersion) throw DataError(kModule, "unsupported checkpoint version");
    Checkpoint c;
    c.num_users = j.at("num_users").get<std::uint32_t>();
    c.layers = j.at("L").get<std::size_t>();
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != j.at("K").get<std::size_t>() + 1 || dims.back() != j.at("d").get<std::size_t>()) {
      throw DataError(kModule, "header fields d/K/dims disagree");
    }
    c.params = shaped(j.at("num_nodes").get<std::size_t>(), dims);
    decode_dense(j.at("base"), c.params.base);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != c.params.depth() || biases.size() != c.params.depth()) {
      throw DataError(kModule, "weight/bias count does not match K");
    }
    for (std::size_t k = 0; k < c.params.depth(); ++k) {
      decode_dense(weights[k], c.params.weights[k]);
      decode_dense(biases[k], c.params.biases[k]);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(kModule, fmt::format("malformed checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.extension() == ".bin") return save_binary(path, ckpt);
  std::ofstream out(path);
  if (!out) throw DataError(kModule, fmt::format("cannot write {}", path.string()));
  out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return load_binary(path);
  std::ifstream in(path);
  if (!in) throw DataError(kModule, fmt::format("cannot open {}", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(kModule, fmt::format("{}: {}", path.string(), e.what()));
  }
  return checkpoint_from_json(j);
}

}  // namespace wgcl
