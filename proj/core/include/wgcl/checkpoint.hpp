#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "wgcl/model.hpp"

namespace wgcl {

struct Checkpoint {
  ModelParams params;
  std::size_t layers = 2;
  std::uint32_t num_users = 0;
};

// JSON layout: {"format": "wgcl-checkpoint", "version": 1, "num_nodes", "num_users",
// "d", "K", "dims", "L", "base": [...], "weights": [[...]...], "biases": [[...]...]}.
// Every double is its IEEE-754 bit pattern as 16 lowercase hex digits, matrices
// flattened column-major, so the round trip is bit-exact.
nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

// ".bin" selects the flat binary format (magic "WGCLCKPT", u32 version, u64
// header fields, then little-endian doubles); anything else is JSON.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wgcl
