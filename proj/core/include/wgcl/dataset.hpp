#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace wgcl {

// One (user, item) pair as read from disk, before ids are remapped.
struct RawInteraction {
  std::string user;
  std::string item;

  friend bool operator==(const RawInteraction&, const RawInteraction&) = default;
};

// One (user, item) pair over contiguous ids: user in [0, |U|), item in [0, |I|).
struct Interaction {
  std::uint32_t user = 0;
  std::uint32_t item = 0;

  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 2024;

  // Throws ConfigError unless each ratio is >= 0 and they sum to 1 (1e-12).
  void validate() const;
};

struct Dataset {
  std::uint32_t num_users = 0;
  std::uint32_t num_items = 0;
  std::vector<Interaction> train;
  std::vector<Interaction> val;
  std::vector<Interaction> test;

  // Original id -> contiguous id, plus the reverse tables (index = contiguous id).
  std::unordered_map<std::string, std::uint32_t> user_forward;
  std::unordered_map<std::string, std::uint32_t> item_forward;
  std::vector<std::string> user_names;
  std::vector<std::string> item_names;

  std::size_t num_interactions() const noexcept {
    return train.size() + val.size() + test.size();
  }
  std::uint32_t num_nodes() const noexcept { return num_users + num_items; }
};

struct DatasetStats {
  std::uint32_t num_users = 0;
  std::uint32_t num_items = 0;
  std::size_t num_interactions = 0;
  double sparsity = 0.0;  // fraction in [0, 1]

  // Sparsity as a percentage, three decimals (five as a fraction), e.g. "99.925%".
  std::string sparsity_percent() const;
};

// Parses "<user>\t<item>[\t...]" lines; '#' lines and blank lines are skipped.
// Duplicates collapse to their first occurrence.
std::vector<RawInteraction> parse_interactions(std::istream& in);
std::vector<RawInteraction> load_interactions(const std::filesystem::path& path);
void write_interactions(const std::filesystem::path& path,
                        std::span<const RawInteraction> interactions);

// Iteratively drops users and items with fewer than k interactions until
// every survivor has degree >= k. Preserves input order of the survivors.
std::vector<RawInteraction> kcore_filter(std::span<const RawInteraction> interactions,
                                         std::size_t k);

// Assigns contiguous ids in first-occurrence order over the whole input, then
// shuffles globally and cuts floor(train*n), floor(val*n), remainder.
Dataset split(std::span<const RawInteraction> interactions, const SplitSpec& spec);

DatasetStats dataset_stats(const Dataset& ds);

// Per-user sorted item lists over the given interactions.
std::vector<std::vector<std::uint32_t>> items_by_user(
    std::uint32_t num_users, std::span<const Interaction> interactions);

// Directory layout: train.tsv, val.tsv, test.tsv (contiguous ids),
// user_map.tsv / item_map.tsv (original id -> contiguous id), stats.json.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace wgcl
