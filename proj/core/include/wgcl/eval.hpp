#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wgcl/dataset.hpp"
#include "wgcl/types.hpp"

namespace wgcl {

enum class Phase { val, test };

struct Metrics {
  double recall = 0.0;
  double ndcg = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct EvalReport {
  std::map<std::size_t, Metrics> at;  // K -> metrics
  std::size_t num_users = 0;

  const Metrics& operator[](std::size_t k) const { return at.at(k); }
  // {"10": {"recall": .., "ndcg": ..}, "20": {...}, "users": n}
  nlohmann::json to_json() const;
};

// Items of user u by descending F_u . F_i, ties by ascending item id, with the
// (sorted) mask removed. `limit` truncates the list; 0 means "all".
std::vector<std::uint32_t> rank_items(const Matrix& aggregated, std::uint32_t num_users,
                                      std::uint32_t user, std::span<const std::uint32_t> mask,
                                      std::size_t limit = 0);

// `relevant` must be non-empty; duplicates are ignored.
double recall_at_k(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                   std::size_t k);
double ndcg_at_k(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                 std::size_t k);

// Full-ranking evaluation. Train items are always masked, val items too when
// phase == test. Users with nothing to retrieve in the phase are skipped.
EvalReport evaluate(const Matrix& aggregated, const Dataset& ds, Phase phase,
                    std::span<const std::size_t> ks);
EvalReport evaluate(const Matrix& aggregated, const Dataset& ds, Phase phase);

}  // namespace wgcl
