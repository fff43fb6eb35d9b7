#include "wgcl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wgcl {
namespace {

constexpr std::size_t kDefaultKs[] = {10, 20};

std::vector<std::uint32_t> sorted_unique(std::span<const std::uint32_t> xs) {
  std::vector<std::uint32_t> out(xs.begin(), xs.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double discount(std::size_t position) {  // 1-based
  return 1.0 / std::log2(static_cast<double>(position) + 1.0);
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [k, m] : at) j[std::to_string(k)] = {{"recall", m.recall}, {"ndcg", m.ndcg}};
  j["users"] = num_users;
  return j;
}

std::vector<std::uint32_t> rank_items(const Matrix& aggregated, std::uint32_t num_users,
                                      std::uint32_t user, std::span<const std::uint32_t> mask,
                                      std::size_t limit) {
  const auto num_items = static_cast<std::uint32_t>(aggregated.cols() - num_users);
  if (user >= num_users) throw std::out_of_range("rank_items: user outside the graph");

  const Vector scores =
      aggregated.rightCols(num_items).transpose() * aggregated.col(static_cast<Eigen::Index>(user));

  std::vector<std::uint32_t> order;
  order.reserve(num_items);
  auto masked = mask.begin();
  for (std::uint32_t i = 0; i < num_items; ++i) {
    while (masked != mask.end() && *masked < i) ++masked;
    if (masked != mask.end() && *masked == i) continue;
    order.push_back(i);
  }
  auto before = [&scores](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  if (limit > 0 && limit < order.size()) {
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(limit), order.end(), before);
    order.resize(limit);
  } else {
    std::sort(order.begin(), order.end(), before);
  }
  return order;
}

double recall_at_k(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                   std::size_t k) {
  const auto rel = sorted_unique(relevant);
  if (rel.empty()) throw std::invalid_argument("recall_at_k: empty relevant set");
  if (k == 0) throw std::invalid_argument("recall_at_k: K must be >= 1");
  const std::size_t depth = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t p = 0; p < depth; ++p)
    if (std::binary_search(rel.begin(), rel.end(), ranked[p])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

double ndcg_at_k(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                 std::size_t k) {
  const auto rel = sorted_unique(relevant);
  if (rel.empty()) throw std::invalid_argument("ndcg_at_k: empty relevant set");
  if (k == 0) throw std::invalid_argument("ndcg_at_k: K must be >= 1");
  const std::size_t depth = std::min(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t p = 0; p < depth; ++p)
    if (std::binary_search(rel.begin(), rel.end(), ranked[p])) dcg += discount(p + 1);
  double idcg = 0.0;
  for (std::size_t p = 1; p <= std::min(k, rel.size()); ++p) idcg += discount(p);
  return dcg / idcg;
}

EvalReport evaluate(const Matrix& aggregated, const Dataset& ds, Phase phase,
                    std::span<const std::size_t> ks) {
  if (aggregated.cols() != static_cast<Eigen::Index>(ds.num_nodes())) {
    throw std::invalid_argument("evaluate: representation does not match the dataset");
  }
  const auto train = items_by_user(ds.num_users, ds.train);
  const auto val = items_by_user(ds.num_users, ds.val);
  const auto& target = phase == Phase::test ? ds.test : ds.val;
  const auto relevant = items_by_user(ds.num_users, target);
  const std::size_t depth = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());

  EvalReport report;
  for (const auto k : ks) report.at[k] = {};
  std::vector<std::uint32_t> mask;
  for (std::uint32_t u = 0; u < ds.num_users; ++u) {
    if (relevant[u].empty()) continue;
    mask = train[u];
    if (phase == Phase::test) {
      mask.insert(mask.end(), val[u].begin(), val[u].end());
      std::sort(mask.begin(), mask.end());
    }
    const auto ranked = rank_items(aggregated, ds.num_users, u, mask, depth);
    for (const auto k : ks) {
      auto& m = report.at[k];
      m.recall += recall_at_k(ranked, relevant[u], k);
      m.ndcg += ndcg_at_k(ranked, relevant[u], k);
    }
    ++report.num_users;
  }
  if (report.num_users > 0) {
    for (auto& [k, m] : report.at) {
      m.recall /= static_cast<double>(report.num_users);
      m.ndcg /= static_cast<double>(report.num_users);
    }
  }
  return report;
}

EvalReport evaluate(const Matrix& aggregated, const Dataset& ds, Phase phase) {
  return evaluate(aggregated, ds, phase, kDefaultKs);
}

}  // namespace wgcl
