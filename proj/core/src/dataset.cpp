#include "wgcl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wgcl/error.hpp"
#include "wgcl/random.hpp"

namespace wgcl {
namespace {

constexpr const char* kModule = "dataset";

struct PairHash {
  std::size_t operator()(const std::pair<std::string_view, std::string_view>& p) const noexcept {
    const std::size_t a = std::hash<std::string_view>{}(p.first);
    const std::size_t b = std::hash<std::string_view>{}(p.second);
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  }
};

std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& forward,
                     std::vector<std::string>& names, const std::string& key) {
  auto [it, inserted] = forward.try_emplace(key, static_cast<std::uint32_t>(names.size()));
  if (inserted) names.push_back(key);
  return it->second;
}

std::vector<Interaction> read_id_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(kModule, fmt::format("cannot open {}", path.string()));
  std::vector<Interaction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    long long u = -1, i = -1;
    if (!(fields >> u >> i) || u < 0 || i < 0) {
      throw DataError(kModule, fmt::format("{}: parse error at line {}", path.string(), line_no));
    }
    out.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(i)});
  }
  return out;
}

void write_id_pairs(const std::filesystem::path& path, std::span<const Interaction> pairs) {
  std::ofstream out(path);
  if (!out) throw DataError(kModule, fmt::format("cannot write {}", path.string()));
  for (const auto& x : pairs) out << x.user << '\t' << x.item << '\n';
}

void write_map(const std::filesystem::path& path, std::span<const std::string> names) {
  std::ofstream out(path);
  if (!out) throw DataError(kModule, fmt::format("cannot write {}", path.string()));
  for (std::size_t id = 0; id < names.size(); ++id) out << names[id] << '\t' << id << '\n';
}

std::vector<std::string> read_map(const std::filesystem::path& path, std::uint32_t expected) {
  std::vector<std::string> names(expected);
  std::ifstream in(path);
  if (!in) return {};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw DataError(kModule, fmt::format("{}: parse error at line {}", path.string(), line_no));
    }
    const auto id = std::stoul(line.substr(tab + 1));
    if (id >= expected) {
      throw DataError(kModule, fmt::format("{}: id {} out of range at line {}", path.string(), id, line_no));
    }
    names[id] = line.substr(0, tab);
  }
  return names;
}

}  // namespace

void SplitSpec::validate() const {
  if (train < 0 || val < 0 || test < 0) {
    throw ConfigError(kModule, "split ratios must be non-negative");
  }
  if (std::abs(train + val + test - 1.0) > 1e-12) {
    throw ConfigError(kModule, fmt::format("split ratios must sum to 1, got {}", train + val + test));
  }
}

std::string DatasetStats::sparsity_percent() const {
  return fmt::format("{:.3f}%", sparsity * 100.0);
}

std::vector<RawInteraction> parse_interactions(std::istream& in) {
  std::vector<RawInteraction> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(kModule, fmt::format("parse error at line {}: expected <user>\\t<item>", line_no));
    }
    const auto end = line.find('\t', tab + 1);
    std::string user = line.substr(0, tab);
    std::string item = line.substr(tab + 1, end == std::string::npos ? std::string::npos : end - tab - 1);
    if (item.empty()) {
      throw DataError(kModule, fmt::format("parse error at line {}: empty item field", line_no));
    }
    // '\t' cannot occur inside either field, so this key is unambiguous.
    if (seen.insert(user + '\t' + item).second) {
      out.push_back({std::move(user), std::move(item)});
    }
  }
  if (out.empty()) throw DataError(kModule, "empty dataset: no interactions found");
  return out;
}

std::vector<RawInteraction> load_interactions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(kModule, fmt::format("cannot open {}", path.string()));
  try {
    return parse_interactions(in);
  } catch (const DataError& e) {
    throw DataError(kModule, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_interactions(const std::filesystem::path& path,
                        std::span<const RawInteraction> interactions) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw DataError(kModule, fmt::format("cannot write {}", path.string()));
  for (const auto& x : interactions) out << x.user << '\t' << x.item << '\n';
}

std::vector<RawInteraction> kcore_filter(std::span<const RawInteraction> interactions,
                                         std::size_t k) {
  if (k == 0) throw ConfigError(kModule, "k-core k must be >= 1");

  std::unordered_map<std::string, std::uint32_t> user_ids, item_ids;
  std::vector<std::string> user_names, item_names;
  std::vector<Interaction> edges;
  edges.reserve(interactions.size());
  {
    std::unordered_set<std::pair<std::string_view, std::string_view>, PairHash> seen;
    for (const auto& x : interactions) {
      if (!seen.emplace(x.user, x.item).second) continue;
      edges.push_back({intern(user_ids, user_names, x.user), intern(item_ids, item_names, x.item)});
    }
  }

  std::vector<std::vector<std::size_t>> user_edges(user_names.size()), item_edges(item_names.size());
  std::vector<std::size_t> user_deg(user_names.size()), item_deg(item_names.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    user_edges[edges[e].user].push_back(e);
    item_edges[edges[e].item].push_back(e);
    ++user_deg[edges[e].user];
    ++item_deg[edges[e].item];
  }

  std::vector<char> alive(edges.size(), 1);
  std::vector<char> user_gone(user_names.size(), 0), item_gone(item_names.size(), 0);
  // Worklist entries: node id, with items offset by |U|.
  const std::size_t nu = user_names.size();
  std::vector<std::size_t> work;
  for (std::size_t u = 0; u < nu; ++u)
    if (user_deg[u] < k) work.push_back(u);
  for (std::size_t i = 0; i < item_names.size(); ++i)
    if (item_deg[i] < k) work.push_back(nu + i);

  while (!work.empty()) {
    const std::size_t node = work.back();
    work.pop_back();
    const bool is_user = node < nu;
    const std::size_t id = is_user ? node : node - nu;
    auto& gone = is_user ? user_gone[id] : item_gone[id];
    if (gone) continue;
    gone = 1;
    for (const std::size_t e : is_user ? user_edges[id] : item_edges[id]) {
      if (!alive[e]) continue;
      alive[e] = 0;
      if (is_user) {
        const auto i = edges[e].item;
        if (--item_deg[i] < k && !item_gone[i]) work.push_back(nu + i);
      } else {
        const auto u = edges[e].user;
        if (--user_deg[u] < k && !user_gone[u]) work.push_back(u);
      }
    }
  }

  std::vector<RawInteraction> out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (alive[e]) out.push_back({user_names[edges[e].user], item_names[edges[e].item]});
  }
  return out;
}

Dataset split(std::span<const RawInteraction> interactions, const SplitSpec& spec) {
  spec.validate();
  if (interactions.empty()) throw DataError(kModule, "cannot split an empty interaction list");

  Dataset ds;
  std::vector<Interaction> all;
  all.reserve(interactions.size());
  for (const auto& x : interactions) {
    all.push_back({intern(ds.user_forward, ds.user_names, x.user),
                   intern(ds.item_forward, ds.item_names, x.item)});
  }
  ds.num_users = static_cast<std::uint32_t>(ds.user_names.size());
  ds.num_items = static_cast<std::uint32_t>(ds.item_names.size());

  Rng rng(spec.seed);
  rng.shuffle(std::span<Interaction>(all));

  const std::size_t n = all.size();
  // The epsilon absorbs representation error in e.g. 0.8 * 10.
  const auto n_train = std::min(n, static_cast<std::size_t>(std::floor(spec.train * n + 1e-9)));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(spec.val * n + 1e-9)));
  ds.train.assign(all.begin(), all.begin() + n_train);
  ds.val.assign(all.begin() + n_train, all.begin() + n_train + n_val);
  ds.test.assign(all.begin() + n_train + n_val, all.end());
  return ds;
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats s;
  s.num_users = ds.num_users;
  s.num_items = ds.num_items;
  s.num_interactions = ds.num_interactions();
  const double cells = static_cast<double>(ds.num_users) * static_cast<double>(ds.num_items);
  s.sparsity = cells > 0 ? 1.0 - static_cast<double>(s.num_interactions) / cells : 0.0;
  return s;
}

std::vector<std::vector<std::uint32_t>> items_by_user(
    std::uint32_t num_users, std::span<const Interaction> interactions) {
  std::vector<std::vector<std::uint32_t>> out(num_users);
  for (const auto& x : interactions) out.at(x.user).push_back(x.item);
  for (auto& items : out) std::sort(items.begin(), items.end());
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_id_pairs(dir / "train.tsv", ds.train);
  write_id_pairs(dir / "val.tsv", ds.val);
  write_id_pairs(dir / "test.tsv", ds.test);
  write_map(dir / "user_map.tsv", ds.user_names);
  write_map(dir / "item_map.tsv", ds.item_names);

  const auto s = dataset_stats(ds);
  nlohmann::ordered_json j;
  j["num_users"] = s.num_users;
  j["num_items"] = s.num_items;
  j["num_interactions"] = s.num_interactions;
  j["sparsity"] = s.sparsity;
  std::ofstream out(dir / "stats.json");
  if (!out) throw DataError(kModule, fmt::format("cannot write {}", (dir / "stats.json").string()));
  out << j.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto stats_path = dir / "stats.json";
  std::ifstream stats_in(stats_path);
  if (!stats_in) throw DataError(kModule, fmt::format("cannot open {}", stats_path.string()));
  nlohmann::json stats;
  try {
    stats = nlohmann::json::parse(stats_in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(kModule, fmt::format("{}: {}", stats_path.string(), e.what()));
  }

  Dataset ds;
  ds.num_users = stats.at("num_users").get<std::uint32_t>();
  ds.num_items = stats.at("num_items").get<std::uint32_t>();
  ds.train = read_id_pairs(dir / "train.tsv");
  ds.val = read_id_pairs(dir / "val.tsv");
  ds.test = read_id_pairs(dir / "test.tsv");
  for (const auto* part : {&ds.train, &ds.val, &ds.test}) {
    for (const auto& x : *part) {
      if (x.user >= ds.num_users || x.item >= ds.num_items) {
        throw DataError(kModule, fmt::format("{}: id ({}, {}) outside [0,{})x[0,{})",
                                             dir.string(), x.user, x.item, ds.num_users, ds.num_items));
      }
    }
  }

  ds.user_names = read_map(dir / "user_map.tsv", ds.num_users);
  ds.item_names = read_map(dir / "item_map.tsv", ds.num_items);
  if (ds.user_names.empty()) {
    for (std::uint32_t u = 0; u < ds.num_users; ++u) ds.user_names.push_back(std::to_string(u));
  }
  if (ds.item_names.empty()) {
    for (std::uint32_t i = 0; i < ds.num_items; ++i) ds.item_names.push_back(std::to_string(i));
  }
  for (std::uint32_t u = 0; u < ds.num_users; ++u) ds.user_forward.emplace(ds.user_names[u], u);
  for (std::uint32_t i = 0; i < ds.num_items; ++i) ds.item_forward.emplace(ds.item_names[i], i);
  return ds;
}

}  // namespace wgcl
