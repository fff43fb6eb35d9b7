#include "wgcl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "wgcl/error.hpp"
#include "wgcl/model.hpp"

namespace wgcl {
namespace {

constexpr const char* kModule = "config";

using Json = nlohmann::json;

[[noreturn]] void invalid(std::string_view key, std::string_view domain, const Json& got) {
  throw ConfigError(kModule, fmt::format("invalid value {} for {}: expected {}", got.dump(), key, domain));
}

double as_double(std::string_view key, std::string_view domain, const Json& v) {
  if (!v.is_number()) invalid(key, domain, v);
  return v.get<double>();
}

std::size_t as_count(std::string_view key, std::string_view domain, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0 && std::floor(d) == d && d < 1e18) return static_cast<std::size_t>(d);
  }
  invalid(key, domain, v);
}

bool as_bool(std::string_view key, std::string_view domain, const Json& v) {
  if (!v.is_boolean()) invalid(key, domain, v);
  return v.get<bool>();
}

std::string as_string(std::string_view key, std::string_view domain, const Json& v) {
  if (!v.is_string()) invalid(key, domain, v);
  return v.get<std::string>();
}

template <typename T, typename Fn>
std::vector<T> as_list(std::string_view key, std::string_view domain, const Json& v, Fn element) {
  if (!v.is_array()) invalid(key, domain, v);
  std::vector<T> out;
  for (const auto& x : v) out.push_back(element(key, domain, x));
  return out;
}

struct Entry {
  ConfigKey key;
  std::function<void(ExperimentConfig&, const Json&)> read;
  std::function<Json(const ExperimentConfig&)> write;
  bool is_list = false;
  bool is_text = false;
};

#define WGCL_FIELD(NAME, ALIAS, DOMAIN, MEMBER, CONVERT)                                \
  Entry {                                                                               \
    {NAME, ALIAS, DOMAIN},                                                              \
        [](ExperimentConfig& c, const Json& v) { c.MEMBER = CONVERT(NAME, DOMAIN, v); }, \
        [](const ExperimentConfig& c) { return Json(c.MEMBER); }                        \
  }

std::size_t as_k_core(std::string_view key, std::string_view domain, const Json& v) {
  const auto k = as_count(key, domain, v);
  if (k < 1) invalid(key, domain, v);
  return k;
}

std::vector<double> doubles(std::string_view key, std::string_view domain, const Json& v) {
  return as_list<double>(key, domain, v, as_double);
}

std::vector<std::size_t> counts(std::string_view key, std::string_view domain, const Json& v) {
  return as_list<std::size_t>(key, domain, v, as_count);
}

std::uint64_t as_seed(std::string_view key, std::string_view domain, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
  invalid(key, domain, v);
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(WGCL_FIELD("data.interactions", "data", "path to a <user>\\t<item> file", interactions, as_string));
    e.push_back(WGCL_FIELD("data.prepared", "prepared", "directory written by `prepare`", prepared, as_string));
    e.push_back(WGCL_FIELD("data.k_core", "kcore", "integer >= 1", k_core, as_k_core));
    e.push_back(WGCL_FIELD("split.train", "", "fraction in [0, 1]", split.train, as_double));
    e.push_back(WGCL_FIELD("split.val", "", "fraction in [0, 1]", split.val, as_double));
    e.push_back(WGCL_FIELD("split.test", "", "fraction in [0, 1]", split.test, as_double));
    e.push_back(WGCL_FIELD("split.seed", "split-seed", "unsigned 64-bit integer", split.seed, as_seed));
    e.push_back(WGCL_FIELD("model.d", "d", "integer >= 1", train.dim, as_count));
    e.push_back(WGCL_FIELD("model.K", "K", "integer in 1..4", train.depth, as_count));
    e.push_back(WGCL_FIELD("model.L", "layers", "integer >= 1", train.layers, as_count));
    e.push_back(WGCL_FIELD("train.batch_size", "batch-size", "integer >= 1", train.batch_size, as_count));
    e.push_back(WGCL_FIELD("train.lr", "lr", "number > 0", train.lr, as_double));
    e.push_back(WGCL_FIELD("train.lambda_c", "lambda-c", "number >= 0", train.lambda_c, as_double));
    e.push_back(WGCL_FIELD("train.tau", "tau", "number > 0", train.tau, as_double));
    e.push_back(WGCL_FIELD("train.reg", "reg", "number >= 0", train.reg, as_double));
    e.push_back(WGCL_FIELD("train.patience", "patience", "integer >= 1", train.patience, as_count));
    e.push_back(WGCL_FIELD("train.max_epochs", "epochs", "integer >= 0", train.max_epochs, as_count));
    e.push_back(WGCL_FIELD("train.seed", "seed", "unsigned 64-bit integer", train.seed, as_seed));
    e.push_back(Entry{{"train.variant", "variant", "one of {wgcl, all-pert, no-pert, lightgcn}"},
                      [](ExperimentConfig& c, const Json& v) {
                        c.train.variant = parse_variant(as_string("train.variant", "variant name", v));
                      },
                      [](const ExperimentConfig& c) { return Json(std::string(to_string(c.train.variant))); }});
    e.push_back(Entry{{"train.pools", "pools", "one of {in-batch, full}"},
                      [](ExperimentConfig& c, const Json& v) {
                        const auto s = as_string("train.pools", "one of {in-batch, full}", v);
                        if (s == "in-batch") c.train.pools = PoolMode::in_batch;
                        else if (s == "full") c.train.pools = PoolMode::full;
                        else invalid("train.pools", "one of {in-batch, full}", v);
                      },
                      [](const ExperimentConfig& c) { return Json(std::string(to_string(c.train.pools))); }});
    e.push_back(WGCL_FIELD("output.dir", "out", "directory path", output_dir, as_string));
    e.push_back(WGCL_FIELD("output.force", "force", "true or false", force, as_bool));

    e.push_back(WGCL_FIELD("grid.lambda_c", "", "list of numbers", grid.lambda_c, doubles));
    e.push_back(WGCL_FIELD("grid.tau", "", "list of numbers", grid.tau, doubles));
    e.push_back(WGCL_FIELD("grid.L", "", "list of integers", grid.layers, counts));
    e.push_back(WGCL_FIELD("grid.K", "", "list of integers in 1..4", grid.depth, counts));
    e.push_back(WGCL_FIELD("grid.allow_custom", "allow-custom-grid", "true or false", allow_custom_grid, as_bool));
    e.push_back(WGCL_FIELD("ablate.K", "", "list of integers in 1..4", ablation_depths, counts));
    for (auto& x : e) {
      const auto n = x.key.name;
      x.is_list = n == "grid.lambda_c" || n == "grid.tau" || n == "grid.L" || n == "grid.K" || n == "ablate.K";
      x.is_text = n == "data.interactions" || n == "data.prepared" || n == "output.dir" ||
                  n == "train.variant" || n == "train.pools";
    }
    return e;
  }();
  return entries;
}

#undef WGCL_FIELD

const Entry& find_entry(std::string_view key) {
  const auto& r = registry();
  const auto it = std::find_if(r.begin(), r.end(), [&](const Entry& e) { return e.key.name == key; });
  if (it == r.end()) throw ConfigError(kModule, fmt::format("unknown config key '{}'", key));
  return *it;
}

template <typename T>
bool subset_of(const std::vector<T>& xs, std::initializer_list<T> allowed) {
  return std::all_of(xs.begin(), xs.end(), [&](T x) {
    return std::find(allowed.begin(), allowed.end(), x) != allowed.end();
  });
}

Json parse_scalar(std::string_view text) {
  const std::string s(text);
  try {
    return Json::parse(s);
  } catch (const Json::parse_error&) {
    return Json(s);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  split.validate();
  train.validate();
  if (k_core < 1) throw ConfigError(kModule, "data.k_core must be >= 1");
  for (const auto k : ablation_depths) {
    if (k < 1 || k > 4) throw ConfigError(kModule, fmt::format("ablate.K entries must be in 1..4, got {}", k));
    (void)GranularitySchedule::make(train.dim, k);
  }
  for (const auto k : grid.depth) {
    if (k < 1 || k > 4) throw ConfigError(kModule, fmt::format("grid.K entries must be in 1..4, got {}", k));
  }
  if (!allow_custom_grid) {
    auto reject = [](std::string_view key, std::string_view allowed) {
      throw ConfigError(kModule, fmt::format("{} must be a subset of {} (set grid.allow_custom to override)", key, allowed));
    };
    if (!subset_of(grid.lambda_c, {1e-1, 1e-2, 1e-3})) reject("grid.lambda_c", "{1e-1, 1e-2, 1e-3}");
    if (!subset_of(grid.tau, {0.2, 0.4, 0.6, 0.8})) reject("grid.tau", "{0.2, 0.4, 0.6, 0.8}");
    if (!subset_of<std::size_t>(grid.layers, {2, 3, 4})) reject("grid.L", "{2, 3, 4}");
  }
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : registry()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  for (const auto& e : registry()) j[std::string(e.key.name)] = e.write(config);
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& flat, ExperimentConfig base) {
  if (!flat.is_null() && !flat.is_object()) {
    throw ConfigError(kModule, "config must be a flat JSON object of dotted keys");
  }
  if (flat.is_object()) {
    for (const auto& [key, value] : flat.items()) find_entry(key).read(base, value);
  }
  return base;
}

void apply_override(ExperimentConfig& config, std::string_view key, std::string_view text) {
  const auto& entry = find_entry(key);
  Json value = entry.is_text ? Json(std::string(text)) : parse_scalar(text);
  if (entry.is_list && !value.is_array()) {
    Json list = Json::array();
    std::string_view rest = text;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto piece = rest.substr(0, comma);
      if (!piece.empty()) list.push_back(parse_scalar(piece));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    value = std::move(list);
  }
  entry.read(config, value);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(kModule, fmt::format("cannot open config {}", path.string()));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  try {
    return config_from_json(Json::parse(text));
  } catch (const Json::exception& e) {
    throw ConfigError(kModule, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError(kModule, fmt::format("cannot write {}", path.string()));
  out << config_to_json(config).dump(2) << '\n';
}

}  // namespace wgcl
