#include "wgcl/synthetic.hpp"

#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "wgcl/error.hpp"
#include "wgcl/random.hpp"

namespace wgcl {

void SyntheticSpec::validate() const {
  if (num_users == 0 || num_items == 0) throw ConfigError("synth", "need at least one user and one item");
  if (groups == 0 || groups > num_items) throw ConfigError("synth", "groups must be in [1, num_items]");
  if (per_user == 0 || per_user > num_items) throw ConfigError("synth", "per_user must be in [1, num_items]");
  if (!(in_group >= 0.0 && in_group <= 1.0)) throw ConfigError("synth", "in_group must be in [0, 1]");
}

std::vector<RawInteraction> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<std::vector<std::uint32_t>> by_group(spec.groups);
  for (std::uint32_t i = 0; i < spec.num_items; ++i) by_group[i % spec.groups].push_back(i);

  std::vector<RawInteraction> out;
  out.reserve(static_cast<std::size_t>(spec.num_users) * spec.per_user);
  for (std::uint32_t u = 0; u < spec.num_users; ++u) {
    const auto& own = by_group[u % spec.groups];
    std::unordered_set<std::uint32_t> taken;
    std::size_t own_taken = 0;
    while (taken.size() < spec.per_user) {
      const bool own_full = own_taken == own.size();
      const bool rest_full = taken.size() - own_taken == spec.num_items - own.size();
      bool pick_own = rng.uniform() < spec.in_group;
      if (own_full) pick_own = false;
      if (rest_full) pick_own = true;

      std::uint32_t item;
      if (pick_own) {
        item = own[rng.below(own.size())];
      } else {
        item = static_cast<std::uint32_t>(rng.below(spec.num_items));
        if (item % spec.groups == u % spec.groups) continue;
      }
      if (!taken.insert(item).second) continue;
      if (pick_own) ++own_taken;
      out.push_back({fmt::format("u{}", u), fmt::format("i{}", item)});
    }
  }
  return out;
}

}  // namespace wgcl
