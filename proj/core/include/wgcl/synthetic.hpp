#pragma once

#include <cstdint>
#include <vector>

#include "wgcl/dataset.hpp"

namespace wgcl {

// Block-structured implicit feedback: user u belongs to group u % groups and
// item i to group i % groups. Each user draws `per_user` distinct items; each
// draw lands in the user's own group with probability `in_group`, otherwise
// uniformly among the remaining items. in_group > 1/groups gives p_in > p_out.
struct SyntheticSpec {
  std::uint32_t num_users = 200;
  std::uint32_t num_items = 300;
  std::uint32_t groups = 4;
  std::uint32_t per_user = 20;
  double in_group = 0.8;
  std::uint64_t seed = 7;

  void validate() const;
};

// Ids are rendered as "u<k>" / "i<k>".
std::vector<RawInteraction> generate_synthetic(const SyntheticSpec& spec);

}  // namespace wgcl
