#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "wgcl/dataset.hpp"
#include "wgcl/types.hpp"

namespace wgcl {

struct BipartiteGraph {
  std::uint32_t num_users = 0;
  std::uint32_t num_items = 0;
  std::vector<Interaction> edges;

  // Message passing only ever sees training edges.
  static BipartiteGraph from_train(const Dataset& ds);
};

// D^{-1/2} A D^{-1/2} of the user-item bipartite graph in CSR form. Symmetric,
// users before items, column indices strictly increasing within each row.
struct NormalizedAdjacency {
  std::uint32_t num_users = 0;
  std::uint32_t num_items = 0;
  std::vector<std::size_t> row_offsets;  // size num_nodes() + 1
  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;
  std::size_t isolated_nodes = 0;

  std::uint32_t num_nodes() const noexcept { return num_users + num_items; }
  std::size_t nnz() const noexcept { return values.size(); }
  std::size_t degree(std::uint32_t node) const noexcept {
    return row_offsets[node + 1] - row_offsets[node];
  }
  double max_row_abs_sum() const;
};

// Throws DataError on out-of-range ids or duplicate edges. Nodes without any
// edge get an empty row and a logged warning.
NormalizedAdjacency build_adjacency(const BipartiteGraph& g);

// out(:, n) = sum_m adj(n, m) * view(:, m). Throws std::invalid_argument when
// view.cols() != adj.num_nodes().
Matrix propagate(const NormalizedAdjacency& adj, const Matrix& view);
void propagate_into(const NormalizedAdjacency& adj, const Matrix& view, Matrix& out);

// Debug dump, one "row\tcol\tvalue" line per stored entry.
void write_coo(const NormalizedAdjacency& adj, std::ostream& out);

}  // namespace wgcl
