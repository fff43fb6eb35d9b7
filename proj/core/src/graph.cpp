#include "wgcl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "wgcl/error.hpp"

namespace wgcl {

BipartiteGraph BipartiteGraph::from_train(const Dataset& ds) {
  return {ds.num_users, ds.num_items, ds.train};
}

double NormalizedAdjacency::max_row_abs_sum() const {
  double best = 0.0;
  for (std::uint32_t n = 0; n < num_nodes(); ++n) {
    double s = 0.0;
    for (auto e = row_offsets[n]; e < row_offsets[n + 1]; ++e) s += std::abs(values[e]);
    best = std::max(best, s);
  }
  return best;
}

NormalizedAdjacency build_adjacency(const BipartiteGraph& g) {
  const std::uint32_t nu = g.num_users;
  const std::uint32_t nn = g.num_users + g.num_items;

  std::vector<std::vector<std::uint32_t>> neighbors(nn);
  for (const auto& e : g.edges) {
    if (e.user >= g.num_users || e.item >= g.num_items) {
      throw DataError("graph", fmt::format("edge ({}, {}) outside [0,{})x[0,{})",
                                           e.user, e.item, g.num_users, g.num_items));
    }
    neighbors[e.user].push_back(nu + e.item);
    neighbors[nu + e.item].push_back(e.user);
  }
  for (std::uint32_t n = 0; n < nn; ++n) {
    auto& row = neighbors[n];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw DataError("graph", fmt::format("duplicate edge at node {}", n));
    }
  }

  NormalizedAdjacency adj;
  adj.num_users = g.num_users;
  adj.num_items = g.num_items;
  adj.row_offsets.assign(nn + 1, 0);
  adj.col_indices.reserve(2 * g.edges.size());
  adj.values.reserve(2 * g.edges.size());

  std::vector<double> inv_sqrt_deg(nn, 0.0);
  for (std::uint32_t n = 0; n < nn; ++n) {
    if (neighbors[n].empty()) {
      ++adj.isolated_nodes;
    } else {
      inv_sqrt_deg[n] = 1.0 / std::sqrt(static_cast<double>(neighbors[n].size()));
    }
  }
  if (adj.isolated_nodes > 0) {
    spdlog::warn("[graph] {} node(s) have no training edge; their embeddings never propagate",
                 adj.isolated_nodes);
  }

  for (std::uint32_t n = 0; n < nn; ++n) {
    for (const auto m : neighbors[n]) {
      adj.col_indices.push_back(m);
      // Same expression for (n, m) and (m, n): exact symmetry.
      adj.values.push_back(1.0 / std::sqrt(static_cast<double>(neighbors[n].size()) *
                                           static_cast<double>(neighbors[m].size())));
    }
    adj.row_offsets[n + 1] = adj.col_indices.size();
  }
  return adj;
}

void propagate_into(const NormalizedAdjacency& adj, const Matrix& view, Matrix& out) {
  if (view.cols() != static_cast<Eigen::Index>(adj.num_nodes())) {
    throw std::invalid_argument(fmt::format("propagate: view has {} columns, graph has {} nodes",
                                            view.cols(), adj.num_nodes()));
  }
  out.setZero(view.rows(), view.cols());
  for (std::uint32_t n = 0; n < adj.num_nodes(); ++n) {
    auto dst = out.col(n);
    for (auto e = adj.row_offsets[n]; e < adj.row_offsets[n + 1]; ++e) {
      dst.noalias() += adj.values[e] * view.col(adj.col_indices[e]);
    }
  }
}

Matrix propagate(const NormalizedAdjacency& adj, const Matrix& view) {
  Matrix out;
  propagate_into(adj, view, out);
  return out;
}

void write_coo(const NormalizedAdjacency& adj, std::ostream& out) {
  for (std::uint32_t n = 0; n < adj.num_nodes(); ++n) {
    for (auto e = adj.row_offsets[n]; e < adj.row_offsets[n + 1]; ++e) {
      out << n << '\t' << adj.col_indices[e] << '\t' << fmt::format("{:.17g}", adj.values[e]) << '\n';
    }
  }
}

}  // namespace wgcl
