#include "wgcl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "wgcl/error.hpp"

namespace wgcl {
namespace {

// log(1 + e^z) without overflow.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_triplet(const Triplet& t, std::uint32_t num_users, Eigen::Index num_nodes) {
  if (t.user >= num_users || num_users + static_cast<Eigen::Index>(t.positive) >= num_nodes ||
      num_users + static_cast<Eigen::Index>(t.negative) >= num_nodes) {
    throw std::out_of_range(fmt::format("triplet ({}, {}, {}) outside the graph", t.user,
                                        t.positive, t.negative));
  }
}

struct PoolTerm {
  double value = 0.0;
  Matrix grad_bar;    // d x m, columns match the pool order
  Matrix grad_tilde;
};

// -sum_a log softmax_a(a) of logits = bar^T tilde / tau, restricted to `cols`.
PoolTerm pool_term(const Matrix& bar, const Matrix& tilde, std::span<const Eigen::Index> cols,
                   double tau, bool with_grad) {
  PoolTerm out;
  const auto m = static_cast<Eigen::Index>(cols.size());
  if (m == 0) return out;
  Matrix b(bar.rows(), m), t(tilde.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    b.col(j) = bar.col(cols[j]);
    t.col(j) = tilde.col(cols[j]);
  }
  Matrix logits = (b.transpose() * t) / tau;
  Matrix prob(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double peak = logits.row(a).maxCoeff();
    const double lse = peak + std::log((logits.row(a).array() - peak).exp().sum());
    out.value += lse - logits(a, a);
    if (with_grad) prob.row(a) = (logits.row(a).array() - lse).exp();
  }
  if (with_grad) {
    prob.diagonal().array() -= 1.0;
    out.grad_bar = (t * prob.transpose()) / tau;
    out.grad_tilde = (b * prob) / tau;
  }
  return out;
}

InfoNceResult infonce_impl(const Matrix& bar, const Matrix& tilde, const NegativePools& pools,
                           std::uint32_t num_users, double tau, bool with_grad) {
  if (!(tau > 0.0)) throw ConfigError("objective", fmt::format("temperature tau must be > 0, got {}", tau));
  if (bar.rows() != tilde.rows() || bar.cols() != tilde.cols()) {
    throw std::invalid_argument("infonce_loss: view shapes differ");
  }
  std::vector<Eigen::Index> user_cols, item_cols;
  for (const auto u : pools.users) {
    if (u >= num_users) throw std::out_of_range(fmt::format("user {} outside the graph", u));
    user_cols.push_back(u);
  }
  for (const auto i : pools.items) {
    const auto col = static_cast<Eigen::Index>(num_users) + i;
    if (col >= bar.cols()) throw std::out_of_range(fmt::format("item {} outside the graph", i));
    item_cols.push_back(col);
  }

  InfoNceResult r;
  auto users = pool_term(bar, tilde, user_cols, tau, with_grad);
  auto items = pool_term(bar, tilde, item_cols, tau, with_grad);
  r.user_term = users.value;
  r.item_term = items.value;
  r.value = r.user_term + r.item_term;
  if (with_grad) {
    r.grad_bar = Matrix::Zero(bar.rows(), bar.cols());
    r.grad_tilde = Matrix::Zero(bar.rows(), bar.cols());
    for (std::size_t j = 0; j < user_cols.size(); ++j) {
      r.grad_bar.col(user_cols[j]) = users.grad_bar.col(static_cast<Eigen::Index>(j));
      r.grad_tilde.col(user_cols[j]) = users.grad_tilde.col(static_cast<Eigen::Index>(j));
    }
    for (std::size_t j = 0; j < item_cols.size(); ++j) {
      r.grad_bar.col(item_cols[j]) = items.grad_bar.col(static_cast<Eigen::Index>(j));
      r.grad_tilde.col(item_cols[j]) = items.grad_tilde.col(static_cast<Eigen::Index>(j));
    }
  }
  return r;
}

BprResult bpr_impl(const Matrix& f, std::span<const Triplet> batch, double lambda,
                   const Matrix& base, std::uint32_t num_users, bool with_grad) {
  BprResult r;
  if (with_grad) {
    r.grad_aggregated = Matrix::Zero(f.rows(), f.cols());
    r.grad_base = Matrix::Zero(base.rows(), base.cols());
  }
  double log_loss = 0.0;
  double sq_norm = 0.0;
  for (const auto& t : batch) {
    check_triplet(t, num_users, f.cols());
    const Eigen::Index u = t.user;
    const Eigen::Index p = num_users + static_cast<Eigen::Index>(t.positive);
    const Eigen::Index n = num_users + static_cast<Eigen::Index>(t.negative);
    const double margin = f.col(u).dot(f.col(p)) - f.col(u).dot(f.col(n));
    log_loss += softplus(-margin);
    sq_norm += base.col(u).squaredNorm() + base.col(p).squaredNorm() + base.col(n).squaredNorm();
    if (with_grad) {
      const double g = -sigmoid(-margin);
      r.grad_aggregated.col(u) += g * (f.col(p) - f.col(n));
      r.grad_aggregated.col(p) += g * f.col(u);
      r.grad_aggregated.col(n) -= g * f.col(u);
      r.grad_base.col(u) += 2.0 * lambda * base.col(u);
      r.grad_base.col(p) += 2.0 * lambda * base.col(p);
      r.grad_base.col(n) += 2.0 * lambda * base.col(n);
    }
  }
  r.reg = lambda * sq_norm;
  r.value = log_loss + r.reg;
  return r;
}

// Back-propagates dL/dR of one branch into the ladder parameters and returns
// dL/dF_pert (through both the gate path and the direct product).
Matrix branch_backward(const ContrastiveBranch& branch, const Matrix& grad_r,
                       const ModelParams& params, Gradients& grads) {
  const Matrix& gates = branch.gates();
  Matrix grad_pert = grad_r.cwiseProduct(gates);
  Matrix grad_h = grad_r.cwiseProduct(branch.perturbed);

  const auto& trace = branch.excitation;
  for (std::size_t k = params.depth(); k-- > 0;) {
    const Matrix& out = trace.inputs[k + 1];
    Matrix grad_z = k + 1 == params.depth()
                        ? Matrix(grad_h.cwiseProduct(out).cwiseProduct((1.0 - out.array()).matrix()))
                        : Matrix(grad_h.cwiseProduct((trace.pre[k].array() > 0.0).cast<double>().matrix()));
    grads.weights[k].noalias() += grad_z * trace.inputs[k].transpose();
    grads.biases[k].noalias() += grad_z.rowwise().sum();
    grad_h = params.weights[k].transpose() * grad_z;
  }
  // grad_h is now dL/dS (1 x N); the squeeze spreads it evenly over d rows.
  const double inv_d = 1.0 / static_cast<double>(grad_pert.rows());
  grad_pert.rowwise() += (grad_h * inv_d).row(0);
  return grad_pert;
}

}  // namespace

std::string_view to_string(PoolMode mode) noexcept {
  return mode == PoolMode::full ? "full" : "in-batch";
}

NegativePools NegativePools::in_batch(std::span<const Triplet> batch) {
  NegativePools p;
  for (const auto& t : batch) {
    p.users.push_back(t.user);
    p.items.push_back(t.positive);
    p.items.push_back(t.negative);
  }
  std::sort(p.users.begin(), p.users.end());
  p.users.erase(std::unique(p.users.begin(), p.users.end()), p.users.end());
  std::sort(p.items.begin(), p.items.end());
  p.items.erase(std::unique(p.items.begin(), p.items.end()), p.items.end());
  return p;
}

NegativePools NegativePools::full(std::uint32_t num_users, std::uint32_t num_items) {
  NegativePools p;
  p.users.resize(num_users);
  p.items.resize(num_items);
  for (std::uint32_t u = 0; u < num_users; ++u) p.users[u] = u;
  for (std::uint32_t i = 0; i < num_items; ++i) p.items[i] = i;
  return p;
}

NegativePools NegativePools::make(PoolMode mode, std::span<const Triplet> batch,
                                  std::uint32_t num_users, std::uint32_t num_items) {
  return mode == PoolMode::full ? full(num_users, num_items) : in_batch(batch);
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& other) {
  rec += other.rec;
  cl += other.cl;
  reg += other.reg;
  total += other.total;
  return *this;
}

Gradients Gradients::zeros_like(const ModelParams& params) {
  Gradients g;
  g.base = Matrix::Zero(params.base.rows(), params.base.cols());
  for (const auto& w : params.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : params.biases) g.biases.push_back(Vector::Zero(b.size()));
  return g;
}

bool Gradients::all_finite() const {
  if (!base.allFinite()) return false;
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

BprResult bpr_loss(const Matrix& aggregated, std::span<const Triplet> batch, double lambda,
                   const Matrix& base, std::uint32_t num_users) {
  return bpr_impl(aggregated, batch, lambda, base, num_users, true);
}

InfoNceResult infonce_loss(const Matrix& bar, const Matrix& tilde, const NegativePools& pools,
                           std::uint32_t num_users, double tau) {
  return infonce_impl(bar, tilde, pools, num_users, tau, true);
}

LossBreakdown total_loss(const ForwardState& state, const NormalizedAdjacency& adj,
                         const ModelParams& params, std::span<const Triplet> batch,
                         const NegativePools& pools, const ObjectiveConfig& config) {
  LossBreakdown loss;
  const auto bpr = bpr_impl(state.aggregated, batch, config.reg, params.base, adj.num_users, false);
  loss.rec = bpr.value;
  loss.reg = bpr.reg;
  if (state.has_contrastive) {
    loss.cl = infonce_impl(state.bar.recalibrated, state.tilde.recalibrated, pools, adj.num_users,
                           config.tau, false)
                  .value;
  }
  loss.total = loss.rec + config.lambda_c * loss.cl;
  return loss;
}

LossAndGrads total_loss_and_grads(const ForwardState& state, const NormalizedAdjacency& adj,
                                  const ModelParams& params, std::span<const Triplet> batch,
                                  const NegativePools& pools, const ObjectiveConfig& config) {
  LossAndGrads out;
  out.grads = Gradients::zeros_like(params);

  auto bpr = bpr_impl(state.aggregated, batch, config.reg, params.base, adj.num_users, true);
  out.loss.rec = bpr.value;
  out.loss.reg = bpr.reg;
  Matrix grad_f = std::move(bpr.grad_aggregated);

  if (state.has_contrastive) {
    auto nce = infonce_impl(state.bar.recalibrated, state.tilde.recalibrated, pools,
                            adj.num_users, config.tau, config.lambda_c != 0.0);
    out.loss.cl = nce.value;
    if (config.lambda_c != 0.0) {
      // F-bar and F-tilde carry every E^(l) with the same 1/(L+1) weight as F,
      // so their gradients fold straight into dL/dF.
      grad_f += branch_backward(state.bar, config.lambda_c * nce.grad_bar, params, out.grads);
      grad_f += branch_backward(state.tilde, config.lambda_c * nce.grad_tilde, params, out.grads);
    }
  }
  out.loss.total = out.loss.rec + config.lambda_c * out.loss.cl;

  // dL/dE^(0) = sum_l A^l G with G = dL/dF / (L+1); A is symmetric.
  const Matrix g = grad_f / static_cast<double>(state.layer_views.size());
  Matrix acc = g;
  Matrix tmp;
  for (std::size_t l = 1; l < state.layer_views.size(); ++l) {
    propagate_into(adj, acc, tmp);
    acc = g + tmp;
  }
  out.grads.base = std::move(bpr.grad_base) + acc;
  return out;
}

}  // namespace wgcl
