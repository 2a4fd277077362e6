#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinn/eval.hpp"
#include "pinn/expr.hpp"
#include "pinn/sampling.hpp"

namespace pinn {

/// One weighted MSE summand: a residual expression enforced on a collocation
/// set against per-point targets (empty targets mean zeros).
struct LossTerm {
  std::string name;
  Expr residual;
  CollocationSet set;
  std::vector<double> targets;  // empty or one per point
  double lambda = 1.0;
};

/// Weighted sum of per-term MSEs: total = sum_i lambda_i * mean((r - t)^2).
/// Point evaluation is chunked (64 lanes) and partial sums are combined in
/// fixed chunk order, so results are bit-identical for any thread count.
class CompositeLoss {
 public:
  CompositeLoss(const Graph& graph, std::vector<LossTerm> terms,
                std::vector<double> input_scales, int threads = 1);

  std::size_t term_count() const { return terms_.size(); }
  const std::string& term_name(std::size_t i) const { return terms_[i].name; }
  double lambda(std::size_t i) const { return terms_[i].lambda; }
  void set_lambda(std::size_t i, double v);
  std::size_t term_points(std::size_t i) const { return terms_[i].set.size(); }
  int threads() const { return threads_; }
  void set_threads(int t) { threads_ = t < 1 ? 1 : t; }

  struct Breakdown {
    double total = 0.0;
    std::vector<double> term_mse;  // unweighted MSE per term
  };

  /// mean((r - t)^2) of one term over its full set.
  double term_mse(std::size_t i, std::span<const double> params);

  Breakdown total_loss(std::span<const double> params);

  /// Weighted loss over per-term index subsets (empty view = full set),
  /// accumulating d(total)/d(param) into grad. Throws NonFiniteResult when
  /// the total stops being finite.
  Breakdown loss_and_gradient(std::span<const double> params, std::span<double> grad,
                              std::span<const std::span<const std::uint32_t>> batch_view = {},
                              std::uint64_t params_stamp = 0);

  /// Gradient of one term's unweighted MSE over its full set.
  std::vector<double> term_gradient(std::size_t i, std::span<const double> params);

  int param_span() const { return param_span_; }

 private:
  struct Compiled {
    LossTerm term;
    CompiledExpr expr;
    std::vector<const double*> cols;
    std::vector<std::uint32_t> iota;
  };

  double run_term(std::size_t i, std::span<const double> params,
                  std::span<const std::uint32_t> indices, double grad_weight,
                  std::span<double> grad, std::uint64_t params_stamp);

  std::vector<Compiled> terms_;
  std::vector<double> inv_scales_;
  int threads_ = 1;
  int param_span_ = 0;
  // per (term, worker) workspaces and per-chunk partial buffers
  std::vector<std::vector<CompiledExpr::Workspace>> workspaces_;
  std::vector<double> chunk_mse_;
  std::vector<double> chunk_grad_;
};

/// Gradient-balancing update of the non-anchor weights:
///   lambda_hat_i = max|g_pde| / (mean|lambda_i g_i| + 1e-12)
///   lambda_i <- (1 - alpha) lambda_i + alpha lambda_hat_i
/// The first term is the anchor and keeps its weight. Terms with an all-zero
/// gradient are left unchanged and reported via `warnings`.
void rebalance_weights(CompositeLoss& loss, std::span<const double> params, double alpha,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace pinn
