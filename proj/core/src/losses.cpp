#include "pinn/losses.hpp"

#include <cmath>
#include <thread>

namespace pinn {

namespace {
constexpr std::size_t kC = CompiledExpr::kChunk;
}

CompositeLoss::CompositeLoss(const Graph& graph, std::vector<LossTerm> terms,
                             std::vector<double> input_scales, int threads)
    : threads_(threads < 1 ? 1 : threads) {
  inv_scales_.reserve(input_scales.size());
  for (double s : input_scales) inv_scales_.push_back(s == 0.0 ? 1.0 : 1.0 / s);
  terms_.reserve(terms.size());
  for (LossTerm& t : terms) {
    if (!(t.lambda > 0.0)) throw Error("loss term '" + t.name + "' needs lambda > 0");
    if (!t.targets.empty() && t.targets.size() != t.set.size())
      throw Error("loss term '" + t.name + "': targets do not match the point count");
    Compiled c;
    c.expr = CompiledExpr(graph, t.residual);
    if (c.expr.inputs_used() > t.set.dim())
      throw Error("loss term '" + t.name + "': residual references more inputs than the set provides");
    c.term = std::move(t);
    c.cols = c.term.set.column_ptrs();
    c.iota.resize(c.term.set.size());
    for (std::size_t k = 0; k < c.iota.size(); ++k) c.iota[k] = static_cast<std::uint32_t>(k);
    param_span_ = std::max(param_span_, c.expr.params_used());
    terms_.push_back(std::move(c));
  }
  workspaces_.resize(terms_.size());
}

void CompositeLoss::set_lambda(std::size_t i, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error("lambda must stay positive and finite");
  terms_[i].term.lambda = v;
}

double CompositeLoss::run_term(std::size_t ti, std::span<const double> params,
                               std::span<const std::uint32_t> indices, double grad_weight,
                               std::span<double> grad, std::uint64_t params_stamp) {
  Compiled& ct = terms_[ti];
  const std::size_t n = indices.size();
  if (n == 0) return 0.0;
  const std::size_t nchunks = (n + kC - 1) / kC;
  const bool with_grad = grad_weight != 0.0 && !grad.empty();
  const std::size_t gsize = grad.size();

  chunk_mse_.assign(nchunks, 0.0);
  if (with_grad) chunk_grad_.assign(nchunks * gsize, 0.0);

  const int nw = (threads_ > 1 && nchunks > 1)
                     ? static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads_), nchunks))
                     : 1;
  if (workspaces_[ti].size() < static_cast<std::size_t>(nw))
    workspaces_[ti].resize(static_cast<std::size_t>(nw));

  const double* targets = ct.term.targets.empty() ? nullptr : ct.term.targets.data();
  auto do_chunks = [&](int w) {
    CompiledExpr::Workspace& ws = workspaces_[ti][static_cast<std::size_t>(w)];
    for (std::size_t c = static_cast<std::size_t>(w); c < nchunks; c += static_cast<std::size_t>(nw)) {
      const std::uint32_t* idx = indices.data() + c * kC;
      const int cn = static_cast<int>(std::min(kC, n - c * kC));
      ct.expr.forward_chunk(ws, params, ct.cols, inv_scales_, idx, cn, params_stamp);
      double acc = 0.0;
      for (int l = 0; l < cn; ++l) {
        const double diff = ws.root[static_cast<std::size_t>(l)] -
                            (targets != nullptr ? targets[idx[l]] : 0.0);
        acc += diff * diff;
        ws.seed[static_cast<std::size_t>(l)] = grad_weight * diff;
      }
      chunk_mse_[c] = acc;
      if (with_grad)
        ct.expr.reverse_chunk(ws, cn, std::span<double>(chunk_grad_.data() + c * gsize, gsize));
    }
  };

  if (nw == 1) {
    do_chunks(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw - 1));
    for (int w = 1; w < nw; ++w) pool.emplace_back(do_chunks, w);
    do_chunks(0);
    for (std::thread& t : pool) t.join();
  }

  double sum = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) sum += chunk_mse_[c];
  if (with_grad) {
    for (std::size_t c = 0; c < nchunks; ++c) {
      const double* row = chunk_grad_.data() + c * gsize;
      for (std::size_t j = 0; j < gsize; ++j) grad[j] += row[j];
    }
  }
  return sum;
}

double CompositeLoss::term_mse(std::size_t i, std::span<const double> params) {
  Compiled& ct = terms_[i];
  const double sum = run_term(i, params, ct.iota, 0.0, {}, 0);
  const double mse = ct.iota.empty() ? 0.0 : sum / static_cast<double>(ct.iota.size());
  if (!std::isfinite(mse)) throw NonFiniteResult("term '" + ct.term.name + "' MSE is non-finite");
  return mse;
}

CompositeLoss::Breakdown CompositeLoss::total_loss(std::span<const double> params) {
  Breakdown b;
  b.term_mse.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const double mse = term_mse(i, params);
    b.term_mse.push_back(mse);
    b.total += terms_[i].term.lambda * mse;
  }
  if (!std::isfinite(b.total)) throw NonFiniteResult("total loss is non-finite");
  return b;
}

CompositeLoss::Breakdown CompositeLoss::loss_and_gradient(
    std::span<const double> params, std::span<double> grad,
    std::span<const std::span<const std::uint32_t>> batch_view, std::uint64_t params_stamp) {
  Breakdown b;
  b.term_mse.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    Compiled& ct = terms_[i];
    std::span<const std::uint32_t> indices =
        (i < batch_view.size() && !batch_view[i].empty()) ? batch_view[i]
                                                          : std::span<const std::uint32_t>(ct.iota);
    const std::size_t n = indices.size();
    const double weight = n == 0 ? 0.0 : ct.term.lambda * 2.0 / static_cast<double>(n);
    const double sum = run_term(i, params, indices, weight, grad, params_stamp);
    const double mse = n == 0 ? 0.0 : sum / static_cast<double>(n);
    b.term_mse.push_back(mse);
    b.total += ct.term.lambda * mse;
  }
  if (!std::isfinite(b.total)) throw NonFiniteResult("total loss is non-finite");
  return b;
}

std::vector<double> CompositeLoss::term_gradient(std::size_t i, std::span<const double> params) {
  Compiled& ct = terms_[i];
  std::vector<double> grad(static_cast<std::size_t>(param_span_), 0.0);
  const std::size_t n = ct.iota.size();
  if (n > 0) run_term(i, params, ct.iota, 2.0 / static_cast<double>(n), grad, 0);
  return grad;
}

void rebalance_weights(CompositeLoss& loss, std::span<const double> params, double alpha,
                       std::vector<std::string>* warnings) {
  if (loss.term_count() < 2 || alpha == 0.0) return;
  const std::vector<double> g0 = loss.term_gradient(0, params);
  double anchor_max = 0.0;
  for (double g : g0) anchor_max = std::max(anchor_max, std::abs(g));
  for (std::size_t i = 1; i < loss.term_count(); ++i) {
    const std::vector<double> gi = loss.term_gradient(i, params);
    double mean_abs = 0.0;
    for (double g : gi) mean_abs += std::abs(g);
    if (mean_abs == 0.0) {
      if (warnings != nullptr)
        warnings->push_back("term '" + loss.term_name(i) +
                            "': all-zero gradient, weight left unchanged");
      continue;
    }
    mean_abs = loss.lambda(i) * mean_abs / static_cast<double>(gi.size());
    const double lambda_hat = anchor_max / (mean_abs + 1e-12);
    const double updated = (1.0 - alpha) * loss.lambda(i) + alpha * lambda_hat;
    if (updated > 0.0 && std::isfinite(updated)) loss.set_lambda(i, updated);
  }
}

}  // namespace pinn
