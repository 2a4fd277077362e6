#include "pinn/optimizer.hpp"

#include <chrono>
#include <cmath>

namespace pinn {

const char* train_status_name(TrainStatus s) {
  switch (s) {
    case TrainStatus::Converged: return "Converged";
    case TrainStatus::EpochsExhausted: return "EpochsExhausted";
    case TrainStatus::Diverged: return "Diverged";
  }
  return "?";
}

void adam_step(AdamState& state, std::span<double> x, std::span<const double> grad,
               const AdamParams& hp) {
  if (x.size() != grad.size() || x.size() != state.m.size() || x.size() != state.v.size())
    throw Error("adam_step: dimension mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw NonFiniteGradient("adam_step: gradient has a non-finite entry");
  state.step += 1;
  const double b1t = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < x.size(); ++i) {
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * grad[i];
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    x[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

TrainReport train(CompositeLoss& loss, ParamStore& store, const TrainConfig& config) {
  if (config.epochs < 1) throw Error("train: epochs must be >= 1");
  if (!(config.adam.lr > 0.0)) throw Error("train: learning rate must be > 0");
  loss.set_threads(config.threads);

  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  auto params = store.values();
  if (static_cast<int>(params.size()) < loss.param_span())
    throw Error("train: parameter store smaller than the loss parameter span");

  AdamState state(params.size());
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> snapshot(params.begin(), params.end());
  const std::size_t n_terms = loss.term_count();

  // Per-term shuffled index storage for mini-batching.
  std::vector<std::vector<std::uint32_t>> perms(n_terms);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> slices(n_terms);
  std::uint64_t params_stamp = 1;

  const auto physical_snapshot = [&]() {
    std::vector<double> phys;
    for (std::size_t i = static_cast<std::size_t>(store.theta_size()); i < params.size(); ++i)
      phys.push_back(params[i]);
    return phys;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::copy(params.begin(), params.end(), snapshot.begin());

    std::size_t steps = 1;
    if (config.batch > 0 && n_terms > 0) {
      const std::size_t n0 = loss.term_points(0);
      steps = (n0 + static_cast<std::size_t>(config.batch) - 1) /
              static_cast<std::size_t>(config.batch);
      if (steps == 0) steps = 1;
      for (std::size_t i = 0; i < n_terms; ++i) {
        perms[i] = epoch_permutation(loss.term_points(i), config.seed + 0x9e37 * (i + 1), epoch);
        slices[i] = partition_slices(perms[i].size(), steps);
      }
    }

    EpochLog log;
    log.epoch = epoch;
    log.term_mse.assign(n_terms, 0.0);
    bool diverged = false;
    try {
      for (std::size_t s = 0; s < steps; ++s) {
        std::fill(grad.begin(), grad.end(), 0.0);
        CompositeLoss::Breakdown b;
        if (config.batch > 0) {
          std::vector<std::span<const std::uint32_t>> view(n_terms);
          for (std::size_t i = 0; i < n_terms; ++i) {
            auto [lo, hi] = slices[i][s];
            view[i] = std::span<const std::uint32_t>(perms[i].data() + lo, hi - lo);
          }
          b = loss.loss_and_gradient(params, grad, view, params_stamp);
        } else {
          b = loss.loss_and_gradient(params, grad, {}, params_stamp);
        }
        log.total += b.total;
        for (std::size_t i = 0; i < n_terms; ++i) log.term_mse[i] += b.term_mse[i];
        adam_step(state, params, grad, config.adam);
        params_stamp += 1;
      }
    } catch (const NonFiniteResult&) {
      diverged = true;
    } catch (const NonFiniteGradient&) {
      diverged = true;
    }

    if (diverged) {
      std::copy(snapshot.begin(), snapshot.end(), params.begin());
      report.status = TrainStatus::Diverged;
      report.epochs_run = epoch;
      break;
    }

    log.total /= static_cast<double>(steps);
    for (double& m : log.term_mse) m /= static_cast<double>(steps);
    log.lambdas.resize(n_terms);
    for (std::size_t i = 0; i < n_terms; ++i) log.lambdas[i] = loss.lambda(i);
    log.physical = physical_snapshot();
    report.history.push_back(std::move(log));
    report.epochs_run = epoch + 1;

    if (config.lambda_mode == LambdaMode::Rebalance && config.rebalance_period > 0 &&
        (epoch + 1) % config.rebalance_period == 0) {
      rebalance_weights(loss, params, config.rebalance_alpha, &report.warnings);
      params_stamp += 1;
    }

    if (config.stop_tol && report.history.back().total <= *config.stop_tol) {
      report.status = TrainStatus::Converged;
      break;
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace pinn
