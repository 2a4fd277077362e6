#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinn/losses.hpp"
#include "pinn/network.hpp"

namespace pinn {

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of `x` in place.
void adam_step(AdamState& state, std::span<double> x, std::span<const double> grad,
               const AdamParams& hp);

enum class LambdaMode { Static, Rebalance };

struct TrainConfig {
  int epochs = 1;
  int batch = 0;  // 0 = full batch
  AdamParams adam;
  std::uint64_t seed = 0;
  LambdaMode lambda_mode = LambdaMode::Static;
  double rebalance_alpha = 0.1;
  int rebalance_period = 100;
  std::optional<double> stop_tol;
  int threads = 1;
};

enum class TrainStatus { Converged, EpochsExhausted, Diverged };
const char* train_status_name(TrainStatus s);

struct EpochLog {
  int epoch = 0;
  double total = 0.0;
  std::vector<double> term_mse;
  std::vector<double> lambdas;
  std::vector<double> physical;
};

struct TrainReport {
  TrainStatus status = TrainStatus::EpochsExhausted;
  int epochs_run = 0;
  std::vector<EpochLog> history;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Runs epochs x batches of Adam over the store's trainable vector.
/// Mini-batches partition every term's shuffled index set into the same
/// number of slices per epoch, so each point is visited exactly once and
/// every term participates in every step. On divergence (non-finite loss or
/// gradient) the last epoch's parameters are restored and the report says so.
TrainReport train(CompositeLoss& loss, ParamStore& store, const TrainConfig& config);

}  // namespace pinn
