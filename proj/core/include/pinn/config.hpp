#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pinn/network.hpp"
#include "pinn/optimizer.hpp"
#include "pinn/problems.hpp"

namespace pinn {

/// A run request: problem + mode plus optional overrides of the problem's
/// defaults. Unset fields inherit the problem definition.
struct RunConfig {
  std::string problem;
  Mode mode = Mode::Forward;

  // [problem]
  std::optional<std::vector<int>> grid;       // per-axis counts for the PDE grid
  std::optional<std::vector<int>> data_grid;  // per-axis counts for inverse data
  std::optional<double> ic_amplitude;

  // [network]
  std::optional<std::vector<int>> widths;
  std::optional<Activation> activation;
  std::optional<double> freq_scale;

  // [training]
  std::optional<int> epochs;
  std::optional<int> batch;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::optional<LambdaMode> lambda_mode;
  std::optional<double> rebalance_alpha;
  std::optional<int> rebalance_period;
  std::optional<double> stop_tol;
  std::optional<int> threads;

  // [output]
  std::string out_dir;
  bool emit_plots = false;
  std::optional<double> plot_time;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the documented key=value format with [problem]/[network]/[training]
/// /[output] sections (keys before any section header belong to [problem]).
/// Diagnostics name the offending key and line.
RunConfig parse_config(const std::string& text);

/// Inverse of parse_config: parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Named presets reproducing the experiment suite at desk scale.
std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);

}  // namespace pinn
