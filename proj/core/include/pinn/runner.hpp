#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pinn/config.hpp"
#include "pinn/csv.hpp"
#include "pinn/problems.hpp"

namespace pinn {

struct RunResult {
  std::filesystem::path dir;
  TrainReport report;
  KeyValueFile metrics;
  ParamStore store;
};

/// Resolves the config against the problem defaults, trains, and writes the
/// run directory: config.ini (resolved copy), train_log.csv, results.csv,
/// metrics.txt, params.txt, inversion_history.csv (inverse runs), plots/
/// (optional) and runinfo.txt. metrics.txt contains only deterministic
/// fields; wall-clock time goes to runinfo.txt.
RunResult run(const RunConfig& config);

/// Root for relative output dirs: $PINNVIB_OUT_ROOT or the current directory.
std::filesystem::path output_root();

struct Comparison {
  std::string problem;
  std::vector<std::string> metric_names;
  std::vector<double> a_values;
  std::vector<double> b_values;
  std::string text;  // rendered table
};

/// Side-by-side error metrics of two completed runs of the same problem.
Comparison compare(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b);

void write_comparison_csv(const Comparison& cmp, const std::filesystem::path& path);

}  // namespace pinn
