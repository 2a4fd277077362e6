#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinn/losses.hpp"
#include "pinn/network.hpp"
#include "pinn/optimizer.hpp"

namespace pinn {

enum class Mode { Forward, Inverse };
const char* mode_name(Mode m);
std::optional<Mode> mode_from(std::string_view name);

/// Physical scalar of a problem. Forward mode fixes it at `truth` (baked in
/// as a constant); inverse mode makes it a trainable slot starting at `init`.
struct PhysicalParam {
  std::string name;
  double truth = 0.0;
  bool trainable = false;
  double init = 0.0;
};

using PhysExprs = std::map<std::string, Expr, std::less<>>;

/// Recipe for one loss term: the collocation set, targets, weight, and a
/// builder producing the residual from the solution approximant.
struct TermBlueprint {
  std::string name;
  CollocationSet set;
  std::vector<double> targets;
  double lambda = 1.0;
  std::function<Expr(Graph&, Expr u, const PhysExprs&)> residual;
};

struct EvalGrid {
  std::vector<AxisSpec> axes;
  std::string label;
};

enum class ModelKind { Dense, Polynomial, Fourier };

struct ProblemDef {
  std::string name;
  Mode mode = Mode::Forward;
  std::vector<std::string> input_names;
  std::vector<double> input_scales;  // physical coordinate / scale = network input
  ModelKind model = ModelKind::Dense;
  int poly_order = 0;
  NetworkSpec net;
  TrainConfig train;
  std::vector<PhysicalParam> physical;
  std::vector<TermBlueprint> terms;
  std::function<double(std::span<const double>)> oracle;  // physical coords
  std::function<Expr(Graph&, std::span<const Expr>)> oracle_expr;  // net-space inputs
  EvalGrid train_window;
  EvalGrid eval_window;
  bool has_time_axis = false;
  double plot_time = 0.0;
};

struct DataSet {
  std::vector<double> points;
  std::vector<double> values;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

enum class RegressionKind { Linear, Quadratic, Fourier };

/// Synthetic 1-D datasets: linear y = 2x+1, quadratic y = 2x^2 - x + 1 on
/// uniformly spaced x in [-1,1]; fourier y = sin(pi t) - sin(4pi/3 t) on
/// [0,6]. Gaussian noise is added via a seeded Box-Muller transform.
DataSet gen_regression_data(RegressionKind kind, int n, double sigma, std::uint64_t seed);
double regression_clean(RegressionKind kind, double x);

ProblemDef linear_regression_problem(int n_data = 100);
ProblemDef quadratic_regression_problem(int n_data = 100);
ProblemDef fourier_smoothing_problem(int n_data = 150);
ProblemDef spring_mass_problem(Mode mode, int n_collocation = 200, int n_data = 200);
ProblemDef membrane_problem(Mode mode, std::optional<std::vector<int>> grid = {},
                            std::optional<std::vector<int>> data_grid = {});
ProblemDef plate_problem(Mode mode, double ic_amplitude = 1.0,
                         std::optional<std::vector<int>> grid = {},
                         std::optional<std::vector<int>> data_grid = {});
ProblemDef laplace_demo_problem(Mode mode, std::optional<std::vector<int>> grid = {});

std::vector<std::string> problem_names();

struct ProblemOptions {
  double ic_amplitude = 1.0;
  std::optional<std::vector<int>> grid;
  std::optional<std::vector<int>> data_grid;
};

ProblemDef make_problem(std::string_view name, Mode mode, const ProblemOptions& opts = {});

/// Ground-truth plate constants: D = E h^3 / (12 (1 - nu^2)), Dhat = D / rho.
double plate_dhat_truth();

/// Everything needed to train and evaluate one run. Self-contained: the
/// construction graph is discarded after compilation.
struct AssembledProblem {
  ProblemDef def;
  ParamStore store;
  CompositeLoss loss;
  CompiledExpr u;
};

AssembledProblem assemble(const ProblemDef& def, std::uint64_t seed, int threads);

/// Network predictions over a point set (chunked, deterministic).
std::vector<double> predict(const CompiledExpr& u, std::span<const double> params,
                            const CollocationSet& points, std::span<const double> scales);

struct ErrorMetrics {
  double rel_l2 = 0.0;
  double max_abs = 0.0;
};

/// rel-L2 and max-abs of predictions against the oracle over `grid`; when
/// `rows` is given, one (coords..., pred, exact, abs_err) row per point is
/// appended. Throws OracleMissing when the problem has no oracle.
ErrorMetrics evaluate_error(const AssembledProblem& ap, const CollocationSet& grid,
                            std::vector<std::vector<double>>* rows = nullptr);

CollocationSet make_eval_grid(const EvalGrid& grid);

}  // namespace pinn
