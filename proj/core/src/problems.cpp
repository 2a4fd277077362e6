#include "pinn/problems.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "pinn/errors.hpp"

namespace pinn {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kDataSeed = 20240801ull;

double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Seeded Gaussian via Box-Muller; avoids implementation-defined std
// distributions so datasets are bit-reproducible.
double next_gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - next_unit(rng);  // (0, 1]
  const double u2 = next_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

CollocationSet gridN(std::initializer_list<AxisSpec> axes, Role role) {
  std::vector<AxisSpec> v(axes);
  return uniform_grid(v, role);
}

Expr phys_coord(Graph& g, int axis, const std::vector<double>& scales) {
  Expr x = g.input_at(axis);
  const double s = axis < static_cast<int>(scales.size()) ? scales[static_cast<std::size_t>(axis)] : 1.0;
  return s == 1.0 ? x : x * s;
}

// d^order f / d(axis_phys)^order: repeated graph transforms with the input
// scaling chained in.
Expr dnth(Graph& g, Expr f, int axis, int order, const std::vector<double>& scales) {
  Expr x = g.input_at(axis);
  for (int k = 0; k < order; ++k) f = g.derivative(f, x);
  const double s = axis < static_cast<int>(scales.size()) ? scales[static_cast<std::size_t>(axis)] : 1.0;
  if (s != 1.0) f = f * std::pow(1.0 / s, order);
  return f;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.front() = lo;
  v.back() = hi;
  return v;
}

}  // namespace

const char* mode_name(Mode m) { return m == Mode::Forward ? "forward" : "inverse"; }

std::optional<Mode> mode_from(std::string_view name) {
  if (name == "forward") return Mode::Forward;
  if (name == "inverse") return Mode::Inverse;
  return std::nullopt;
}

double plate_dhat_truth() {
  const double E = 7e10, h = 0.004, nu = 0.25, rho = 2700.0;
  const double D = E * h * h * h / (12.0 * (1.0 - nu * nu));
  return D / rho;
}

double regression_clean(RegressionKind kind, double x) {
  switch (kind) {
    case RegressionKind::Linear: return 2.0 * x + 1.0;
    case RegressionKind::Quadratic: return 2.0 * x * x - x + 1.0;
    case RegressionKind::Fourier:
      return std::sin(kPi * x) - std::sin(4.0 * kPi / 3.0 * x);
  }
  return 0.0;
}

DataSet gen_regression_data(RegressionKind kind, int n, double sigma, std::uint64_t seed) {
  if (n < 2) throw Error("gen_regression_data: need at least 2 points");
  if (sigma < 0.0) throw Error("gen_regression_data: sigma must be >= 0");
  DataSet ds;
  ds.noise_sigma = sigma;
  ds.seed = seed;
  const double lo = kind == RegressionKind::Fourier ? 0.0 : -1.0;
  const double hi = kind == RegressionKind::Fourier ? 6.0 : 1.0;
  ds.points = linspace(lo, hi, n);
  ds.values.reserve(static_cast<std::size_t>(n));
  std::mt19937_64 rng(seed);
  for (double x : ds.points) {
    double noise = sigma > 0.0 ? sigma * next_gaussian(rng) : 0.0;
    ds.values.push_back(regression_clean(kind, x) + noise);
  }
  return ds;
}

namespace {

Expr identity_residual(Graph&, Expr u, const PhysExprs&) { return u; }

ProblemDef regression_problem(RegressionKind kind, int n) {
  ProblemDef def;
  def.mode = Mode::Forward;
  def.input_scales = {1.0};
  def.train.seed = 42;
  double sigma = 0.2;
  switch (kind) {
    case RegressionKind::Linear:
      def.name = "linear-regression";
      def.input_names = {"x"};
      def.model = ModelKind::Dense;
      def.net.inputs = {"x"};
      def.net.hidden = {};
      def.net.activation = Activation::Linear;
      def.train.epochs = 2000;
      def.train.adam.lr = 0.05;
      break;
    case RegressionKind::Quadratic:
      def.name = "quadratic-regression";
      def.input_names = {"x"};
      def.model = ModelKind::Polynomial;
      def.poly_order = 2;
      def.net.inputs = {"x"};
      def.train.epochs = 4000;
      def.train.adam.lr = 0.05;
      break;
    case RegressionKind::Fourier:
      def.name = "fourier-smoothing";
      def.input_names = {"t"};
      def.model = ModelKind::Fourier;
      def.net.inputs = {"t"};
      def.net.hidden = {20};
      def.net.activation = Activation::Sin;
      def.net.freq_scale = 8.0;
      def.train.epochs = 15000;
      def.train.adam.lr = 0.01;
      break;
  }
  DataSet ds = gen_regression_data(kind, n, sigma, kDataSeed);
  CollocationSet set(1, Role::Data);
  for (double x : ds.points) set.append(std::array<double, 1>{x});
  def.terms.push_back(TermBlueprint{"data", std::move(set), ds.values, 1.0, identity_residual});
  def.oracle = [kind](std::span<const double> p) { return regression_clean(kind, p[0]); };
  const double lo = kind == RegressionKind::Fourier ? 0.0 : -1.0;
  const double hi = kind == RegressionKind::Fourier ? 6.0 : 1.0;
  const int grid_n = kind == RegressionKind::Fourier ? 601 : 401;
  def.train_window = {{AxisSpec{lo, hi, grid_n}}, "train"};
  def.eval_window = def.train_window;
  def.eval_window.label = "eval";
  return def;
}

}  // namespace

ProblemDef linear_regression_problem(int n_data) {
  return regression_problem(RegressionKind::Linear, n_data);
}
ProblemDef quadratic_regression_problem(int n_data) {
  return regression_problem(RegressionKind::Quadratic, n_data);
}
ProblemDef fourier_smoothing_problem(int n_data) {
  return regression_problem(RegressionKind::Fourier, n_data);
}

ProblemDef spring_mass_problem(Mode mode, int n_collocation, int n_data) {
  constexpr double kOmega = 3.0;
  constexpr double kBeta = 1.5;
  constexpr double kOmegaBar = kBeta * kOmega;
  constexpr double kF0 = 1.0;
  const double T = 4.0 * kPi;
  const double amp = kF0 / (kOmega * kOmega - kOmegaBar * kOmegaBar);

  ProblemDef def;
  def.name = "spring";
  def.mode = mode;
  def.input_names = {"t"};
  def.input_scales = {T};
  def.has_time_axis = true;
  def.net.inputs = def.input_names;
  def.net.hidden = {20, 20, 20, 20};
  def.net.activation = Activation::Sin;
  def.net.freq_scale = 30.0;
  def.train.epochs = 20000;
  def.train.adam.lr = 2e-3;
  def.train.seed = 42;

  const std::vector<double> scales = def.input_scales;
  def.oracle = [=](std::span<const double> p) {
    return amp * (std::sin(kOmegaBar * p[0]) - kBeta * std::sin(kOmega * p[0]));
  };
  def.oracle_expr = [=](Graph& g, std::span<const Expr> xs) {
    Expr t = scales[0] == 1.0 ? xs[0] : xs[0] * scales[0];
    return g.constant(amp) * (sin(g.constant(kOmegaBar) * t) - kBeta * sin(g.constant(kOmega) * t));
  };

  auto ode = [scales](Graph& g, Expr u, const PhysExprs& phys) {
    Expr utt = dnth(g, u, 0, 2, scales);
    Expr omega = phys.at("omega");
    Expr t = phys_coord(g, 0, scales);
    return utt + omega * omega * u - g.constant(kF0) * sin(g.constant(kOmegaBar) * t);
  };

  def.terms.push_back(TermBlueprint{
      "ode", gridN({AxisSpec{0.0, T, n_collocation}}, Role::Interior), {}, 1.0, ode});
  if (mode == Mode::Forward) {
    def.physical = {PhysicalParam{"omega", kOmega, false, 0.0}};
    CollocationSet ic(1, Role::Initial);
    ic.append(std::array<double, 1>{0.0});
    def.terms.push_back(TermBlueprint{"ic_u", ic, {}, 1.0, identity_residual});
    def.terms.push_back(TermBlueprint{
        "ic_v", ic, {}, 1.0,
        [scales](Graph& g, Expr u, const PhysExprs&) { return dnth(g, u, 0, 1, scales); }});
  } else {
    def.physical = {PhysicalParam{"omega", kOmega, true, 6.0}};
    CollocationSet data(1, Role::Data);
    std::vector<double> targets;
    for (double t : linspace(0.0, T, n_data)) {
      data.append(std::array<double, 1>{t});
      targets.push_back(def.oracle(std::array<double, 1>{t}));
    }
    def.terms.push_back(TermBlueprint{"data", std::move(data), std::move(targets), 1.0,
                                      identity_residual});
  }
  def.train_window = {{AxisSpec{0.0, T, 401}}, "train"};
  def.eval_window = {{AxisSpec{T + T / 400.0, 2.0 * T, 400}}, "extrapolation"};
  return def;
}

namespace {

Expr sin_pi_x_sin_pi_y(Graph& g, const std::vector<double>& scales) {
  Expr x = phys_coord(g, 0, scales);
  Expr y = phys_coord(g, 1, scales);
  return sin(g.constant(kPi) * x) * sin(g.constant(kPi) * y);
}

}  // namespace

ProblemDef membrane_problem(Mode mode, std::optional<std::vector<int>> grid,
                            std::optional<std::vector<int>> data_grid) {
  const double c_truth = 1.0;
  const std::vector<int> gc = grid.value_or(
      mode == Mode::Forward ? std::vector<int>{20, 20, 10} : std::vector<int>{20, 20, 20});
  if (gc.size() != 3) throw Error("membrane expects 3 grid counts (Nx,Ny,Nt)");
  const std::vector<int> dc = data_grid.value_or(gc);
  if (dc.size() != 3) throw Error("membrane expects 3 data_grid counts");
  ProblemDef def;
  def.name = "membrane";
  def.mode = mode;
  def.input_names = {"x", "y", "t"};
  def.input_scales = {1.0, 1.0, 1.0};
  def.has_time_axis = true;
  def.plot_time = 0.5;
  def.net.inputs = def.input_names;
  def.net.hidden = {20, 20, 20, 20};
  def.net.activation = Activation::Sin;
  def.net.freq_scale = 2.0 * kPi;
  def.train.seed = 42;

  const std::vector<double> scales = def.input_scales;
  const double om = std::sqrt(2.0) * kPi;
  def.oracle = [om](std::span<const double> p) {
    return std::sin(kPi * p[0]) * std::sin(kPi * p[1]) * std::cos(om * p[2]);
  };
  def.oracle_expr = [om, scales](Graph& g, std::span<const Expr> xs) {
    Expr x = scales[0] == 1.0 ? xs[0] : xs[0] * scales[0];
    Expr y = scales[1] == 1.0 ? xs[1] : xs[1] * scales[1];
    Expr t = scales[2] == 1.0 ? xs[2] : xs[2] * scales[2];
    return sin(g.constant(kPi) * x) * sin(g.constant(kPi) * y) * cos(g.constant(om) * t);
  };

  auto pde = [scales](Graph& g, Expr u, const PhysExprs& phys) {
    Expr uxx = dnth(g, u, 0, 2, scales);
    Expr uyy = dnth(g, u, 1, 2, scales);
    Expr utt = dnth(g, u, 2, 2, scales);
    return phys.at("c") * (uxx + uyy) - utt;
  };

  const AxisSpec xa{0.0, 1.0, gc[0]}, ya{0.0, 1.0, gc[1]};
  if (mode == Mode::Forward) {
    const double T = 1.0 / (2.0 * std::sqrt(2.0));
    const AxisSpec ta{0.0, T, gc[2]};
    def.physical = {PhysicalParam{"c", c_truth, false, 0.0}};
    def.train.epochs = 20000;
    def.train.adam.lr = 2e-3;
    def.terms.push_back(TermBlueprint{"pde", gridN({xa, ya, ta}, Role::Interior), {}, 1.0, pde});
    def.terms.push_back(TermBlueprint{
        "bc", boundary_subset(xa, ya, EdgeSelect::All, &ta, Role::DirichletBoundary), {}, 1.0,
        identity_residual});
    def.terms.push_back(TermBlueprint{
        "ic_u", initial_subset(std::array{xa, ya}, 0.0), {}, 1.0,
        [scales](Graph& g, Expr u, const PhysExprs&) { return u - sin_pi_x_sin_pi_y(g, scales); }});
    def.terms.push_back(TermBlueprint{
        "ic_v", initial_subset(std::array{xa, ya}, 0.0), {}, 1.0,
        [scales](Graph& g, Expr u, const PhysExprs&) { return dnth(g, u, 2, 1, scales); }});
    def.train_window = {{AxisSpec{0, 1, 21}, AxisSpec{0, 1, 21}, AxisSpec{0, T, 6}}, "train"};
    def.eval_window = {{AxisSpec{0, 1, 41}, AxisSpec{0, 1, 41}, AxisSpec{0.5, 0.5, 1}},
                       "slice t=0.5"};
  } else {
    const AxisSpec ta{0.0, 1.0, gc[2]};
    def.physical = {PhysicalParam{"c", c_truth, true, 2.0}};
    def.train.epochs = 3000;
    def.train.batch = 1024;
    def.train.adam.lr = 2e-3;
    CollocationSet pde_grid = gridN({xa, ya, ta}, Role::Interior);
    CollocationSet dgrid = gridN({AxisSpec{0, 1, dc[0]}, AxisSpec{0, 1, dc[1]},
                                  AxisSpec{0, 1, dc[2]}}, Role::Interior);
    CollocationSet data(3, Role::Data);
    std::vector<double> targets;
    targets.reserve(dgrid.size());
    for (std::size_t i = 0; i < dgrid.size(); ++i) {
      const auto p = dgrid.point(i);
      data.append(p);
      targets.push_back(def.oracle(p));
    }
    def.terms.push_back(TermBlueprint{"pde", std::move(pde_grid), {}, 1.0, pde});
    def.terms.push_back(TermBlueprint{"data", std::move(data), std::move(targets), 1.0,
                                      identity_residual});
    def.train_window = {{AxisSpec{0, 1, 21}, AxisSpec{0, 1, 21}, AxisSpec{0, 1, 11}}, "train"};
    def.eval_window = {{AxisSpec{0, 1, 41}, AxisSpec{0, 1, 41}, AxisSpec{0.5, 0.5, 1}},
                       "slice t=0.5"};
  }
  return def;
}

ProblemDef plate_problem(Mode mode, double ic_amplitude,
                         std::optional<std::vector<int>> grid,
                         std::optional<std::vector<int>> data_grid) {
  const double dhat_truth = plate_dhat_truth();
  const double omega_p = 2.0 * kPi * kPi * std::sqrt(dhat_truth);
  const std::vector<int> gc = grid.value_or(
      mode == Mode::Forward ? std::vector<int>{10, 10, 20} : std::vector<int>{20, 20, 20});
  if (gc.size() != 3) throw Error("plate expects 3 grid counts (Nx,Ny,Nt)");
  const std::vector<int> dc = data_grid.value_or(gc);
  if (dc.size() != 3) throw Error("plate expects 3 data_grid counts");

  ProblemDef def;
  def.name = "plate";
  def.mode = mode;
  def.input_names = {"x", "y", "t"};
  def.input_scales = {1.0, 1.0, 1.0};
  def.has_time_axis = true;
  def.plot_time = 0.05;
  def.net.inputs = def.input_names;
  def.net.hidden = {40, 40, 40, 40};
  def.net.activation = Activation::Sin;
  def.net.freq_scale = 2.0 * kPi;
  def.train.seed = 42;
  def.train.epochs = 1000;
  def.train.batch = 512;
  def.train.adam.lr = 2e-3;

  const std::vector<double> scales = def.input_scales;
  const double A = ic_amplitude;
  def.oracle = [omega_p, A](std::span<const double> p) {
    return A * std::sin(kPi * p[0]) * std::sin(kPi * p[1]) * std::cos(omega_p * p[2]);
  };
  def.oracle_expr = [omega_p, A, scales](Graph& g, std::span<const Expr> xs) {
    Expr x = scales[0] == 1.0 ? xs[0] : xs[0] * scales[0];
    Expr y = scales[1] == 1.0 ? xs[1] : xs[1] * scales[1];
    Expr t = scales[2] == 1.0 ? xs[2] : xs[2] * scales[2];
    return g.constant(A) * sin(g.constant(kPi) * x) * sin(g.constant(kPi) * y) *
           cos(g.constant(omega_p) * t);
  };

  // Density-normalized residual: Dhat (u_xxxx + 2 u_xxyy + u_yyyy) + u_tt.
  auto pde = [scales](Graph& g, Expr u, const PhysExprs& phys) {
    Expr uxx = dnth(g, u, 0, 2, scales);
    Expr uyy = dnth(g, u, 1, 2, scales);
    Expr uxxxx = dnth(g, uxx, 0, 2, scales);
    Expr uxxyy = dnth(g, uxx, 1, 2, scales);
    Expr uyyyy = dnth(g, uyy, 1, 2, scales);
    Expr utt = dnth(g, u, 2, 2, scales);
    return phys.at("dhat") * (uxxxx + 2.0 * uxxyy + uyyyy) + utt;
  };

  const AxisSpec xa{0.0, 1.0, gc[0]};
  const AxisSpec ya{0.0, 1.0, gc[1]};
  if (mode == Mode::Forward) {
    const AxisSpec ta{0.0, 0.1, gc[2]};
    def.physical = {PhysicalParam{"dhat", dhat_truth, false, 0.0}};
    def.terms.push_back(TermBlueprint{"pde", gridN({xa, ya, ta}, Role::Interior), {}, 1.0, pde});
    def.terms.push_back(TermBlueprint{
        "bc_u", boundary_subset(xa, ya, EdgeSelect::All, &ta, Role::DirichletBoundary), {}, 1.0,
        identity_residual});
    def.terms.push_back(TermBlueprint{
        "bc_xx", boundary_subset(xa, ya, EdgeSelect::XEdges, &ta, Role::NeumannBoundary), {}, 1.0,
        [scales](Graph& g, Expr u, const PhysExprs&) { return dnth(g, u, 0, 2, scales); }});
    def.terms.push_back(TermBlueprint{
        "bc_yy", boundary_subset(xa, ya, EdgeSelect::YEdges, &ta, Role::NeumannBoundary), {}, 1.0,
        [scales](Graph& g, Expr u, const PhysExprs&) { return dnth(g, u, 1, 2, scales); }});
    def.terms.push_back(TermBlueprint{
        "ic_u", initial_subset(std::array{xa, ya}, 0.0), {}, 1.0,
        [scales, A](Graph& g, Expr u, const PhysExprs&) {
          return u - g.constant(A) * sin_pi_x_sin_pi_y(g, scales);
        }});
    def.terms.push_back(TermBlueprint{
        "ic_v", initial_subset(std::array{xa, ya}, 0.0), {}, 1.0,
        [scales](Graph& g, Expr u, const PhysExprs&) { return dnth(g, u, 2, 1, scales); }});
    def.train_window = {{AxisSpec{0, 1, 21}, AxisSpec{0, 1, 21}, AxisSpec{0, 0.1, 11}}, "train"};
    def.eval_window = def.train_window;
    def.eval_window.label = "eval";
  } else {
    const AxisSpec ta{0.0, 1.0, gc[2]};
    def.physical = {PhysicalParam{"dhat", dhat_truth, true, 0.295}};
    CollocationSet pde_grid = gridN({xa, ya, ta}, Role::Interior);
    CollocationSet dgrid = gridN({AxisSpec{0, 1, dc[0]}, AxisSpec{0, 1, dc[1]},
                                  AxisSpec{0, 1, dc[2]}}, Role::Interior);
    CollocationSet data(3, Role::Data);
    std::vector<double> targets;
    targets.reserve(dgrid.size());
    for (std::size_t i = 0; i < dgrid.size(); ++i) {
      const auto p = dgrid.point(i);
      data.append(p);
      targets.push_back(def.oracle(p));
    }
    def.terms.push_back(TermBlueprint{"pde", std::move(pde_grid), {}, 1.0, pde});
    def.terms.push_back(TermBlueprint{"data", std::move(data), std::move(targets), 1.0,
                                      identity_residual});
    def.train_window = {{AxisSpec{0, 1, 21}, AxisSpec{0, 1, 21}, AxisSpec{0, 1, 11}}, "train"};
    def.eval_window = def.train_window;
    def.eval_window.label = "eval";
  }
  return def;
}

ProblemDef laplace_demo_problem(Mode mode, std::optional<std::vector<int>> grid) {
  const std::vector<int> gc = grid.value_or(std::vector<int>{21, 21});
  if (gc.size() != 2) throw Error("laplace expects 2 grid counts (Nx,Ny)");
  ProblemDef def;
  def.name = "laplace";
  def.mode = mode;
  def.input_names = {"x", "y"};
  def.input_scales = {1.0, 1.0};
  def.net.inputs = def.input_names;
  def.net.hidden = {20, 20};
  def.net.activation = Activation::Tanh;
  def.train.seed = 42;
  def.train.epochs = 8000;
  def.train.adam.lr = 2e-3;

  const std::vector<double> scales = def.input_scales;
  def.oracle = [](std::span<const double> p) { return p[0] * p[0] - p[1] * p[1]; };
  def.oracle_expr = [scales](Graph& g, std::span<const Expr> xs) {
    Expr x = scales[0] == 1.0 ? xs[0] : xs[0] * scales[0];
    Expr y = scales[1] == 1.0 ? xs[1] : xs[1] * scales[1];
    return g.pow_int(x, 2) - g.pow_int(y, 2);
  };

  auto pde = [scales](Graph& g, Expr f, const PhysExprs& phys) {
    return phys.at("kappa") * (dnth(g, f, 0, 2, scales) + dnth(g, f, 1, 2, scales));
  };
  auto dirichlet = [scales](Graph& g, Expr f, const PhysExprs&) {
    Expr x = phys_coord(g, 0, scales);
    Expr y = phys_coord(g, 1, scales);
    return f - (g.pow_int(x, 2) - g.pow_int(y, 2));
  };
  // Measured flux q̄ = ∂(x²−y²)/∂n at unit κ: 2y on y=0, −2y on y=1.
  auto neumann_ymin = [scales](Graph& g, Expr f, const PhysExprs& phys) {
    Expr fy = dnth(g, f, 1, 1, scales);
    Expr y = phys_coord(g, 1, scales);
    return phys.at("kappa") * g.neg(fy) - 2.0 * y;
  };
  auto neumann_ymax = [scales](Graph& g, Expr f, const PhysExprs& phys) {
    Expr fy = dnth(g, f, 1, 1, scales);
    Expr y = phys_coord(g, 1, scales);
    return phys.at("kappa") * fy + 2.0 * y;
  };

  const AxisSpec xa{0.0, 1.0, gc[0]}, ya{0.0, 1.0, gc[1]};
  def.physical = {mode == Mode::Forward ? PhysicalParam{"kappa", 1.0, false, 0.0}
                                        : PhysicalParam{"kappa", 1.0, true, 2.0}};
  def.terms.push_back(TermBlueprint{"pde", gridN({xa, ya}, Role::Interior), {}, 1.0, pde});
  def.terms.push_back(TermBlueprint{
      "bc_f", boundary_subset(xa, ya, EdgeSelect::XEdges, nullptr, Role::DirichletBoundary), {},
      1.0, dirichlet});
  def.terms.push_back(TermBlueprint{
      "bc_q_ymin", boundary_subset(xa, ya, EdgeSelect::YMin, nullptr, Role::NeumannBoundary), {},
      1.0, neumann_ymin});
  def.terms.push_back(TermBlueprint{
      "bc_q_ymax", boundary_subset(xa, ya, EdgeSelect::YMax, nullptr, Role::NeumannBoundary), {},
      1.0, neumann_ymax});
  if (mode == Mode::Inverse) {
    CollocationSet grid = gridN({xa, ya}, Role::Data);
    std::vector<double> targets;
    targets.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      targets.push_back(def.oracle(grid.point(i)));
    def.terms.push_back(TermBlueprint{"data", std::move(grid), std::move(targets), 1.0,
                                      identity_residual});
  }
  def.train_window = {{AxisSpec{0, 1, 41}, AxisSpec{0, 1, 41}}, "train"};
  def.eval_window = def.train_window;
  def.eval_window.label = "eval";
  return def;
}

std::vector<std::string> problem_names() {
  return {"linear-regression", "quadratic-regression", "fourier-smoothing",
          "spring",            "membrane",             "plate",
          "laplace"};
}

ProblemDef make_problem(std::string_view name, Mode mode, const ProblemOptions& opts) {
  auto one_count = [&](const std::optional<std::vector<int>>& v, int fallback,
                       const char* what) {
    if (!v) return fallback;
    if (v->size() != 1) throw Error(std::string(name) + " expects a single " + what + " count");
    return (*v)[0];
  };
  if (name == "linear-regression" || name == "quadratic-regression" ||
      name == "fourier-smoothing") {
    if (mode == Mode::Inverse)
      throw Error("problem '" + std::string(name) + "' has no inverse mode");
    if (opts.grid) throw Error("regression problems take data_grid, not grid");
    if (name == "linear-regression")
      return linear_regression_problem(one_count(opts.data_grid, 100, "data"));
    if (name == "quadratic-regression")
      return quadratic_regression_problem(one_count(opts.data_grid, 100, "data"));
    return fourier_smoothing_problem(one_count(opts.data_grid, 150, "data"));
  }
  if (name == "spring")
    return spring_mass_problem(mode, one_count(opts.grid, 200, "grid"),
                               one_count(opts.data_grid, 200, "data"));
  if (name == "membrane") return membrane_problem(mode, opts.grid, opts.data_grid);
  if (name == "plate") return plate_problem(mode, opts.ic_amplitude, opts.grid, opts.data_grid);
  if (name == "laplace") return laplace_demo_problem(mode, opts.grid);
  throw Error("unknown problem: " + std::string(name));
}

AssembledProblem assemble(const ProblemDef& def, std::uint64_t seed, int threads) {
  Graph g;
  for (const std::string& n : def.input_names) g.input(n);

  ParamStore store;
  Expr u;
  switch (def.model) {
    case ModelKind::Dense: {
      NetworkSpec spec = def.net;
      spec.inputs = def.input_names;
      store = initialize(spec, seed);
      u = build_dense(g, spec, store)[0];
      break;
    }
    case ModelKind::Polynomial: {
      store = ParamStore(dense_layout(polynomial_layout_spec(def.poly_order)));
      u = build_polynomial(g, def.poly_order, store);
      break;
    }
    case ModelKind::Fourier: {
      const int units = def.net.hidden.empty() ? 20 : def.net.hidden[0];
      NetworkSpec spec = fourier_spec(units);
      spec.freq_scale = def.net.freq_scale;
      store = initialize(spec, seed);
      u = build_fourier(g, units, store);
      break;
    }
  }

  PhysExprs phys;
  for (const PhysicalParam& p : def.physical) {
    if (p.trainable)
      phys.emplace(p.name, g.param(store.add_physical(p.name, p.init)));
    else
      phys.emplace(p.name, g.constant(p.truth));
  }

  std::vector<LossTerm> terms;
  terms.reserve(def.terms.size());
  for (const TermBlueprint& bp : def.terms)
    terms.push_back(LossTerm{bp.name, bp.residual(g, u, phys), bp.set, bp.targets, bp.lambda});

  CompositeLoss loss(g, std::move(terms), def.input_scales, threads);
  CompiledExpr uc(g, u);
  return AssembledProblem{def, std::move(store), std::move(loss), std::move(uc)};
}

std::vector<double> predict(const CompiledExpr& u, std::span<const double> params,
                            const CollocationSet& points, std::span<const double> scales) {
  std::vector<double> inv(scales.size(), 1.0);
  for (std::size_t i = 0; i < scales.size(); ++i)
    inv[i] = scales[i] == 0.0 ? 1.0 : 1.0 / scales[i];
  const auto cols = points.column_ptrs();
  const std::size_t n = points.size();
  std::vector<double> out(n, 0.0);
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  CompiledExpr::Workspace ws;
  constexpr std::size_t kC = CompiledExpr::kChunk;
  for (std::size_t c = 0; c * kC < n; ++c) {
    const int cn = static_cast<int>(std::min(kC, n - c * kC));
    u.forward_chunk(ws, params, cols, inv, idx.data() + c * kC, cn, 1);
    for (int l = 0; l < cn; ++l) out[c * kC + static_cast<std::size_t>(l)] = ws.root[static_cast<std::size_t>(l)];
  }
  return out;
}

CollocationSet make_eval_grid(const EvalGrid& grid) {
  return grid_with_slices(grid.axes, Role::Interior);
}

ErrorMetrics evaluate_error(const AssembledProblem& ap, const CollocationSet& grid,
                            std::vector<std::vector<double>>* rows) {
  if (!ap.def.oracle) throw OracleMissing("problem '" + ap.def.name + "' has no oracle");
  const std::vector<double> pred =
      predict(ap.u, ap.store.values(), grid, ap.def.input_scales);
  ErrorMetrics m;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    const double exact = ap.def.oracle(p);
    const double diff = pred[i] - exact;
    num += diff * diff;
    den += exact * exact;
    m.max_abs = std::max(m.max_abs, std::abs(diff));
    if (rows != nullptr) {
      std::vector<double> row(p.begin(), p.end());
      row.push_back(pred[i]);
      row.push_back(exact);
      row.push_back(std::abs(diff));
      rows->push_back(std::move(row));
    }
  }
  m.rel_l2 = den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return m;
}

}  // namespace pinn
