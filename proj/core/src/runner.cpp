#include "pinn/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pinn/plot.hpp"

namespace pinn {

namespace fs = std::filesystem;

std::filesystem::path output_root() {
  const char* root = std::getenv("PINNVIB_OUT_ROOT");
  return root != nullptr && *root != '\0' ? fs::path(root) : fs::current_path();
}

namespace {

ProblemDef resolve_problem(const RunConfig& cfg) {
  ProblemOptions opts;
  if (cfg.ic_amplitude) opts.ic_amplitude = *cfg.ic_amplitude;
  opts.grid = cfg.grid;
  opts.data_grid = cfg.data_grid;
  ProblemDef def = make_problem(cfg.problem, cfg.mode, opts);
  if (cfg.widths) def.net.hidden = *cfg.widths;
  if (cfg.activation) def.net.activation = *cfg.activation;
  if (cfg.freq_scale) def.net.freq_scale = *cfg.freq_scale;
  if (cfg.epochs) def.train.epochs = *cfg.epochs;
  if (cfg.batch) def.train.batch = *cfg.batch;
  if (cfg.lr) def.train.adam.lr = *cfg.lr;
  if (cfg.seed) def.train.seed = *cfg.seed;
  if (cfg.lambda_mode) def.train.lambda_mode = *cfg.lambda_mode;
  if (cfg.rebalance_alpha) def.train.rebalance_alpha = *cfg.rebalance_alpha;
  if (cfg.rebalance_period) def.train.rebalance_period = *cfg.rebalance_period;
  if (cfg.stop_tol) def.train.stop_tol = *cfg.stop_tol;
  if (cfg.threads) def.train.threads = *cfg.threads;
  if (cfg.plot_time) def.plot_time = *cfg.plot_time;
  return def;
}

void write_train_log(const fs::path& path, const AssembledProblem& ap,
                     const TrainReport& report) {
  CsvWriter csv(path);
  std::vector<std::string> cols{"epoch", "total"};
  for (std::size_t i = 0; i < ap.loss.term_count(); ++i)
    cols.push_back("mse_" + ap.loss.term_name(i));
  for (std::size_t i = 0; i < ap.loss.term_count(); ++i)
    cols.push_back("lambda_" + ap.loss.term_name(i));
  for (const std::string& n : ap.store.physical_names()) cols.push_back(n);
  csv.header(cols);
  std::vector<double> row;
  for (const EpochLog& log : report.history) {
    row.clear();
    row.push_back(static_cast<double>(log.epoch));
    row.push_back(log.total);
    row.insert(row.end(), log.term_mse.begin(), log.term_mse.end());
    row.insert(row.end(), log.lambdas.begin(), log.lambdas.end());
    row.insert(row.end(), log.physical.begin(), log.physical.end());
    csv.row(row);
  }
}

void write_inversion_history(const fs::path& path, const AssembledProblem& ap,
                             const TrainReport& report) {
  CsvWriter csv(path);
  std::vector<std::string> cols{"epoch"};
  for (const std::string& n : ap.store.physical_names()) cols.push_back(n);
  csv.header(cols);
  std::vector<double> row;
  for (const EpochLog& log : report.history) {
    row.clear();
    row.push_back(static_cast<double>(log.epoch));
    row.insert(row.end(), log.physical.begin(), log.physical.end());
    csv.row(row);
  }
}

void write_results_csv(const fs::path& path, const AssembledProblem& ap) {
  CsvWriter csv(path);
  std::vector<std::string> cols = ap.def.input_names;
  cols.push_back("u_pred");
  cols.push_back("u_exact");
  cols.push_back("abs_err");
  csv.header(cols);
  std::vector<std::vector<double>> rows;
  CollocationSet train_grid = make_eval_grid(ap.def.train_window);
  evaluate_error(ap, train_grid, &rows);
  if (ap.def.eval_window.label != ap.def.train_window.label) {
    CollocationSet eval_grid = make_eval_grid(ap.def.eval_window);
    evaluate_error(ap, eval_grid, &rows);
  }
  for (const auto& r : rows) csv.row(r);
}

void emit_plot_files(const fs::path& dir, const AssembledProblem& ap, double plot_time) {
  fs::create_directories(dir);
  const int dim = static_cast<int>(ap.def.input_names.size());
  if (dim == 1) {
    // prediction vs oracle over the training and evaluation windows
    std::vector<AxisSpec> axes = ap.def.train_window.axes;
    const double hi = ap.def.eval_window.axes[0].hi;
    AxisSpec full{axes[0].lo, std::max(axes[0].hi, hi), 2 * axes[0].count};
    CollocationSet grid = grid_with_slices(std::vector<AxisSpec>{full});
    std::vector<double> pred = predict(ap.u, ap.store.values(), grid, ap.def.input_scales);
    std::vector<double> xs(grid.size()), exact(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      xs[i] = grid.coord(i, 0);
      exact[i] = ap.def.oracle(grid.point(i));
    }
    write_ppm(dir / "prediction.ppm", line_plot(xs, pred, exact));
    return;
  }
  // 2-D (or a time slice of 3-D): pred / exact / abs error heatmaps
  const int n = 41;
  std::vector<AxisSpec> axes{AxisSpec{0, 1, n}, AxisSpec{0, 1, n}};
  if (ap.def.has_time_axis) axes.push_back(AxisSpec{plot_time, plot_time, 1});
  CollocationSet grid = grid_with_slices(axes);
  std::vector<double> pred = predict(ap.u, ap.store.values(), grid, ap.def.input_scales);
  std::vector<double> exact(grid.size()), abserr(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    exact[i] = ap.def.oracle(grid.point(i));
    abserr[i] = std::abs(pred[i] - exact[i]);
  }
  const std::string suffix = ap.def.has_time_axis ? "_t" + fmt_double(plot_time) : "";
  write_ppm(dir / ("pred" + suffix + ".ppm"), heatmap(pred, n, n));
  write_ppm(dir / ("exact" + suffix + ".ppm"), heatmap(exact, n, n));
  write_ppm(dir / ("abserr" + suffix + ".ppm"), heatmap(abserr, n, n));
}

}  // namespace

RunResult run(const RunConfig& config) {
  ProblemDef def = resolve_problem(config);

  RunConfig resolved = config;
  if (!resolved.seed) resolved.seed = def.train.seed;
  if (resolved.out_dir.empty())
    resolved.out_dir = def.name + "-" + mode_name(def.mode);
  fs::path dir = fs::path(resolved.out_dir);
  if (dir.is_relative()) dir = output_root() / dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory: " + dir.string());

  {
    std::ofstream cfg_out(dir / "config.ini");
    if (!cfg_out) throw IoError("cannot write config copy");
    cfg_out << serialize_config(resolved);
  }

  AssembledProblem ap = assemble(def, def.train.seed, def.train.threads);
  TrainReport report = train(ap.loss, ap.store, def.train);

  write_train_log(dir / "train_log.csv", ap, report);
  ap.store.save(dir / "params.txt");
  if (def.mode == Mode::Inverse)
    write_inversion_history(dir / "inversion_history.csv", ap, report);
  write_results_csv(dir / "results.csv", ap);

  CollocationSet train_grid = make_eval_grid(def.train_window);
  CollocationSet eval_grid = make_eval_grid(def.eval_window);
  const ErrorMetrics train_m = evaluate_error(ap, train_grid);
  const ErrorMetrics eval_m = evaluate_error(ap, eval_grid);

  KeyValueFile metrics;
  metrics.set("problem", def.name);
  metrics.set("mode", mode_name(def.mode));
  metrics.set("seed", std::to_string(def.train.seed));
  metrics.set("epochs", std::to_string(def.train.epochs));
  metrics.set("epochs_run", std::to_string(report.epochs_run));
  metrics.set("batch", std::to_string(def.train.batch));
  metrics.set("lr", fmt_double(def.train.adam.lr));
  metrics.set("activation", activation_name(def.net.activation));
  metrics.set("status", train_status_name(report.status));
  if (!report.history.empty()) {
    const EpochLog& last = report.history.back();
    metrics.set("final_total_loss", last.total);
    for (std::size_t i = 0; i < ap.loss.term_count(); ++i)
      metrics.set("final_mse_" + ap.loss.term_name(i), last.term_mse[i]);
    for (std::size_t i = 0; i < ap.loss.term_count(); ++i)
      metrics.set("lambda_" + ap.loss.term_name(i), last.lambdas[i]);
  }
  for (const PhysicalParam& p : def.physical) {
    if (!p.trainable) continue;
    metrics.set("phys_" + p.name, ap.store.physical(p.name));
    metrics.set("phys_" + p.name + "_truth", p.truth);
    metrics.set("phys_" + p.name + "_init", p.init);
  }
  metrics.set("train_window", def.train_window.label);
  metrics.set("rel_l2_train", train_m.rel_l2);
  metrics.set("max_abs_train", train_m.max_abs);
  metrics.set("eval_window", def.eval_window.label);
  metrics.set("rel_l2_eval", eval_m.rel_l2);
  metrics.set("max_abs_eval", eval_m.max_abs);
  metrics.save(dir / "metrics.txt");

  {
    KeyValueFile runinfo;
    runinfo.set("wall_seconds", report.wall_seconds);
    runinfo.set("threads", std::to_string(def.train.threads));
    for (const std::string& w : report.warnings) runinfo.set("warning", w);
    runinfo.save(dir / "runinfo.txt");
  }

  if (resolved.emit_plots)
    emit_plot_files(dir / "plots", ap, resolved.plot_time.value_or(def.plot_time));

  return RunResult{dir, std::move(report), std::move(metrics), std::move(ap.store)};
}

Comparison compare(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b) {
  const KeyValueFile ma = KeyValueFile::load(dir_a / "metrics.txt");
  const KeyValueFile mb = KeyValueFile::load(dir_b / "metrics.txt");
  const std::string* pa = ma.find("problem");
  const std::string* pb = mb.find("problem");
  if (pa == nullptr || pb == nullptr) throw IoError("metrics file lacks a problem field");
  if (*pa != *pb)
    throw MismatchedProblems("runs compare different problems: " + *pa + " vs " + *pb);

  Comparison cmp;
  cmp.problem = *pa;
  cmp.metric_names = {"rel_l2_train", "max_abs_train", "rel_l2_eval", "max_abs_eval",
                      "final_total_loss"};
  std::ostringstream os;
  os << "metric               A                      B                      delta\n";
  for (const std::string& name : cmp.metric_names) {
    const double va = ma.get_double(name);
    const double vb = mb.get_double(name);
    cmp.a_values.push_back(va);
    cmp.b_values.push_back(vb);
    os << name;
    for (std::size_t k = name.size(); k < 21; ++k) os << ' ';
    std::string sa = fmt_double(va), sb = fmt_double(vb);
    os << sa;
    for (std::size_t k = sa.size(); k < 23; ++k) os << ' ';
    os << sb;
    for (std::size_t k = sb.size(); k < 23; ++k) os << ' ';
    os << fmt_double(vb - va) << '\n';
  }
  cmp.text = os.str();
  return cmp;
}

void write_comparison_csv(const Comparison& cmp, const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> cols{"metric", "a", "b", "delta"};
  csv.header(cols);
  for (std::size_t i = 0; i < cmp.metric_names.size(); ++i) {
    csv.raw_row(cmp.metric_names[i] + ',' + fmt_double(cmp.a_values[i]) + ',' +
                fmt_double(cmp.b_values[i]) + ',' +
                fmt_double(cmp.b_values[i] - cmp.a_values[i]));
  }
}

}  // namespace pinn
