// Command-line front end: run experiment configs, reproduce the named
// experiments, and compare completed runs.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pinn/config.hpp"
#include "pinn/runner.hpp"

namespace {

int status_code(pinn::TrainStatus s) {
  switch (s) {
    case pinn::TrainStatus::Converged: return 0;
    case pinn::TrainStatus::EpochsExhausted: return 2;
    case pinn::TrainStatus::Diverged: return 3;
  }
  return 1;
}

int execute(pinn::RunConfig cfg) {
  const pinn::RunResult result = pinn::run(cfg);
  std::cout << "run directory: " << result.dir.string() << '\n';
  std::cout << "status: " << pinn::train_status_name(result.report.status) << '\n';
  if (const std::string* v = result.metrics.find("rel_l2_train"))
    std::cout << "rel_l2_train: " << *v << '\n';
  if (const std::string* v = result.metrics.find("rel_l2_eval"))
    std::cout << "rel_l2_eval (" << *result.metrics.find("eval_window") << "): " << *v << '\n';
  for (const std::string& name : result.store.physical_names())
    std::cout << name << ": " << pinn::fmt_double(result.store.physical(name)) << '\n';
  std::cout << "wall seconds: " << result.report.wall_seconds << '\n';
  return status_code(result.report.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics-informed neural network solver for structural vibration problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::string dir_a, dir_b, compare_csv;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  int threads_override = 0;
  int epochs_override = 0;
  std::string out_override;
  bool plots = false;

  auto* run_cmd = app.add_subcommand("run", "run a key=value config file");
  run_cmd->add_option("config", config_path, "config file path")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed_override, "override the training seed");
  run_cmd->add_option("--threads", threads_override, "override evaluation threads");
  run_cmd->add_option("--out", out_override, "override the output directory");

  std::string preset_list;
  for (const std::string& p : pinn::preset_names()) preset_list += "\n  " + p;
  auto* rep_cmd = app.add_subcommand("reproduce", "run a named experiment preset:" + preset_list);
  rep_cmd->add_option("name", preset_name, "preset name")->required();
  auto* rep_seed_opt = rep_cmd->add_option("--seed", seed_override, "override the training seed");
  rep_cmd->add_option("--threads", threads_override, "override evaluation threads");
  rep_cmd->add_option("--epochs", epochs_override, "override the epoch budget");
  rep_cmd->add_option("--out", out_override, "override the output directory");
  rep_cmd->add_flag("--plots", plots, "emit plot files");

  auto* cmp_cmd = app.add_subcommand("compare", "compare two completed runs");
  cmp_cmd->add_option("dirA", dir_a, "first run directory")->required();
  cmp_cmd->add_option("dirB", dir_b, "second run directory")->required();
  cmp_cmd->add_option("--csv", compare_csv, "also write the table as CSV to this path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot open config file: " << config_path << '\n';
        return 1;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      pinn::RunConfig cfg = pinn::parse_config(ss.str());
      has_seed = seed_opt->count() > 0;
      if (has_seed) cfg.seed = seed_override;
      if (threads_override > 0) cfg.threads = threads_override;
      if (!out_override.empty()) cfg.out_dir = out_override;
      return execute(std::move(cfg));
    }
    if (rep_cmd->parsed()) {
      pinn::RunConfig cfg = pinn::preset_config(preset_name);
      has_seed = rep_seed_opt->count() > 0;
      if (has_seed) cfg.seed = seed_override;
      if (threads_override > 0) cfg.threads = threads_override;
      if (epochs_override > 0) cfg.epochs = epochs_override;
      if (!out_override.empty()) cfg.out_dir = out_override;
      cfg.emit_plots = plots;
      return execute(std::move(cfg));
    }
    if (cmp_cmd->parsed()) {
      pinn::Comparison cmp = pinn::compare(dir_a, dir_b);
      std::cout << "problem: " << cmp.problem << '\n' << cmp.text;
      if (!compare_csv.empty()) pinn::write_comparison_csv(cmp, compare_csv);
      return 0;
    }
  } catch (const pinn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const pinn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
