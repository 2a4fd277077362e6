#include "pinn/config.hpp"

#include <algorithm>
#include <sstream>

#include "pinn/csv.hpp"
#include "pinn/errors.hpp"

namespace pinn {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<int> parse_int_list(const std::string& value, int line) {
  std::vector<int> out;
  std::istringstream is(value);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(item, &pos);
    } catch (...) {
      throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line) + ": bad integer '" + item + "'", line);
    }
    if (pos != item.size())
      throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line) + ": bad integer '" + item + "'", line);
    out.push_back(v);
  }
  if (out.empty())
    throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line) + ": empty list", line);
  return out;
}

double parse_num(const std::string& value, int line) {
  bool ok = false;
  double v = parse_double(value, &ok);
  if (!ok)
    throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line) + ": bad number '" + value + "'", line);
  return v;
}

int parse_int(const std::string& value, int line) {
  double v = parse_num(value, line);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line) + ": expected integer, got '" + value + "'", line);
  return i;
}

bool parse_bool(const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line) + ": bad boolean '" + value + "'", line);
}

[[noreturn]] void unknown_key(const std::string& section, const std::string& key, int line) {
  throw ConfigError(ConfigError::Kind::UnknownKey,
                    "line " + std::to_string(line) + ": unknown key '" + key + "' in [" + section + "]", line);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::string section = "problem";
  int line_no = 0;
  bool saw_problem = false;

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    std::size_t hash = stripped.find('#');
    if (hash != std::string::npos) stripped = trim(stripped.substr(0, hash));
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": unterminated section header", line_no);
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section != "problem" && section != "network" && section != "training" && section != "output")
        throw ConfigError(ConfigError::Kind::UnknownKey, "line " + std::to_string(line_no) + ": unknown section [" + section + "]", line_no);
      continue;
    }
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": expected key=value", line_no);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (value.empty()) continue;  // unset optional

    if (section == "problem") {
      if (key == "problem" || key == "name") {
        cfg.problem = value;
        saw_problem = true;
      } else if (key == "mode") {
        auto m = mode_from(value);
        if (!m) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": bad mode '" + value + "'", line_no);
        cfg.mode = *m;
      } else if (key == "grid") {
        cfg.grid = parse_int_list(value, line_no);
        for (int c : *cfg.grid)
          if (c < 2) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": grid counts must be >= 2", line_no);
      } else if (key == "data_grid") {
        cfg.data_grid = parse_int_list(value, line_no);
        for (int c : *cfg.data_grid)
          if (c < 2) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": grid counts must be >= 2", line_no);
      } else if (key == "ic_amplitude") {
        cfg.ic_amplitude = parse_num(value, line_no);
      } else {
        unknown_key(section, key, line_no);
      }
    } else if (section == "network") {
      if (key == "widths") {
        cfg.widths = parse_int_list(value, line_no);
        for (int w : *cfg.widths)
          if (w < 1) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": widths must be >= 1", line_no);
      } else if (key == "activation") {
        auto a = activation_from(value);
        if (!a) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": bad activation '" + value + "'", line_no);
        cfg.activation = *a;
      } else if (key == "freq_scale") {
        cfg.freq_scale = parse_num(value, line_no);
      } else {
        unknown_key(section, key, line_no);
      }
    } else if (section == "training") {
      if (key == "epochs") {
        int e = parse_int(value, line_no);
        if (e < 1) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": epochs must be >= 1", line_no);
        cfg.epochs = e;
      } else if (key == "batch") {
        int b = parse_int(value, line_no);
        if (b < 0) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": batch must be >= 0", line_no);
        cfg.batch = b;
      } else if (key == "lr") {
        double lr = parse_num(value, line_no);
        if (!(lr > 0.0)) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": lr must be > 0", line_no);
        cfg.lr = lr;
      } else if (key == "seed") {
        double s = parse_num(value, line_no);
        if (s < 0) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": seed must be >= 0", line_no);
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (key == "lambda_mode") {
        if (value == "static") cfg.lambda_mode = LambdaMode::Static;
        else if (value == "rebalance") cfg.lambda_mode = LambdaMode::Rebalance;
        else throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": bad lambda_mode '" + value + "'", line_no);
      } else if (key == "rebalance_alpha") {
        cfg.rebalance_alpha = parse_num(value, line_no);
      } else if (key == "rebalance_period") {
        cfg.rebalance_period = parse_int(value, line_no);
      } else if (key == "stop_tol") {
        cfg.stop_tol = parse_num(value, line_no);
      } else if (key == "threads") {
        int t = parse_int(value, line_no);
        if (t < 1) throw ConfigError(ConfigError::Kind::BadValue, "line " + std::to_string(line_no) + ": threads must be >= 1", line_no);
        cfg.threads = t;
      } else {
        unknown_key(section, key, line_no);
      }
    } else {  // output
      if (key == "dir") {
        cfg.out_dir = value;
      } else if (key == "emit_plots") {
        cfg.emit_plots = parse_bool(value, line_no);
      } else if (key == "plot_time") {
        cfg.plot_time = parse_num(value, line_no);
      } else {
        unknown_key(section, key, line_no);
      }
    }
  }

  if (!saw_problem || cfg.problem.empty())
    throw ConfigError(ConfigError::Kind::MissingProblem, "config does not name a problem", 0);
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), cfg.problem) == names.end())
    throw ConfigError(ConfigError::Kind::BadValue, "unknown problem '" + cfg.problem + "'", 0);
  return cfg;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  };
  os << "problem = " << c.problem << '\n';
  os << "mode = " << mode_name(c.mode) << '\n';
  if (c.grid) os << "grid = " << list(*c.grid) << '\n';
  if (c.data_grid) os << "data_grid = " << list(*c.data_grid) << '\n';
  if (c.ic_amplitude) os << "ic_amplitude = " << fmt_double(*c.ic_amplitude) << '\n';
  os << "\n[network]\n";
  if (c.widths) os << "widths = " << list(*c.widths) << '\n';
  if (c.activation) os << "activation = " << activation_name(*c.activation) << '\n';
  if (c.freq_scale) os << "freq_scale = " << fmt_double(*c.freq_scale) << '\n';
  os << "\n[training]\n";
  if (c.epochs) os << "epochs = " << *c.epochs << '\n';
  if (c.batch) os << "batch = " << *c.batch << '\n';
  if (c.lr) os << "lr = " << fmt_double(*c.lr) << '\n';
  if (c.seed) os << "seed = " << *c.seed << '\n';
  if (c.lambda_mode)
    os << "lambda_mode = " << (*c.lambda_mode == LambdaMode::Static ? "static" : "rebalance") << '\n';
  if (c.rebalance_alpha) os << "rebalance_alpha = " << fmt_double(*c.rebalance_alpha) << '\n';
  if (c.rebalance_period) os << "rebalance_period = " << *c.rebalance_period << '\n';
  if (c.stop_tol) os << "stop_tol = " << fmt_double(*c.stop_tol) << '\n';
  if (c.threads) os << "threads = " << *c.threads << '\n';
  os << "\n[output]\n";
  if (!c.out_dir.empty()) os << "dir = " << c.out_dir << '\n';
  os << "emit_plots = " << (c.emit_plots ? "true" : "false") << '\n';
  if (c.plot_time) os << "plot_time = " << fmt_double(*c.plot_time) << '\n';
  return os.str();
}

std::vector<std::string> preset_names() {
  return {"linear-regression", "quadratic-regression", "fourier-smoothing",
          "spring-forward",    "spring-inverse",       "membrane-forward",
          "membrane-inverse",  "plate-forward",        "plate-inverse",
          "laplace-demo"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  if (name == "linear-regression" || name == "quadratic-regression" ||
      name == "fourier-smoothing") {
    cfg.problem = name;
    cfg.mode = Mode::Forward;
  } else if (name == "spring-forward") {
    cfg.problem = "spring";
    cfg.mode = Mode::Forward;
  } else if (name == "spring-inverse") {
    cfg.problem = "spring";
    cfg.mode = Mode::Inverse;
  } else if (name == "membrane-forward") {
    cfg.problem = "membrane";
    cfg.mode = Mode::Forward;
  } else if (name == "membrane-inverse") {
    cfg.problem = "membrane";
    cfg.mode = Mode::Inverse;
  } else if (name == "plate-forward") {
    cfg.problem = "plate";
    cfg.mode = Mode::Forward;
  } else if (name == "plate-inverse") {
    cfg.problem = "plate";
    cfg.mode = Mode::Inverse;
  } else if (name == "laplace-demo") {
    cfg.problem = "laplace";
    cfg.mode = Mode::Forward;
  } else {
    throw Error("unknown preset: " + name);
  }
  cfg.out_dir = name;
  return cfg;
}

}  // namespace pinn
