#include "pinn/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "pinn/csv.hpp"
#include "pinn/errors.hpp"

namespace pinn {

namespace {

// Uniform in [0,1) from the top 53 bits; fully specified by the standard's
// mt19937_64 stream, hence bit-reproducible everywhere.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sin: return "sin";
    case Activation::Linear: return "linear";
  }
  return "?";
}

std::optional<Activation> activation_from(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sin") return Activation::Sin;
  if (name == "linear") return Activation::Linear;
  return std::nullopt;
}

std::vector<LayerLayout> dense_layout(const NetworkSpec& spec) {
  if (spec.inputs.empty()) throw LayoutMismatch("network needs at least one input");
  if (spec.outputs < 1) throw LayoutMismatch("network needs at least one output");
  for (int w : spec.hidden)
    if (w < 1) throw LayoutMismatch("hidden widths must be >= 1");
  std::vector<LayerLayout> layout;
  int offset = 0;
  int fan_in = static_cast<int>(spec.inputs.size());
  for (std::size_t i = 0; i <= spec.hidden.size(); ++i) {
    const int fan_out = i < spec.hidden.size() ? spec.hidden[i] : spec.outputs;
    LayerLayout l;
    l.in = fan_in;
    l.out = fan_out;
    l.w_offset = offset;
    l.b_offset = offset + fan_in * fan_out;
    offset = l.b_offset + fan_out;
    layout.push_back(l);
    fan_in = fan_out;
  }
  return layout;
}

int param_count(const NetworkSpec& spec) {
  const auto layout = dense_layout(spec);
  const LayerLayout& last = layout.back();
  return last.b_offset + last.out;
}

ParamStore::ParamStore(std::vector<LayerLayout> layout) : layout_(std::move(layout)) {
  int expected = 0;
  for (const LayerLayout& l : layout_) {
    if (l.w_offset != expected || l.b_offset != expected + l.in * l.out)
      throw LayoutMismatch("layer offsets do not tile the parameter vector");
    expected = l.b_offset + l.out;
  }
  theta_size_ = expected;
  values_.assign(static_cast<std::size_t>(theta_size_), 0.0);
}

int ParamStore::add_physical(const std::string& name, double value) {
  if (physical_slot(name) >= 0) throw LayoutMismatch("duplicate physical parameter: " + name);
  physical_names_.push_back(name);
  values_.push_back(value);
  return static_cast<int>(values_.size()) - 1;
}

int ParamStore::physical_slot(const std::string& name) const {
  for (std::size_t i = 0; i < physical_names_.size(); ++i)
    if (physical_names_[i] == name) return theta_size_ + static_cast<int>(i);
  return -1;
}

double ParamStore::physical(const std::string& name) const {
  int slot = physical_slot(name);
  if (slot < 0) throw LayoutMismatch("unknown physical parameter: " + name);
  return values_[static_cast<std::size_t>(slot)];
}

void ParamStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "pinnvib-params v1\n";
  out << "layers " << layout_.size() << '\n';
  for (const LayerLayout& l : layout_) out << "layer " << l.in << ' ' << l.out << '\n';
  out << "physical " << physical_names_.size() << '\n';
  for (const std::string& n : physical_names_) out << "phys " << n << '\n';
  out << "values " << values_.size() << '\n';
  for (double v : values_) out << fmt_double(v) << '\n';
}

ParamStore ParamStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw IoError("truncated parameter file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "pinnvib-params v1") throw IoError("unrecognized parameter file header");
  std::size_t n_layers = 0, n_phys = 0, n_values = 0;
  {
    std::istringstream is(next_line());
    std::string tag;
    if (!(is >> tag >> n_layers) || tag != "layers") throw IoError("bad layers line");
  }
  std::vector<LayerLayout> layout;
  int offset = 0;
  for (std::size_t i = 0; i < n_layers; ++i) {
    std::istringstream is(next_line());
    std::string tag;
    LayerLayout l;
    if (!(is >> tag >> l.in >> l.out) || tag != "layer") throw IoError("bad layer line");
    l.w_offset = offset;
    l.b_offset = offset + l.in * l.out;
    offset = l.b_offset + l.out;
    layout.push_back(l);
  }
  ParamStore store(std::move(layout));
  {
    std::istringstream is(next_line());
    std::string tag;
    if (!(is >> tag >> n_phys) || tag != "physical") throw IoError("bad physical line");
  }
  for (std::size_t i = 0; i < n_phys; ++i) {
    std::istringstream is(next_line());
    std::string tag, name;
    if (!(is >> tag >> name) || tag != "phys") throw IoError("bad phys line");
    store.add_physical(name, 0.0);
  }
  {
    std::istringstream is(next_line());
    std::string tag;
    if (!(is >> tag >> n_values) || tag != "values") throw IoError("bad values line");
  }
  if (n_values != store.values_.size())
    throw IoError("value count does not match the layout");
  for (std::size_t i = 0; i < n_values; ++i)
    store.values_[i] = parse_double(next_line());
  return store;
}

std::vector<Expr> build_dense(Graph& g, const NetworkSpec& spec, const ParamStore& params) {
  const auto layout = dense_layout(spec);
  if (params.layout() != layout)
    throw LayoutMismatch("parameter store layout does not match the network spec");

  std::vector<Expr> acts;
  acts.reserve(spec.inputs.size());
  for (const std::string& name : spec.inputs) acts.push_back(g.input(name));

  std::vector<Expr> next;
  std::vector<AffineTerm> terms;
  for (std::size_t li = 0; li < layout.size(); ++li) {
    const LayerLayout& l = layout[li];
    const bool is_output = li + 1 == layout.size();
    next.clear();
    next.reserve(static_cast<std::size_t>(l.out));
    for (int i = 0; i < l.out; ++i) {
      terms.clear();
      for (int j = 0; j < l.in; ++j)
        terms.push_back(AffineTerm{g.param(l.w_offset + i * l.in + j), acts[static_cast<std::size_t>(j)]});
      Expr z = g.affine(terms, g.param(l.b_offset + i));
      if (!is_output) {
        switch (spec.activation) {
          case Activation::Tanh: z = g.tanh(z); break;
          case Activation::Sin: z = g.sin(z); break;
          case Activation::Linear: break;
        }
      }
      next.push_back(z);
    }
    acts = next;
  }
  return acts;
}

NetworkSpec polynomial_layout_spec(int order) {
  NetworkSpec spec;
  spec.inputs.resize(static_cast<std::size_t>(order), "x");  // p weights, 1 bias
  spec.hidden = {};
  spec.activation = Activation::Linear;
  spec.outputs = 1;
  return spec;
}

Expr build_polynomial(Graph& g, int order, const ParamStore& params) {
  if (order < 1) throw LayoutMismatch("polynomial order must be >= 1");
  if (params.layout().size() != 1 || params.layout()[0].in != order || params.layout()[0].out != 1)
    throw LayoutMismatch("parameter store does not hold order+1 values");
  Expr x = g.input("x");
  std::vector<AffineTerm> terms;
  for (int k = 1; k <= order; ++k)
    terms.push_back(AffineTerm{g.param(k - 1), g.pow_int(x, k)});
  return g.affine(terms, g.param(order));
}

NetworkSpec fourier_spec(int units) {
  NetworkSpec spec;
  spec.inputs = {"t"};
  spec.hidden = {units};
  spec.activation = Activation::Sin;
  spec.outputs = 1;
  return spec;
}

Expr build_fourier(Graph& g, int units, const ParamStore& params) {
  if (units < 1) throw LayoutMismatch("fourier network needs at least one unit");
  return build_dense(g, fourier_spec(units), params)[0];
}

ParamStore initialize(const NetworkSpec& spec, std::uint64_t seed) {
  ParamStore store{dense_layout(spec)};
  std::mt19937_64 rng(seed);
  auto values = store.values();
  const auto& layout = store.layout();
  for (std::size_t li = 0; li < layout.size(); ++li) {
    const LayerLayout& l = layout[li];
    double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    if (li == 0 && spec.activation == Activation::Sin) limit *= spec.freq_scale;
    for (int k = 0; k < l.in * l.out; ++k)
      values[static_cast<std::size_t>(l.w_offset + k)] = (2.0 * next_unit(rng) - 1.0) * limit;
    // biases stay exactly zero
  }
  return store;
}

}  // namespace pinn
