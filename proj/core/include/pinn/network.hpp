#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinn/expr.hpp"

namespace pinn {

enum class Activation { Tanh, Sin, Linear };

const char* activation_name(Activation a);
std::optional<Activation> activation_from(std::string_view name);

/// Architecture of a dense feed-forward network. `hidden` may be empty, in
/// which case the model is the pure affine map y = W x + b.
struct NetworkSpec {
  std::vector<std::string> inputs;
  std::vector<int> hidden;
  Activation activation = Activation::Tanh;
  int outputs = 1;
  /// Initialization-time multiplier for first-layer weights of sin networks.
  double freq_scale = 1.0;

  bool operator==(const NetworkSpec&) const = default;
};

struct LayerLayout {
  int in = 0;
  int out = 0;
  int w_offset = 0;  // out*in weights, row-major per output unit
  int b_offset = 0;  // out biases
  bool operator==(const LayerLayout&) const = default;
};

std::vector<LayerLayout> dense_layout(const NetworkSpec& spec);
int param_count(const NetworkSpec& spec);

/// Flat trainable vector: network parameters (theta, laid out per
/// dense_layout) followed by named physical scalars.
class ParamStore {
 public:
  ParamStore() = default;
  explicit ParamStore(std::vector<LayerLayout> layout);

  const std::vector<LayerLayout>& layout() const { return layout_; }
  int theta_size() const { return theta_size_; }
  int total_size() const { return static_cast<int>(values_.size()); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> theta() { return std::span<double>(values_).first(static_cast<std::size_t>(theta_size_)); }
  double& operator[](int i) { return values_.at(static_cast<std::size_t>(i)); }
  double operator[](int i) const { return values_.at(static_cast<std::size_t>(i)); }

  /// Registers a trainable physical scalar; returns its slot index (>= D).
  int add_physical(const std::string& name, double value);
  int physical_slot(const std::string& name) const;  // -1 when absent
  double physical(const std::string& name) const;
  const std::vector<std::string>& physical_names() const { return physical_names_; }

  void save(const std::filesystem::path& path) const;
  static ParamStore load(const std::filesystem::path& path);

 private:
  std::vector<double> values_;
  std::vector<LayerLayout> layout_;
  std::vector<std::string> physical_names_;
  int theta_size_ = 0;
};

/// One Expr per output; references exactly the spec's input variables and
/// the theta parameter slots. Hidden layers apply the activation, the output
/// layer is affine.
std::vector<Expr> build_dense(Graph& g, const NetworkSpec& spec, const ParamStore& params);

/// b + sum_{k=1..p} W_k x^k with features built inside the graph.
Expr build_polynomial(Graph& g, int order, const ParamStore& params);

/// sum_i W2_i sin(W1_i t + b1_i) + b2 — a single sin hidden layer.
Expr build_fourier(Graph& g, int units, const ParamStore& params);

NetworkSpec fourier_spec(int units);
NetworkSpec polynomial_layout_spec(int order);

/// Glorot-uniform weights (+- sqrt(6/(fan_in+fan_out))), zero biases,
/// deterministic in the seed. For sin activation the first layer's weights
/// are additionally scaled by spec.freq_scale.
ParamStore initialize(const NetworkSpec& spec, std::uint64_t seed);

}  // namespace pinn
