#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pinn/expr.hpp"

namespace pinn {

/// Bindings for one evaluation: one value per input variable, and the flat
/// trainable vector (network parameters followed by physical scalars).
struct EvalContext {
  std::span<const double> inputs;
  std::span<const double> params;
};

/// A flattened, self-contained execution plan for one scalar expression.
/// Holds its own copy of constants and instruction operands, so the source
/// Graph may be discarded after compilation. Evaluation is a pure function
/// of (plan, bindings); instances are immutable and safe to share across
/// threads as long as each caller owns its Workspace.
class CompiledExpr {
 public:
  static constexpr int kChunk = 64;

  CompiledExpr() = default;
  CompiledExpr(const Graph& graph, Expr root);

  /// Single-point evaluation. Bit-identical across repeated calls.
  double eval(const EvalContext& ctx) const;

  /// Reverse-mode sweep: grad[i] += d(expr)/d(param_i); returns the value.
  double value_and_param_gradient(const EvalContext& ctx, std::span<double> grad) const;

  struct Workspace {
    std::vector<double> values;    // slot-major, kChunk lanes per slot
    std::vector<double> adjoints;  // all-zero between reverse sweeps
    std::array<double, kChunk> root;
    std::array<double, kChunk> seed;
    std::uint64_t params_stamp = 0;
  };

  void init_workspace(Workspace& ws) const;

  /// Evaluate lanes [0, n) with inputs gathered from per-variable columns:
  /// input i of lane l binds cols[i][idx[l]] * inv_scale[i]. Root values are
  /// written to ws.root. `stamp` lets callers skip re-broadcasting unchanged
  /// parameters across chunks (0 forces a refill).
  void forward_chunk(Workspace& ws, std::span<const double> params,
                     std::span<const double* const> cols,
                     std::span<const double> inv_scale, const std::uint32_t* idx,
                     int n, std::uint64_t stamp = 0) const;

  /// Reverse sweep for the lanes of the preceding forward_chunk, seeding the
  /// root adjoint with ws.seed. Accumulates parameter adjoints into `grad`
  /// in fixed lane order (deterministic for any thread count).
  void reverse_chunk(Workspace& ws, int n, std::span<double> grad) const;

  int inputs_used() const { return inputs_used_; }
  int params_used() const { return params_used_; }
  std::size_t slot_count() const { return code_.size(); }

 private:
  struct Instr {
    Op op;
    std::int32_t a;
    std::int32_t b;
  };

  std::vector<Instr> code_;
  std::vector<double> cpool_;
  std::vector<std::int32_t> affine_args_;  // slot-based [bias, c, v, ...] runs
  int inputs_used_ = 0;
  int params_used_ = 0;
};

// Spec-facing free functions over the one-shot path.
double evaluate(Expr expr, const EvalContext& ctx);
std::vector<double> parameter_gradient(Expr expr, const EvalContext& ctx);
double finite_difference_check(Expr expr, const EvalContext& ctx, double h);

}  // namespace pinn
