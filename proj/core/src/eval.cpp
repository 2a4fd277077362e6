#include "pinn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "detail_math.hpp"

namespace pinn {

namespace {
constexpr int kC = CompiledExpr::kChunk;

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}
}  // namespace

CompiledExpr::CompiledExpr(const Graph& graph, Expr root) {
  if (root.graph() != &graph) throw Error("root does not belong to the graph");
  // Reachable ids ascending == topological order (children precede parents).
  std::vector<std::int32_t> stack{root.id()};
  std::vector<bool> seen(graph.nodes_.size(), false);
  std::vector<std::int32_t> reach;
  while (!stack.empty()) {
    std::int32_t id = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(id)]) continue;
    seen[static_cast<std::size_t>(id)] = true;
    reach.push_back(id);
    const auto& n = graph.nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
      case Op::kParam:
        break;
      case Op::kAffine:
        for (std::int32_t i = 0; i <= 2 * n.b; ++i)
          stack.push_back(graph.affine_args_[static_cast<std::size_t>(n.a + i)]);
        break;
      case Op::kNeg:
      case Op::kSin:
      case Op::kCos:
      case Op::kTanh:
      case Op::kExp:
      case Op::kPowInt:
        stack.push_back(n.a);
        break;
      default:
        stack.push_back(n.a);
        stack.push_back(n.b);
        break;
    }
  }
  std::sort(reach.begin(), reach.end());
  std::unordered_map<std::int32_t, std::int32_t> slot;
  slot.reserve(reach.size() * 2);
  for (std::size_t i = 0; i < reach.size(); ++i)
    slot[reach[i]] = static_cast<std::int32_t>(i);

  code_.reserve(reach.size());
  for (std::int32_t id : reach) {
    const auto& n = graph.nodes_[static_cast<std::size_t>(id)];
    Instr ins{n.op, -1, -1};
    switch (n.op) {
      case Op::kConst: {
        double v = graph.const_pool_[static_cast<std::size_t>(n.a)];
        ins.a = static_cast<std::int32_t>(cpool_.size());
        cpool_.push_back(v);
        break;
      }
      case Op::kInput:
        ins.a = n.a;
        inputs_used_ = std::max(inputs_used_, n.a + 1);
        break;
      case Op::kParam:
        ins.a = n.a;
        params_used_ = std::max(params_used_, n.a + 1);
        break;
      case Op::kPowInt:
        ins.a = slot.at(n.a);
        ins.b = n.b;
        break;
      case Op::kNeg:
      case Op::kSin:
      case Op::kCos:
      case Op::kTanh:
      case Op::kExp:
        ins.a = slot.at(n.a);
        break;
      case Op::kAffine: {
        ins.a = static_cast<std::int32_t>(affine_args_.size());
        ins.b = n.b;
        for (std::int32_t i = 0; i <= 2 * n.b; ++i)
          affine_args_.push_back(
              slot.at(graph.affine_args_[static_cast<std::size_t>(n.a + i)]));
        break;
      }
      default:
        ins.a = slot.at(n.a);
        ins.b = slot.at(n.b);
        break;
    }
    code_.push_back(ins);
  }
}

void CompiledExpr::init_workspace(Workspace& ws) const {
  ws.values.assign(code_.size() * kC, 0.0);
  ws.adjoints.assign(code_.size() * kC, 0.0);
  ws.params_stamp = 0;
  // Constants never change; broadcast them once.
  for (std::size_t s = 0; s < code_.size(); ++s) {
    if (code_[s].op == Op::kConst) {
      double v = cpool_[static_cast<std::size_t>(code_[s].a)];
      double* out = ws.values.data() + s * kC;
      for (int l = 0; l < kC; ++l) out[l] = v;
    }
  }
}

void CompiledExpr::forward_chunk(Workspace& ws, std::span<const double> params,
                                 std::span<const double* const> cols,
                                 std::span<const double> inv_scale,
                                 const std::uint32_t* idx, int n,
                                 std::uint64_t stamp) const {
  if (inputs_used_ > static_cast<int>(cols.size()))
    throw UnboundVariable("expression references input variable " +
                          std::to_string(inputs_used_ - 1) + " but only " +
                          std::to_string(cols.size()) + " columns are bound");
  if (params_used_ > static_cast<int>(params.size()))
    throw UnboundVariable("expression references parameter " +
                          std::to_string(params_used_ - 1) + " but only " +
                          std::to_string(params.size()) + " values are bound");
  if (ws.values.size() != code_.size() * kC) init_workspace(ws);

  const bool fill_params = stamp == 0 || ws.params_stamp != stamp;
  ws.params_stamp = stamp;
  double* const vals = ws.values.data();
  const std::size_t count = code_.size();
  for (std::size_t s = 0; s < count; ++s) {
    const Instr ins = code_[s];
    double* out = vals + s * kC;
    switch (ins.op) {
      case Op::kConst:
        break;  // pre-broadcast
      case Op::kParam: {
        if (fill_params) {
          const double v = params[static_cast<std::size_t>(ins.a)];
          for (int l = 0; l < kC; ++l) out[l] = v;
        }
        break;
      }
      case Op::kInput: {
        const double* col = cols[static_cast<std::size_t>(ins.a)];
        const double scale =
            inv_scale.empty() ? 1.0 : inv_scale[static_cast<std::size_t>(ins.a)];
        for (int l = 0; l < n; ++l) out[l] = col[idx[l]] * scale;
        break;
      }
      case Op::kAdd: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        const double* b = vals + static_cast<std::size_t>(ins.b) * kC;
        for (int l = 0; l < n; ++l) out[l] = a[l] + b[l];
        break;
      }
      case Op::kSub: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        const double* b = vals + static_cast<std::size_t>(ins.b) * kC;
        for (int l = 0; l < n; ++l) out[l] = a[l] - b[l];
        break;
      }
      case Op::kMul: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        const double* b = vals + static_cast<std::size_t>(ins.b) * kC;
        for (int l = 0; l < n; ++l) out[l] = a[l] * b[l];
        break;
      }
      case Op::kDiv: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        const double* b = vals + static_cast<std::size_t>(ins.b) * kC;
        for (int l = 0; l < n; ++l) out[l] = a[l] / b[l];
        break;
      }
      case Op::kNeg: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) out[l] = -a[l];
        break;
      }
      case Op::kSin: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) out[l] = std::sin(a[l]);
        break;
      }
      case Op::kCos: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) out[l] = std::cos(a[l]);
        break;
      }
      case Op::kTanh: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) out[l] = std::tanh(a[l]);
        break;
      }
      case Op::kExp: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) out[l] = std::exp(a[l]);
        break;
      }
      case Op::kPowInt: {
        const double* a = vals + static_cast<std::size_t>(ins.a) * kC;
        const int e = ins.b;
        for (int l = 0; l < n; ++l) out[l] = detail::powi(a[l], e);
        break;
      }
      case Op::kAffine: {
        const std::int32_t* args = affine_args_.data() + ins.a;
        const double* bias = vals + static_cast<std::size_t>(args[0]) * kC;
        for (int l = 0; l < n; ++l) out[l] = bias[l];
        for (std::int32_t k = 0; k < ins.b; ++k) {
          const double* c = vals + static_cast<std::size_t>(args[1 + 2 * k]) * kC;
          const double* v = vals + static_cast<std::size_t>(args[2 + 2 * k]) * kC;
          for (int l = 0; l < n; ++l) out[l] += c[l] * v[l];
        }
        break;
      }
    }
  }
  const double* root = vals + (count - 1) * kC;
  for (int l = 0; l < n; ++l) ws.root[static_cast<std::size_t>(l)] = root[l];
}

void CompiledExpr::reverse_chunk(Workspace& ws, int n, std::span<double> grad) const {
  if (params_used_ > static_cast<int>(grad.size()))
    throw UnboundVariable("gradient vector smaller than the parameter span");
  double* const vals = ws.values.data();
  double* const adj = ws.adjoints.data();
  const std::size_t count = code_.size();
  {
    double* root = adj + (count - 1) * kC;
    for (int l = 0; l < n; ++l) root[l] = ws.seed[static_cast<std::size_t>(l)];
  }
  for (std::size_t si = count; si-- > 0;) {
    const Instr ins = code_[si];
    double* w = adj + si * kC;
    switch (ins.op) {
      case Op::kConst:
      case Op::kInput:
        break;
      case Op::kParam: {
        double sum = 0.0;
        for (int l = 0; l < n; ++l) sum += w[l];
        grad[static_cast<std::size_t>(ins.a)] += sum;
        break;
      }
      case Op::kAdd: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        double* ab = adj + static_cast<std::size_t>(ins.b) * kC;
        for (int l = 0; l < n; ++l) aa[l] += w[l];
        for (int l = 0; l < n; ++l) ab[l] += w[l];
        break;
      }
      case Op::kSub: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        double* ab = adj + static_cast<std::size_t>(ins.b) * kC;
        for (int l = 0; l < n; ++l) aa[l] += w[l];
        for (int l = 0; l < n; ++l) ab[l] -= w[l];
        break;
      }
      case Op::kMul: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        double* ab = adj + static_cast<std::size_t>(ins.b) * kC;
        const double* va = vals + static_cast<std::size_t>(ins.a) * kC;
        const double* vb = vals + static_cast<std::size_t>(ins.b) * kC;
        for (int l = 0; l < n; ++l) aa[l] += w[l] * vb[l];
        for (int l = 0; l < n; ++l) ab[l] += w[l] * va[l];
        break;
      }
      case Op::kDiv: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        double* ab = adj + static_cast<std::size_t>(ins.b) * kC;
        const double* vb = vals + static_cast<std::size_t>(ins.b) * kC;
        const double* vs = vals + si * kC;
        for (int l = 0; l < n; ++l) aa[l] += w[l] / vb[l];
        for (int l = 0; l < n; ++l) ab[l] -= w[l] * vs[l] / vb[l];
        break;
      }
      case Op::kNeg: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) aa[l] -= w[l];
        break;
      }
      case Op::kSin: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        const double* va = vals + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) aa[l] += w[l] * std::cos(va[l]);
        break;
      }
      case Op::kCos: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        const double* va = vals + static_cast<std::size_t>(ins.a) * kC;
        for (int l = 0; l < n; ++l) aa[l] -= w[l] * std::sin(va[l]);
        break;
      }
      case Op::kTanh: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        const double* vs = vals + si * kC;
        for (int l = 0; l < n; ++l) aa[l] += w[l] * (1.0 - vs[l] * vs[l]);
        break;
      }
      case Op::kExp: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        const double* vs = vals + si * kC;
        for (int l = 0; l < n; ++l) aa[l] += w[l] * vs[l];
        break;
      }
      case Op::kPowInt: {
        double* aa = adj + static_cast<std::size_t>(ins.a) * kC;
        const double* va = vals + static_cast<std::size_t>(ins.a) * kC;
        const double e = static_cast<double>(ins.b);
        const int em1 = ins.b - 1;
        for (int l = 0; l < n; ++l) aa[l] += w[l] * e * detail::powi(va[l], em1);
        break;
      }
      case Op::kAffine: {
        const std::int32_t* args = affine_args_.data() + ins.a;
        double* abias = adj + static_cast<std::size_t>(args[0]) * kC;
        for (int l = 0; l < n; ++l) abias[l] += w[l];
        for (std::int32_t k = 0; k < ins.b; ++k) {
          const std::size_t cs = static_cast<std::size_t>(args[1 + 2 * k]);
          const std::size_t vsx = static_cast<std::size_t>(args[2 + 2 * k]);
          double* ac = adj + cs * kC;
          double* av = adj + vsx * kC;
          const double* vc = vals + cs * kC;
          const double* vv = vals + vsx * kC;
          for (int l = 0; l < n; ++l) ac[l] += w[l] * vv[l];
          for (int l = 0; l < n; ++l) av[l] += w[l] * vc[l];
        }
        break;
      }
    }
    // Restore the all-zero invariant so the next sweep needs no memset.
    for (int l = 0; l < n; ++l) w[l] = 0.0;
  }
}

double CompiledExpr::eval(const EvalContext& ctx) const {
  Workspace ws;
  init_workspace(ws);
  std::vector<const double*> cols(static_cast<std::size_t>(inputs_used_));
  for (int i = 0; i < inputs_used_; ++i) cols[static_cast<std::size_t>(i)] = &ctx.inputs[static_cast<std::size_t>(i)];
  if (inputs_used_ > static_cast<int>(ctx.inputs.size()))
    throw UnboundVariable("context binds " + std::to_string(ctx.inputs.size()) +
                          " inputs, expression needs " + std::to_string(inputs_used_));
  const std::uint32_t zero = 0;
  forward_chunk(ws, ctx.params, cols, {}, &zero, 1);
  double v = ws.root[0];
  if (!std::isfinite(v)) throw NonFiniteResult("evaluation produced a non-finite value");
  return v;
}

double CompiledExpr::value_and_param_gradient(const EvalContext& ctx,
                                              std::span<double> grad) const {
  Workspace ws;
  init_workspace(ws);
  if (inputs_used_ > static_cast<int>(ctx.inputs.size()))
    throw UnboundVariable("context binds " + std::to_string(ctx.inputs.size()) +
                          " inputs, expression needs " + std::to_string(inputs_used_));
  std::vector<const double*> cols(static_cast<std::size_t>(inputs_used_));
  for (int i = 0; i < inputs_used_; ++i) cols[static_cast<std::size_t>(i)] = &ctx.inputs[static_cast<std::size_t>(i)];
  const std::uint32_t zero = 0;
  forward_chunk(ws, ctx.params, cols, {}, &zero, 1);
  ws.seed[0] = 1.0;
  reverse_chunk(ws, 1, grad);
  return ws.root[0];
}

double evaluate(Expr expr, const EvalContext& ctx) {
  if (!expr.valid()) throw Error("evaluate: empty expression");
  CompiledExpr ce(*expr.graph(), expr);
  return ce.eval(ctx);
}

std::vector<double> parameter_gradient(Expr expr, const EvalContext& ctx) {
  if (!expr.valid()) throw Error("parameter_gradient: empty expression");
  CompiledExpr ce(*expr.graph(), expr);
  std::vector<double> grad(ctx.params.size(), 0.0);
  double v = ce.value_and_param_gradient(ctx, grad);
  if (!std::isfinite(v) || !all_finite(grad))
    throw NonFiniteResult("gradient accumulation produced a non-finite value");
  return grad;
}

double finite_difference_check(Expr expr, const EvalContext& ctx, double h) {
  if (h <= 0.0) throw Error("finite_difference_check: h must be positive");
  CompiledExpr ce(*expr.graph(), expr);
  std::vector<double> grad(ctx.params.size(), 0.0);
  double v = ce.value_and_param_gradient(ctx, grad);
  if (!std::isfinite(v) || !all_finite(grad))
    throw NonFiniteResult("gradient is non-finite");
  std::vector<double> p(ctx.params.begin(), ctx.params.end());
  double max_rel = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double fp = ce.eval(EvalContext{ctx.inputs, p});
    p[i] = saved - h;
    const double fm = ce.eval(EvalContext{ctx.inputs, p});
    p[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    if (!std::isfinite(fd)) throw NonFiniteResult("finite difference is non-finite");
    const double rel = std::abs(grad[i] - fd) / (std::abs(fd) + 1e-12);
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace pinn
