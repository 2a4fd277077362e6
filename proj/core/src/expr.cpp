#include "pinn/expr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "detail_math.hpp"
#include "pinn/csv.hpp"

namespace pinn {

namespace {

constexpr int kMaxInputs = 64;  // derivative memo packs the var index into 6 bits

std::uint64_t diff_key(std::int32_t id, int var) {
  return (static_cast<std::uint64_t>(id) << 6) | static_cast<std::uint64_t>(var);
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kInput: return "input";
    case Op::kParam: return "param";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kNeg: return "neg";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kTanh: return "tanh";
    case Op::kExp: return "exp";
    case Op::kPowInt: return "powi";
    case Op::kAffine: return "affine";
  }
  return "?";
}

const Graph::Node& Graph::node(Expr e) const {
  if (e.graph() != this || e.id() < 0 || e.id() >= static_cast<std::int32_t>(nodes_.size()))
    throw Error("expression does not belong to this graph");
  return nodes_[static_cast<std::size_t>(e.id())];
}

void Graph::check_same_graph(Expr e) const {
  if (e.graph() != this) throw Error("mixing expressions from different graphs");
}

std::uint64_t Graph::node_hash(Op op, std::int32_t a, std::int32_t b) const {
  using detail::hash_combine;
  std::uint64_t h = hash_combine(static_cast<std::uint64_t>(op), static_cast<std::uint64_t>(a) + 1);
  if (op == Op::kAffine) {
    // a = offset into affine_args_, b = pair count; hash the argument list.
    h = hash_combine(static_cast<std::uint64_t>(op), static_cast<std::uint64_t>(b));
    for (std::int32_t i = 0; i <= 2 * b; ++i)
      h = hash_combine(h, static_cast<std::uint64_t>(affine_args_[static_cast<std::size_t>(a + i)]));
    return h;
  }
  return hash_combine(h, static_cast<std::uint64_t>(b));
}

bool Graph::node_equal(std::int32_t id, Op op, std::int32_t a, std::int32_t b) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.op != op) return false;
  if (op == Op::kAffine) {
    if (n.b != b) return false;
    for (std::int32_t i = 0; i <= 2 * b; ++i)
      if (affine_args_[static_cast<std::size_t>(n.a + i)] !=
          affine_args_[static_cast<std::size_t>(a + i)])
        return false;
    return true;
  }
  return n.a == a && n.b == b;
}

std::int32_t Graph::intern(Op op, std::int32_t a, std::int32_t b) {
  std::uint64_t h = node_hash(op, a, b);
  auto& bucket = cse_[h];
  for (std::int32_t id : bucket)
    if (node_equal(id, op, a, b)) return id;
  std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{op, a, b});
  bucket.push_back(id);
  return id;
}

Expr Graph::constant(double value) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  auto it = const_index_.find(bits);
  std::int32_t pool;
  if (it != const_index_.end()) {
    pool = it->second;
  } else {
    pool = static_cast<std::int32_t>(const_pool_.size());
    const_pool_.push_back(value);
    const_index_.emplace(bits, pool);
  }
  return wrap(intern(Op::kConst, pool, -1));
}

Expr Graph::input(std::string_view name) {
  auto it = input_ids_.find(std::string(name));
  if (it != input_ids_.end()) return wrap(intern(Op::kInput, it->second, -1));
  int index = static_cast<int>(input_names_.size());
  if (index >= kMaxInputs) throw Error("too many input variables");
  input_names_.emplace_back(name);
  input_ids_.emplace(std::string(name), index);
  return wrap(intern(Op::kInput, index, -1));
}

Expr Graph::input_at(int index) {
  if (index < 0 || index >= input_count()) throw Error("input index out of range");
  return wrap(intern(Op::kInput, index, -1));
}

Expr Graph::param(int index) {
  if (index < 0) throw Error("parameter index must be non-negative");
  param_span_ = std::max(param_span_, index + 1);
  return wrap(intern(Op::kParam, index, -1));
}

int Graph::input_index(std::string_view name) const {
  auto it = input_ids_.find(std::string(name));
  return it == input_ids_.end() ? -1 : it->second;
}

bool Graph::is_constant(Expr e, double* value) const {
  const Node& n = node(e);
  if (n.op != Op::kConst) return false;
  if (value != nullptr) *value = const_pool_[static_cast<std::size_t>(n.a)];
  return true;
}

int Graph::var_index(Expr e) const {
  const Node& n = node(e);
  if (n.op != Op::kInput && n.op != Op::kParam) throw Error("not a variable leaf");
  return n.a;
}

bool Graph::const_of(std::int32_t id, double* out) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.op != Op::kConst) return false;
  *out = const_pool_[static_cast<std::size_t>(n.a)];
  return true;
}

bool Graph::is_const_value(std::int32_t id, double v) const {
  double c;
  return const_of(id, &c) && c == v;
}

Expr Graph::add(Expr a, Expr b) {
  check_same_graph(a);
  check_same_graph(b);
  double ca, cb;
  bool a_const = const_of(a.id(), &ca), b_const = const_of(b.id(), &cb);
  if (a_const && b_const) return constant(ca + cb);
  if (a_const && ca == 0.0) return b;
  if (b_const && cb == 0.0) return a;
  std::int32_t x = a.id(), y = b.id();
  if (x > y) std::swap(x, y);  // a+b == b+a exactly in IEEE
  return wrap(intern(Op::kAdd, x, y));
}

Expr Graph::sub(Expr a, Expr b) {
  check_same_graph(a);
  check_same_graph(b);
  double ca, cb;
  bool a_const = const_of(a.id(), &ca), b_const = const_of(b.id(), &cb);
  if (a_const && b_const) return constant(ca - cb);
  if (b_const && cb == 0.0) return a;
  if (a_const && ca == 0.0) return neg(b);
  if (a.id() == b.id()) return constant(0.0);
  return wrap(intern(Op::kSub, a.id(), b.id()));
}

Expr Graph::mul(Expr a, Expr b) {
  check_same_graph(a);
  check_same_graph(b);
  double ca, cb;
  bool a_const = const_of(a.id(), &ca), b_const = const_of(b.id(), &cb);
  if (a_const && b_const) return constant(ca * cb);
  if ((a_const && ca == 0.0) || (b_const && cb == 0.0)) return constant(0.0);
  if (a_const && ca == 1.0) return b;
  if (b_const && cb == 1.0) return a;
  if (a_const && ca == -1.0) return neg(b);
  if (b_const && cb == -1.0) return neg(a);
  std::int32_t x = a.id(), y = b.id();
  if (x > y) std::swap(x, y);
  return wrap(intern(Op::kMul, x, y));
}

Expr Graph::div(Expr a, Expr b) {
  check_same_graph(a);
  check_same_graph(b);
  double ca, cb;
  bool a_const = const_of(a.id(), &ca), b_const = const_of(b.id(), &cb);
  if (a_const && b_const) return constant(ca / cb);
  if (a_const && ca == 0.0) return constant(0.0);
  if (b_const && cb == 1.0) return a;
  if (b_const && cb == -1.0) return neg(a);
  return wrap(intern(Op::kDiv, a.id(), b.id()));
}

Expr Graph::neg(Expr a) {
  check_same_graph(a);
  double ca;
  if (const_of(a.id(), &ca)) return constant(-ca);
  const Node& n = nodes_[static_cast<std::size_t>(a.id())];
  if (n.op == Op::kNeg) return wrap(n.a);
  return wrap(intern(Op::kNeg, a.id(), -1));
}

Expr Graph::sin(Expr a) {
  check_same_graph(a);
  double ca;
  if (const_of(a.id(), &ca)) return constant(std::sin(ca));
  return wrap(intern(Op::kSin, a.id(), -1));
}

Expr Graph::cos(Expr a) {
  check_same_graph(a);
  double ca;
  if (const_of(a.id(), &ca)) return constant(std::cos(ca));
  return wrap(intern(Op::kCos, a.id(), -1));
}

Expr Graph::tanh(Expr a) {
  check_same_graph(a);
  double ca;
  if (const_of(a.id(), &ca)) return constant(std::tanh(ca));
  return wrap(intern(Op::kTanh, a.id(), -1));
}

Expr Graph::exp(Expr a) {
  check_same_graph(a);
  double ca;
  if (const_of(a.id(), &ca)) return constant(std::exp(ca));
  return wrap(intern(Op::kExp, a.id(), -1));
}

Expr Graph::pow_int(Expr a, int exponent) {
  check_same_graph(a);
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return a;
  double ca;
  if (const_of(a.id(), &ca)) return constant(detail::powi(ca, exponent));
  return wrap(intern(Op::kPowInt, a.id(), exponent));
}

Expr Graph::affine(std::span<const AffineTerm> terms, Expr bias) {
  check_same_graph(bias);
  std::vector<std::int32_t> pairs;
  pairs.reserve(2 * terms.size());
  double const_acc = 0.0;
  bool has_const_acc = false;
  std::vector<std::int32_t> singles;  // terms that collapse to one factor
  for (const AffineTerm& t : terms) {
    check_same_graph(t.coef);
    check_same_graph(t.value);
    double cc, cv;
    bool coef_const = const_of(t.coef.id(), &cc), val_const = const_of(t.value.id(), &cv);
    if ((coef_const && cc == 0.0) || (val_const && cv == 0.0)) continue;
    if (coef_const && val_const) {
      const_acc += cc * cv;
      has_const_acc = true;
      continue;
    }
    if (coef_const && cc == 1.0) {
      singles.push_back(t.value.id());
      continue;
    }
    if (val_const && cv == 1.0) {
      singles.push_back(t.coef.id());
      continue;
    }
    pairs.push_back(t.coef.id());
    pairs.push_back(t.value.id());
  }
  Expr acc = bias;
  if (has_const_acc && const_acc != 0.0) acc = add(acc, constant(const_acc));
  for (std::int32_t s : singles) acc = add(acc, wrap(s));
  if (pairs.empty()) return acc;
  if (pairs.size() == 2 && is_const_value(acc.id(), 0.0))
    return mul(wrap(pairs[0]), wrap(pairs[1]));
  std::int32_t offset = static_cast<std::int32_t>(affine_args_.size());
  affine_args_.push_back(acc.id());
  affine_args_.insert(affine_args_.end(), pairs.begin(), pairs.end());
  std::int32_t count = static_cast<std::int32_t>(pairs.size() / 2);
  std::int32_t id = intern(Op::kAffine, offset, count);
  if (nodes_[static_cast<std::size_t>(id)].a != offset)
    affine_args_.resize(static_cast<std::size_t>(offset));  // deduplicated; drop the copy
  return wrap(id);
}

std::int32_t Graph::derivative_of_node(
    std::int32_t id, int var, const std::unordered_map<std::uint64_t, std::int32_t>& memo) {
  auto d = [&](std::int32_t child) {
    auto it = memo.find(diff_key(child, var));
    if (it == memo.end()) throw Error("internal: derivative of child missing");
    return wrap(it->second);
  };
  const Node n = nodes_[static_cast<std::size_t>(id)];
  Expr self = wrap(id);
  switch (n.op) {
    case Op::kConst:
    case Op::kParam:
      return constant(0.0).id();
    case Op::kInput:
      return constant(n.a == var ? 1.0 : 0.0).id();
    case Op::kAdd:
      return add(d(n.a), d(n.b)).id();
    case Op::kSub:
      return sub(d(n.a), d(n.b)).id();
    case Op::kMul:
      return add(mul(d(n.a), wrap(n.b)), mul(wrap(n.a), d(n.b))).id();
    case Op::kDiv: {
      Expr da = d(n.a), db = d(n.b);
      Expr b = wrap(n.b);
      return sub(div(da, b), div(mul(wrap(n.a), db), mul(b, b))).id();
    }
    case Op::kNeg:
      return neg(d(n.a)).id();
    case Op::kSin:
      return mul(cos(wrap(n.a)), d(n.a)).id();
    case Op::kCos:
      return neg(mul(sin(wrap(n.a)), d(n.a))).id();
    case Op::kTanh:
      // d tanh = 1 - tanh^2, keeping the transformed graph inside the op set
      return mul(sub(constant(1.0), mul(self, self)), d(n.a)).id();
    case Op::kExp:
      return mul(self, d(n.a)).id();
    case Op::kPowInt:
      return mul(mul(constant(static_cast<double>(n.b)), pow_int(wrap(n.a), n.b - 1)), d(n.a)).id();
    case Op::kAffine: {
      std::int32_t off = n.a, count = n.b;
      std::vector<AffineTerm> terms;
      terms.reserve(2 * static_cast<std::size_t>(count));
      for (std::int32_t k = 0; k < count; ++k) {
        std::int32_t c = affine_args_[static_cast<std::size_t>(off + 1 + 2 * k)];
        std::int32_t v = affine_args_[static_cast<std::size_t>(off + 2 + 2 * k)];
        terms.push_back(AffineTerm{d(c), wrap(v)});
        terms.push_back(AffineTerm{wrap(c), d(v)});
      }
      Expr dbias = d(affine_args_[static_cast<std::size_t>(off)]);
      return affine(terms, dbias).id();
    }
  }
  throw UnsupportedOp(std::string("no derivative rule for op ") + op_name(n.op));
}

Expr Graph::derivative(Expr f, Expr wrt) {
  check_same_graph(f);
  check_same_graph(wrt);
  if (node(wrt).op != Op::kInput)
    throw Error("derivative: wrt must be an input variable");
  const int var = node(wrt).a;

  // Reachable nodes without a memoized derivative, in topological (id) order.
  std::vector<std::int32_t> order;
  std::vector<std::int32_t> stack{f.id()};
  std::vector<bool> seen(nodes_.size(), false);
  while (!stack.empty()) {
    std::int32_t id = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(id)]) continue;
    seen[static_cast<std::size_t>(id)] = true;
    if (diff_memo_.contains(diff_key(id, var))) continue;
    order.push_back(id);
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
      case Op::kParam:
        break;
      case Op::kAffine: {
        for (std::int32_t i = 0; i <= 2 * n.b; ++i)
          stack.push_back(affine_args_[static_cast<std::size_t>(n.a + i)]);
        break;
      }
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
  std::sort(order.begin(), order.end());
  for (std::int32_t id : order) {
    std::int32_t did = derivative_of_node(id, var, diff_memo_);
    diff_memo_.emplace(diff_key(id, var), did);
  }
  return wrap(diff_memo_.at(diff_key(f.id(), var)));
}

std::string Graph::dump(Expr root) const {
  node(root);  // ownership check
  std::vector<std::int32_t> reach;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::int32_t> stack{root.id()};
  while (!stack.empty()) {
    std::int32_t id = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(id)]) continue;
    seen[static_cast<std::size_t>(id)] = true;
    reach.push_back(id);
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.op == Op::kAffine) {
      for (std::int32_t i = 0; i <= 2 * n.b; ++i)
        stack.push_back(affine_args_[static_cast<std::size_t>(n.a + i)]);
    } else if (n.op != Op::kConst && n.op != Op::kInput && n.op != Op::kParam) {
      stack.push_back(n.a);
      if (n.op != Op::kNeg && n.op != Op::kSin && n.op != Op::kCos && n.op != Op::kTanh &&
          n.op != Op::kExp && n.op != Op::kPowInt)
        stack.push_back(n.b);
    }
  }
  std::sort(reach.begin(), reach.end());
  std::unordered_map<std::int32_t, std::int32_t> line;
  for (std::size_t i = 0; i < reach.size(); ++i)
    line[reach[i]] = static_cast<std::int32_t>(i);
  std::string out;
  for (std::size_t i = 0; i < reach.size(); ++i) {
    const Node& n = nodes_[static_cast<std::size_t>(reach[i])];
    out += std::to_string(i);
    out += ' ';
    out += op_name(n.op);
    switch (n.op) {
      case Op::kConst:
        out += ' ';
        out += fmt_double(const_pool_[static_cast<std::size_t>(n.a)]);
        break;
      case Op::kInput:
      case Op::kParam:
        out += ' ';
        out += std::to_string(n.a);
        break;
      case Op::kPowInt:
        out += ' ';
        out += std::to_string(line.at(n.a));
        out += ' ';
        out += std::to_string(n.b);
        break;
      case Op::kNeg:
      case Op::kSin:
      case Op::kCos:
      case Op::kTanh:
      case Op::kExp:
        out += ' ';
        out += std::to_string(line.at(n.a));
        break;
      case Op::kAffine: {
        for (std::int32_t k = 0; k <= 2 * n.b; ++k) {
          out += ' ';
          out += std::to_string(line.at(affine_args_[static_cast<std::size_t>(n.a + k)]));
        }
        break;
      }
      default:
        out += ' ';
        out += std::to_string(line.at(n.a));
        out += ' ';
        out += std::to_string(line.at(n.b));
        break;
    }
    out += '\n';
  }
  return out;
}

namespace {
Graph& graph_of(Expr a) {
  if (!a.valid()) throw Error("operation on an empty expression");
  return *a.graph();
}
}  // namespace

Expr operator+(Expr a, Expr b) { return graph_of(a).add(a, b); }
Expr operator-(Expr a, Expr b) { return graph_of(a).sub(a, b); }
Expr operator*(Expr a, Expr b) { return graph_of(a).mul(a, b); }
Expr operator/(Expr a, Expr b) { return graph_of(a).div(a, b); }
Expr operator-(Expr a) { return graph_of(a).neg(a); }
Expr operator+(Expr a, double b) { return graph_of(a).add(a, graph_of(a).constant(b)); }
Expr operator+(double a, Expr b) { return graph_of(b).add(graph_of(b).constant(a), b); }
Expr operator-(Expr a, double b) { return graph_of(a).sub(a, graph_of(a).constant(b)); }
Expr operator-(double a, Expr b) { return graph_of(b).sub(graph_of(b).constant(a), b); }
Expr operator*(Expr a, double b) { return graph_of(a).mul(a, graph_of(a).constant(b)); }
Expr operator*(double a, Expr b) { return graph_of(b).mul(graph_of(b).constant(a), b); }
Expr operator/(Expr a, double b) { return graph_of(a).div(a, graph_of(a).constant(b)); }
Expr operator/(double a, Expr b) { return graph_of(b).div(graph_of(b).constant(a), b); }
Expr sin(Expr a) { return graph_of(a).sin(a); }
Expr cos(Expr a) { return graph_of(a).cos(a); }
Expr tanh(Expr a) { return graph_of(a).tanh(a); }
Expr exp(Expr a) { return graph_of(a).exp(a); }
Expr pow_int(Expr a, int exponent) { return graph_of(a).pow_int(a, exponent); }

Expr differentiate(Expr f, Expr wrt) { return graph_of(f).derivative(f, wrt); }

}  // namespace pinn
