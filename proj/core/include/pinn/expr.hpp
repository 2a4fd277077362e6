#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn {

enum class Op : std::uint8_t {
  kConst,
  kInput,
  kParam,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSin,
  kCos,
  kTanh,
  kExp,
  kPowInt,
  kAffine,  // bias + sum of coef*value pairs, evaluated in pair order
};

const char* op_name(Op op);

class Graph;

/// Handle to a node of a Graph. Cheap value type; the graph owns the storage.
class Expr {
 public:
  Expr() = default;
  Expr(Graph* graph, std::int32_t id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr && id_ >= 0; }
  std::int32_t id() const { return id_; }
  Graph* graph() const { return graph_; }

  bool operator==(const Expr& other) const {
    return graph_ == other.graph_ && id_ == other.id_;
  }

 private:
  Graph* graph_ = nullptr;
  std::int32_t id_ = -1;
};

struct AffineTerm {
  Expr coef;
  Expr value;
};

/// Append-only arena of expression nodes with hash-consing and constant
/// folding. Node ids are topologically ordered: operands always have smaller
/// ids than the nodes using them. Graphs are single-threaded during
/// construction and read-only afterwards.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  Expr constant(double value);
  /// Input variables are keyed by name; repeated calls return the same node.
  Expr input(std::string_view name);
  Expr input_at(int index);
  Expr param(int index);

  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr mul(Expr a, Expr b);
  Expr div(Expr a, Expr b);
  Expr neg(Expr a);
  Expr sin(Expr a);
  Expr cos(Expr a);
  Expr tanh(Expr a);
  Expr exp(Expr a);
  Expr pow_int(Expr a, int exponent);
  Expr affine(std::span<const AffineTerm> terms, Expr bias);
  Expr affine(std::initializer_list<AffineTerm> terms, Expr bias) {
    return affine(std::span<const AffineTerm>(terms.begin(), terms.size()), bias);
  }

  /// d(f)/d(wrt) as a new expression in this graph. `wrt` must be an input
  /// variable. Composable: apply repeatedly for higher orders. Results are
  /// memoized, so shared subgraphs are differentiated once.
  Expr derivative(Expr f, Expr wrt);

  int input_count() const { return static_cast<int>(input_names_.size()); }
  const std::string& input_name(int index) const { return input_names_.at(index); }
  int input_index(std::string_view name) const;  // -1 when unknown
  /// 1 + largest parameter slot referenced anywhere in the graph.
  int param_span() const { return param_span_; }

  std::size_t node_count() const { return nodes_.size(); }
  Op op(Expr e) const { return node(e).op; }
  bool is_constant(Expr e, double* value = nullptr) const;
  int var_index(Expr e) const;  // input or param slot of a leaf

  /// Line-oriented text form of the subgraph reachable from `root`, with
  /// nodes renumbered consecutively in topological order:
  ///   id op operand_ids...
  std::string dump(Expr root) const;

 private:
  friend class CompiledExpr;

  struct Node {
    Op op;
    std::int32_t a = -1;  // child | const pool idx | var idx | affine arg offset
    std::int32_t b = -1;  // child | pow exponent   | affine pair count
  };

  const Node& node(Expr e) const;
  Expr wrap(std::int32_t id) { return Expr(this, id); }
  std::int32_t intern(Op op, std::int32_t a, std::int32_t b);
  std::uint64_t node_hash(Op op, std::int32_t a, std::int32_t b) const;
  bool node_equal(std::int32_t id, Op op, std::int32_t a, std::int32_t b) const;
  bool is_const_value(std::int32_t id, double v) const;
  bool const_of(std::int32_t id, double* out) const;
  void check_same_graph(Expr e) const;
  std::int32_t derivative_of_node(std::int32_t id, int var,
                                  const std::unordered_map<std::uint64_t, std::int32_t>& memo);

  std::vector<Node> nodes_;
  std::vector<double> const_pool_;
  std::unordered_map<std::uint64_t, std::int32_t> const_index_;  // bit pattern -> pool idx
  std::vector<std::int32_t> affine_args_;  // per node: [bias, c0, v0, c1, v1, ...]
  std::vector<std::string> input_names_;
  std::unordered_map<std::string, int> input_ids_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> cse_;
  std::unordered_map<std::uint64_t, std::int32_t> diff_memo_;  // (id, var) -> id
  int param_span_ = 0;
};

// Operator sugar; both operands must live in the same graph.
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(Expr a, double b);
Expr operator+(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator/(Expr a, double b);
Expr operator/(double a, Expr b);
Expr sin(Expr a);
Expr cos(Expr a);
Expr tanh(Expr a);
Expr exp(Expr a);
Expr pow_int(Expr a, int exponent);

/// Spec-facing alias for Graph::derivative.
Expr differentiate(Expr f, Expr wrt);

}  // namespace pinn
