#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "scaner/nn/parameters.hpp"

namespace scaner::nn {

struct Var {
  std::size_t id = 0;
};

// Reverse-mode automatic differentiation over dense double matrices.
//
// A Graph records one forward pass. Parameters are read from a
// ParameterStore without copying, and their gradients are collected per
// graph, so independent graphs over the same (const) store can run
// concurrently. Call backward() once on a 1x1 result, then accumulate() to
// add the parameter gradients into a buffer.
class Graph {
 public:
  explicit Graph(const ParameterStore* params = nullptr) : params_(params) {}

  Var constant(Matrix value);
  Var param(std::size_t index);
  // Rows of parameter `index` selected by `ids` (token embedding lookup).
  Var embedding(std::size_t index, const std::vector<int>& ids);

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var add_row(Var a, Var row);  // broadcast 1 x n row over a's rows
  Var scale(Var a, double s);
  Var gelu(Var a);  // tanh approximation
  Var tanh(Var a);
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var a, Var gamma, Var beta, double eps = 1e-5);
  Var mean_rows(Var a);
  Var slice_rows(Var a, std::size_t begin, std::size_t count);
  Var slice_cols(Var a, std::size_t begin, std::size_t count);
  Var concat_rows(Var a, Var b);
  Var concat_cols(const std::vector<Var>& parts);
  // weight * (logsumexp(z) - z[gold]) for a 1 x C row of logits.
  Var cross_entropy(Var logits, std::size_t gold, double weight = 1.0);

  const Matrix& value(Var v) const;
  // Zero-sized until backward() reaches the node.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  void backward(Var root);
  void accumulate(Gradients& into) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  using Backward = std::function<void(Graph&, std::size_t)>;

  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(Matrix value, bool requires_grad, Backward backward);
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  const Matrix& val(std::size_t id) const;
  Matrix& grad_of(std::size_t id);
  template <typename Expr>
  void add_grad(std::size_t id, const Expr& g);
  Matrix& param_grad(std::size_t index);

  const ParameterStore* params_;
  std::vector<Node> nodes_;
  std::vector<Matrix> param_grads_;
};

}  // namespace scaner::nn
