#include "scaner/nn/graph.hpp"

#include <cmath>

#include "scaner/common/error.hpp"

namespace scaner::nn {

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                      ")");
  }
}

}  // namespace

const Matrix& Graph::val(std::size_t id) const {
  const auto& n = nodes_[id];
  return n.external != nullptr ? *n.external : n.value;
}

const Matrix& Graph::value(Var v) const { return val(v.id); }

Matrix& Graph::grad_of(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.size() == 0) {
    const auto& v = val(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

template <typename Expr>
void Graph::add_grad(std::size_t id, const Expr& g) {
  if (!nodes_[id].requires_grad) return;
  grad_of(id) += g;
}

Matrix& Graph::param_grad(std::size_t index) {
  if (param_grads_.size() <= index) param_grads_.resize(params_->size());
  auto& g = param_grads_[index];
  if (g.size() == 0) {
    const auto& v = params_->value(index);
    g = Matrix::Zero(v.rows(), v.cols());
  }
  return g;
}

Var Graph::push(Matrix value, bool requires_grad, Backward backward) {
  nodes_.push_back({std::move(value), nullptr, Matrix{}, requires_grad, requires_grad ? std::move(backward) : nullptr});
  return {nodes_.size() - 1};
}

Var Graph::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Graph::param(std::size_t index) {
  if (params_ == nullptr || index >= params_->size()) throw ConfigError("graph: parameter index out of range");
  nodes_.push_back({Matrix{}, &params_->value(index), Matrix{}, true,
                    [index](Graph& g, std::size_t self) { g.param_grad(index) += g.nodes_[self].grad; }});
  return {nodes_.size() - 1};
}

Var Graph::embedding(std::size_t index, const std::vector<int>& ids) {
  if (params_ == nullptr || index >= params_->size()) throw ConfigError("graph: parameter index out of range");
  const Matrix& table = params_->value(index);
  Matrix out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= table.rows()) throw ConfigError("embedding id out of range");
    out.row(static_cast<Eigen::Index>(r)) = table.row(ids[r]);
  }
  return push(std::move(out), true, [index, ids](Graph& g, std::size_t self) {
    Matrix& pg = g.param_grad(index);
    const Matrix& up = g.nodes_[self].grad;
    for (std::size_t r = 0; r < ids.size(); ++r) pg.row(ids[r]) += up.row(static_cast<Eigen::Index>(r));
  });
}

Var Graph::matmul(Var a, Var b) {
  const Matrix& A = val(a.id);
  const Matrix& B = val(b.id);
  if (A.cols() != B.rows()) throw ConfigError("matmul: inner dimensions differ");
  return push(A * B, needs(a) || needs(b), [a, b](Graph& g, std::size_t self) {
    const Matrix& up = g.nodes_[self].grad;
    if (g.needs(a)) g.add_grad(a.id, up * g.val(b.id).transpose());
    if (g.needs(b)) g.add_grad(b.id, g.val(a.id).transpose() * up);
  });
}

Var Graph::matmul_nt(Var a, Var b) {
  const Matrix& A = val(a.id);
  const Matrix& B = val(b.id);
  if (A.cols() != B.cols()) throw ConfigError("matmul_nt: inner dimensions differ");
  return push(A * B.transpose(), needs(a) || needs(b), [a, b](Graph& g, std::size_t self) {
    const Matrix& up = g.nodes_[self].grad;
    if (g.needs(a)) g.add_grad(a.id, up * g.val(b.id));
    if (g.needs(b)) g.add_grad(b.id, up.transpose() * g.val(a.id));
  });
}

Var Graph::add(Var a, Var b) {
  check_same_shape(val(a.id), val(b.id), "add");
  return push(val(a.id) + val(b.id), needs(a) || needs(b), [a, b](Graph& g, std::size_t self) {
    const Matrix& up = g.nodes_[self].grad;
    g.add_grad(a.id, up);
    g.add_grad(b.id, up);
  });
}

Var Graph::add_row(Var a, Var row) {
  const Matrix& A = val(a.id);
  const Matrix& r = val(row.id);
  if (r.rows() != 1 || r.cols() != A.cols()) throw ConfigError("add_row: row must be 1 x cols");
  Matrix out = A.rowwise() + r.row(0);
  return push(std::move(out), needs(a) || needs(row), [a, row](Graph& g, std::size_t self) {
    const Matrix& up = g.nodes_[self].grad;
    g.add_grad(a.id, up);
    if (g.needs(row)) g.add_grad(row.id, up.colwise().sum());
  });
}

Var Graph::scale(Var a, double s) {
  return push(val(a.id) * s, needs(a), [a, s](Graph& g, std::size_t self) { g.add_grad(a.id, g.nodes_[self].grad * s); });
}

Var Graph::gelu(Var a) {
  const Matrix& x = val(a.id);
  Matrix out = x.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
  return push(std::move(out), needs(a), [a](Graph& g, std::size_t self) {
    const Matrix deriv = g.val(a.id).unaryExpr([](double v) {
      const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    });
    g.add_grad(a.id, g.nodes_[self].grad.cwiseProduct(deriv));
  });
}

Var Graph::tanh(Var a) {
  Matrix out = val(a.id).array().tanh().matrix();
  return push(std::move(out), needs(a), [a](Graph& g, std::size_t self) {
    const Matrix& y = g.val(self);
    g.add_grad(a.id, g.nodes_[self].grad.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var Graph::softmax_rows(Var a) {
  const Matrix& x = val(a.id);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return push(std::move(out), needs(a), [a](Graph& g, std::size_t self) {
    const Matrix& y = g.val(self);
    const Matrix& up = g.nodes_[self].grad;
    const Eigen::VectorXd dots = up.cwiseProduct(y).rowwise().sum();
    Matrix dx = y.cwiseProduct(up.colwise() - dots);
    g.add_grad(a.id, dx);
  });
}

Var Graph::layer_norm_rows(Var a, Var gamma, Var beta, double eps) {
  const Matrix& x = val(a.id);
  const Matrix& gm = val(gamma.id);
  const Matrix& bt = val(beta.id);
  if (gm.rows() != 1 || gm.cols() != x.cols() || bt.rows() != 1 || bt.cols() != x.cols()) {
    throw ConfigError("layer_norm_rows: gamma and beta must be 1 x cols");
  }
  const auto n = static_cast<double>(x.cols());
  Matrix xhat(x.rows(), x.cols());
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().sum() / n;
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.row(i).array() - mu) * inv_std(i);
  }
  Matrix out = (xhat.array().rowwise() * gm.row(0).array()).rowwise() + bt.row(0).array();
  const bool rg = needs(a) || needs(gamma) || needs(beta);
  return push(std::move(out), rg, [a, gamma, beta, xhat, inv_std](Graph& g, std::size_t self) {
    const Matrix& up = g.nodes_[self].grad;
    const Matrix& gm = g.val(gamma.id);
    if (g.needs(gamma)) g.add_grad(gamma.id, up.cwiseProduct(xhat).colwise().sum());
    if (g.needs(beta)) g.add_grad(beta.id, up.colwise().sum());
    if (g.needs(a)) {
      const Matrix dxhat = up.array().rowwise() * gm.row(0).array();
      const Eigen::VectorXd mean_d = dxhat.rowwise().mean();
      const Eigen::VectorXd mean_dx = dxhat.cwiseProduct(xhat).rowwise().mean();
      Matrix dx = dxhat;
      dx.colwise() -= mean_d;
      dx.array() -= xhat.array().colwise() * mean_dx.array();
      dx = dx.array().colwise() * inv_std.array();
      g.add_grad(a.id, dx);
    }
  });
}

Var Graph::mean_rows(Var a) {
  const Matrix& x = val(a.id);
  if (x.rows() == 0) throw ConfigError("mean_rows: empty input");
  Matrix out = x.colwise().mean();
  return push(std::move(out), needs(a), [a](Graph& g, std::size_t self) {
    const auto rows = g.val(a.id).rows();
    const Matrix& up = g.nodes_[self].grad;
    Matrix dx = up.replicate(rows, 1) / static_cast<double>(rows);
    g.add_grad(a.id, dx);
  });
}

Var Graph::slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Matrix& x = val(a.id);
  if (begin + count > static_cast<std::size_t>(x.rows())) throw ConfigError("slice_rows: out of range");
  const auto b = static_cast<Eigen::Index>(begin);
  const auto c = static_cast<Eigen::Index>(count);
  return push(x.middleRows(b, c), needs(a), [a, b, c](Graph& g, std::size_t self) {
    g.grad_of(a.id).middleRows(b, c) += g.nodes_[self].grad;
  });
}

Var Graph::slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Matrix& x = val(a.id);
  if (begin + count > static_cast<std::size_t>(x.cols())) throw ConfigError("slice_cols: out of range");
  const auto b = static_cast<Eigen::Index>(begin);
  const auto c = static_cast<Eigen::Index>(count);
  return push(x.middleCols(b, c), needs(a), [a, b, c](Graph& g, std::size_t self) {
    g.grad_of(a.id).middleCols(b, c) += g.nodes_[self].grad;
  });
}

Var Graph::concat_rows(Var a, Var b) {
  const Matrix& A = val(a.id);
  const Matrix& B = val(b.id);
  if (A.cols() != B.cols()) throw ConfigError("concat_rows: column counts differ");
  Matrix out(A.rows() + B.rows(), A.cols());
  out << A, B;
  const auto ra = A.rows();
  const auto rb = B.rows();
  return push(std::move(out), needs(a) || needs(b), [a, b, ra, rb](Graph& g, std::size_t self) {
    const Matrix& up = g.nodes_[self].grad;
    g.add_grad(a.id, up.topRows(ra));
    g.add_grad(b.id, up.bottomRows(rb));
  });
}

Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ConfigError("concat_cols: no inputs");
  const auto rows = val(parts[0].id).rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (auto p : parts) {
    if (val(p.id).rows() != rows) throw ConfigError("concat_cols: row counts differ");
    cols += val(p.id).cols();
    rg = rg || needs(p);
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (auto p : parts) {
    out.middleCols(at, val(p.id).cols()) = val(p.id);
    at += val(p.id).cols();
  }
  return push(std::move(out), rg, [parts](Graph& g, std::size_t self) {
    const Matrix& up = g.nodes_[self].grad;
    Eigen::Index at = 0;
    for (auto p : parts) {
      const auto c = g.val(p.id).cols();
      g.add_grad(p.id, up.middleCols(at, c));
      at += c;
    }
  });
}

Var Graph::cross_entropy(Var logits, std::size_t gold, double weight) {
  const Matrix& z = val(logits.id);
  if (z.rows() != 1 || gold >= static_cast<std::size_t>(z.cols())) throw ConfigError("cross_entropy: bad shape or label");
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  Matrix out(1, 1);
  out(0, 0) = weight * (lse - z(0, static_cast<Eigen::Index>(gold)));
  return push(std::move(out), needs(logits), [logits, gold, weight, lse](Graph& g, std::size_t self) {
    const Matrix& z = g.val(logits.id);
    Matrix d = (z.array() - lse).exp().matrix();
    d(0, static_cast<Eigen::Index>(gold)) -= 1.0;
    g.add_grad(logits.id, d * (weight * g.nodes_[self].grad(0, 0)));
  });
}

void Graph::backward(Var root) {
  const Matrix& r = val(root.id);
  if (r.rows() != 1 || r.cols() != 1) throw ConfigError("backward: root must be a 1x1 scalar");
  if (!nodes_[root.id].requires_grad) return;
  grad_of(root.id)(0, 0) += 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, i);
  }
}

void Graph::accumulate(Gradients& into) const {
  for (std::size_t i = 0; i < param_grads_.size(); ++i) {
    if (param_grads_[i].size() == 0) continue;
    if (i >= into.size()) throw ConfigError("accumulate: gradient buffer too small");
    into[i] += param_grads_[i];
  }
}

}  // namespace scaner::nn
