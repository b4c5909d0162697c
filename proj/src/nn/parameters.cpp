#include "scaner/nn/parameters.hpp"

#include <cmath>

#include "scaner/common/error.hpp"

namespace scaner::nn {

std::size_t ParameterStore::add(std::string name, Matrix init) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return values_.size() - 1;
}

std::size_t ParameterStore::index(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

bool ParameterStore::contains(std::string_view name) const {
  for (const auto& n : names_) {
    if (n == name) return true;
  }
  return false;
}

Gradients ParameterStore::zeros_like() const {
  Gradients g;
  g.reserve(values_.size());
  for (const auto& v : values_) g.push_back(Matrix::Zero(v.rows(), v.cols()));
  return g;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

bool operator==(const ParameterStore& a, const ParameterStore& b) {
  if (a.names_ != b.names_) return false;
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    if (a.values_[i].rows() != b.values_[i].rows() || a.values_[i].cols() != b.values_[i].cols()) return false;
    if (a.values_[i] != b.values_[i]) return false;
  }
  return true;
}

Matrix xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return m;
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, stddev);
  }
  return m;
}

}  // namespace scaner::nn
