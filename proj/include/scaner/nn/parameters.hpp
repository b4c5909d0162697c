#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "scaner/common/rng.hpp"

namespace scaner::nn {

using Matrix = Eigen::MatrixXd;
using Gradients = std::vector<Matrix>;

// Named, ordered set of trainable matrices. Insertion order is the
// serialization order and the index used by Graph::param().
class ParameterStore {
 public:
  std::size_t add(std::string name, Matrix init);

  std::size_t size() const { return values_.size(); }
  const Matrix& value(std::size_t i) const { return values_[i]; }
  Matrix& value(std::size_t i) { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }

  // Throws ConfigError if absent.
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const;

  Gradients zeros_like() const;
  std::size_t scalar_count() const;

  friend bool operator==(const ParameterStore& a, const ParameterStore& b);

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

Matrix xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

}  // namespace scaner::nn
