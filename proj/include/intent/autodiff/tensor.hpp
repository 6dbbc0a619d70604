#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "intent/errors.hpp"

namespace intent::ad {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Index numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape);

/// Dense row-major tensor of rank 0, 1 or 2. Rank-0 and rank-1 tensors are
/// viewed as a single row when treated as a matrix.
template <typename Scalar>
struct BasicTensor {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<RowMatrix<Scalar>>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;

  Shape shape;
  Vector values;
  bool requires_grad = false;

  BasicTensor() = default;
  BasicTensor(Shape s, Vector v, bool grad = false)
      : shape(std::move(s)), values(std::move(v)), requires_grad(grad) {
    if (shape.size() > 2) throw ShapeError("tensors of rank > 2 are not supported");
    if (numel(shape) != values.size()) {
      throw ShapeError("shape " + to_string(shape) + " does not match " +
                       std::to_string(values.size()) + " values");
    }
  }

  static BasicTensor zeros(Shape s) {
    const Index n = numel(s);
    return {std::move(s), Vector::Zero(n)};
  }
  static BasicTensor scalar(Scalar v) { return {Shape{}, Vector::Constant(1, v)}; }
  static BasicTensor vector(std::initializer_list<Scalar> v) {
    Vector data(static_cast<Index>(v.size()));
    Index i = 0;
    for (Scalar x : v) data(i++) = x;
    return {Shape{data.size()}, std::move(data)};
  }
  template <typename Derived>
  static BasicTensor from_vector(const Eigen::MatrixBase<Derived>& v) {
    return {Shape{v.size()}, Vector(v)};
  }
  template <typename Derived>
  static BasicTensor from_matrix(const Eigen::MatrixBase<Derived>& m) {
    RowMatrix<Scalar> rm = m;
    return {Shape{rm.rows(), rm.cols()}, Eigen::Map<const Vector>(rm.data(), rm.size())};
  }

  Index rank() const { return static_cast<Index>(shape.size()); }
  Index size() const { return values.size(); }
  Index rows() const { return shape.size() == 2 ? shape[0] : 1; }
  Index cols() const { return shape.empty() ? 1 : shape.back(); }
  Scalar item() const {
    if (values.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape));
    return values(0);
  }

  MatrixMap mat() { return MatrixMap(values.data(), rows(), cols()); }
  ConstMatrixMap mat() const { return ConstMatrixMap(values.data(), rows(), cols()); }
};

using Tensor = BasicTensor<double>;

}  // namespace intent::ad
