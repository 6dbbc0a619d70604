#pragma once

#include <functional>
#include <string>
#include <vector>

#include "intent/autodiff/param_set.hpp"
#include "intent/autodiff/tensor.hpp"

namespace intent::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape that produced it is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  Tensor::ConstMatrixMap mat() const { return value().mat(); }
  double item() const { return value().item(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradient plumbing handed to a backward rule.
class BackwardContext {
 public:
  /// dLoss/d(output) viewed as a matrix of the output's shape.
  Eigen::Map<const RowMatrix<double>> out_grad() const;
  /// True when input k needs a gradient.
  bool needs(std::size_t k) const;
  /// Accumulation target for input k, viewed with input k's matrix shape.
  Eigen::Map<RowMatrix<double>> in_grad(std::size_t k) const;
  const Tensor& input(std::size_t k) const;
  const Tensor& output() const;

 private:
  friend class Tape;
  BackwardContext(Tape& t, std::size_t node) : tape_(t), node_(node) {}
  Tape& tape_;
  std::size_t node_;
};

using BackwardRule = std::function<void(const BackwardContext&)>;

/// Define-by-run record of a forward pass. Nodes are appended in evaluation
/// order, so reverse iteration is a valid topological order for backward.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf that accumulates its own gradient (readable through grad()).
  Var variable(Tensor value);
  /// Leaf bound to a parameter. The value is referenced, not copied, so the
  /// parameter must outlive the tape and stay unmodified until backward.
  Var param(Parameter& p);
  Var param(ParamSet& set, const std::string& name) { return param(set.at(name)); }
  /// Read-only leaf referencing a frozen parameter; no gradient flows to it.
  Var frozen(const Parameter& p);

  /// Records an op result. Throws NumericError if `value` is not finite.
  Var record(std::string op, Tensor value, std::vector<Var> inputs, BackwardRule rule);

  /// Reverse sweep from a scalar loss. Gradients land in bound parameters and
  /// variable leaves. Throws ShapeError for a non-scalar loss and NumericError
  /// naming the op whose backward produced a non-finite gradient.
  void backward(Var loss);

  /// Gradient of a variable leaf after backward.
  const Eigen::VectorXd& grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;
  friend class BackwardContext;

  struct Node {
    std::string op;
    Tensor owned;
    const Tensor* external = nullptr;
    std::vector<std::size_t> inputs;
    BackwardRule rule;
    Parameter* param = nullptr;
    Eigen::VectorXd grad;
    bool requires_grad = false;

    const Tensor& value() const { return external ? *external : owned; }
  };

  Var push(Node node);
  std::vector<Node> nodes_;
};

}  // namespace intent::ad
