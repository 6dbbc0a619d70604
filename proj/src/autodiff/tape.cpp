#include "intent/autodiff/tape.hpp"

#include <sstream>

namespace intent::ad {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

const Tensor& Var::value() const { return tape_->nodes_.at(id_).value(); }

bool Var::requires_grad() const { return tape_->nodes_.at(id_).requires_grad; }

Eigen::Map<const RowMatrix<double>> BackwardContext::out_grad() const {
  const auto& n = tape_.nodes_[node_];
  const auto& v = n.value();
  return {n.grad.data(), v.rows(), v.cols()};
}

bool BackwardContext::needs(std::size_t k) const {
  return tape_.nodes_[tape_.nodes_[node_].inputs.at(k)].requires_grad;
}

Eigen::Map<RowMatrix<double>> BackwardContext::in_grad(std::size_t k) const {
  auto& in = tape_.nodes_[tape_.nodes_[node_].inputs.at(k)];
  const auto& v = in.value();
  if (in.grad.size() != v.size()) in.grad = Eigen::VectorXd::Zero(v.size());
  return {in.grad.data(), v.rows(), v.cols()};
}

const Tensor& BackwardContext::input(std::size_t k) const {
  return tape_.nodes_[tape_.nodes_[node_].inputs.at(k)].value();
}

const Tensor& BackwardContext::output() const { return tape_.nodes_[node_].value(); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.owned = std::move(value);
  n.owned.requires_grad = false;
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.op = "variable";
  n.owned = std::move(value);
  n.owned.requires_grad = true;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.op = "param";
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::frozen(const Parameter& p) {
  Node n;
  n.op = "frozen";
  n.external = &p.value;
  return push(std::move(n));
}

Var Tape::record(std::string op, Tensor value, std::vector<Var> inputs, BackwardRule rule) {
  if (!value.values.allFinite()) throw NumericError("non-finite output in op '" + op + "'");
  Node n;
  n.op = std::move(op);
  n.owned = std::move(value);
  n.rule = std::move(rule);
  n.inputs.reserve(inputs.size());
  for (const Var& v : inputs) {
    if (v.tape_ != this) throw std::logic_error("op '" + n.op + "' mixes tapes");
    n.inputs.push_back(v.id_);
    n.requires_grad = n.requires_grad || nodes_[v.id_].requires_grad;
  }
  n.owned.requires_grad = n.requires_grad;
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw std::logic_error("loss was recorded on a different tape");
  auto& root = nodes_.at(loss.id_);
  if (root.value().size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + to_string(root.value().shape));
  }
  for (auto& n : nodes_) n.grad.resize(0);
  root.grad = Eigen::VectorXd::Ones(1);

  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (!n.grad.allFinite()) throw NumericError("non-finite gradient reaching op '" + n.op + "'");
    if (n.rule) n.rule(BackwardContext(*this, i));
    if (n.param != nullptr) {
      Parameter& p = *n.param;
      if (p.grad.size() != p.value.size()) p.grad = Eigen::VectorXd::Zero(p.value.size());
      p.grad += n.grad;
      p.has_grad = true;
    }
  }
}

const Eigen::VectorXd& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id_);
  if (n.grad.size() != n.value().size()) {
    static thread_local Eigen::VectorXd empty;
    empty = Eigen::VectorXd::Zero(n.value().size());
    return empty;
  }
  return n.grad;
}

}  // namespace intent::ad
