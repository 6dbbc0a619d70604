#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "intent/autodiff/tensor.hpp"

namespace intent::ad {

/// A trainable tensor with its gradient and Adam moments.
struct Parameter {
  Tensor value;
  Eigen::VectorXd grad;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  bool has_grad = false;
};

/// Named trainable tensors, ordered by name, plus the optimizer step counter.
class ParamSet {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// Adds a parameter; throws ConfigError if the name is taken.
  Parameter& add(const std::string& name, Tensor value);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  std::size_t size() const { return entries_.size(); }
  Index total_elements() const;
  std::vector<std::string> names() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Marks every parameter as having a zero gradient.
  void zero_grad();
  void clear_grad();
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  /// Binary format: "INTM", u32 version, u32 entry count, then per entry
  /// u32 name length, name bytes, u32 rank, u32 extents, f64 values. All LE.
  void save(std::ostream& out) const;
  static ParamSet load(std::istream& in);

  /// True when both sets have the same names, shapes and bit-identical values.
  friend bool operator==(const ParamSet& a, const ParamSet& b);

 private:
  std::map<std::string, Parameter> entries_;
  std::uint64_t step_ = 0;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update. Throws std::logic_error if any parameter
/// has no gradient. Clears gradients afterwards.
void adam_step(ParamSet& params, const AdamOptions& opts);

}  // namespace intent::ad
