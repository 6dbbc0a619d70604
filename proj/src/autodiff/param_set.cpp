#include "intent/autodiff/param_set.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace intent::ad {
namespace {

constexpr char kMagic[4] = {'I', 'N', 'T', 'M'};

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ParseError("parameter file truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

Parameter& ParamSet::add(const std::string& name, Tensor value) {
  if (entries_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  Parameter p;
  p.first_moment = Eigen::VectorXd::Zero(value.size());
  p.second_moment = Eigen::VectorXd::Zero(value.size());
  p.value = std::move(value);
  p.value.requires_grad = true;
  return entries_.emplace(name, std::move(p)).first->second;
}

Parameter& ParamSet::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return it->second;
}

const Parameter& ParamSet::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return it->second;
}

Index ParamSet::total_elements() const {
  Index n = 0;
  for (const auto& [_, p] : entries_) n += p.value.size();
  return n;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

void ParamSet::zero_grad() {
  for (auto& [_, p] : entries_) {
    p.grad = Eigen::VectorXd::Zero(p.value.size());
    p.has_grad = true;
  }
}

void ParamSet::clear_grad() {
  for (auto& [_, p] : entries_) {
    p.grad.resize(0);
    p.has_grad = false;
  }
}

void ParamSet::save(std::ostream& out) const {
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kFormatVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, p] : entries_) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.shape.size()));
    for (Index e : p.value.shape) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    for (Index i = 0; i < p.value.size(); ++i) write_le<double>(out, p.value.values(i));
  }
  if (!out) throw IoError("failed writing parameter file");
}

ParamSet ParamSet::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("bad magic bytes: not an INTM parameter file");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw ParseError("unsupported parameter file version " + std::to_string(version));
  }
  const auto count = read_le<std::uint32_t>(in);
  ParamSet set;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto len = read_le<std::uint32_t>(in);
    if (len > (1u << 16)) throw ParseError("parameter name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw ParseError("parameter file truncated");
    const auto rank = read_le<std::uint32_t>(in);
    if (rank > 2) throw ParseError("parameter '" + name + "' has unsupported rank");
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(read_le<std::uint32_t>(in));
    Eigen::VectorXd values(numel(shape));
    for (Index i = 0; i < values.size(); ++i) values(i) = read_le<double>(in);
    set.add(name, Tensor(std::move(shape), std::move(values)));
  }
  return set;
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (auto ia = a.entries_.begin(), ib = b.entries_.begin(); ia != a.entries_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.value.shape != ib->second.value.shape) return false;
    const auto& va = ia->second.value.values;
    const auto& vb = ib->second.value.values;
    if (std::memcmp(va.data(), vb.data(), sizeof(double) * va.size()) != 0) return false;
  }
  return true;
}

void adam_step(ParamSet& params, const AdamOptions& opts) {
  for (const auto& [name, p] : params) {
    if (!p.has_grad) throw std::logic_error("adam_step: parameter '" + name + "' has no gradient");
  }
  params.set_step(params.step() + 1);
  const double t = static_cast<double>(params.step());
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  for (auto& [_, p] : params) {
    p.first_moment = opts.beta1 * p.first_moment + (1.0 - opts.beta1) * p.grad;
    p.second_moment = opts.beta2 * p.second_moment + (1.0 - opts.beta2) * p.grad.cwiseAbs2();
    p.value.values.array() -= opts.learning_rate * (p.first_moment.array() / c1) /
                              ((p.second_moment.array() / c2).sqrt() + opts.eps);
  }
  params.clear_grad();
}

}  // namespace intent::ad
