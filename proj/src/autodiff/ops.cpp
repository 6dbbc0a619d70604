#include "intent/autodiff/ops.hpp"

#include <cmath>

namespace intent::ad {
namespace {

using Mat = RowMatrix<double>;

Shape with_last(const Shape& s, Index last) {
  Shape out = s;
  if (out.empty()) out.push_back(last);
  else out.back() = last;
  return out;
}

Shape drop_last(const Shape& s) {
  if (s.empty()) return s;
  return Shape(s.begin(), s.end() - 1);
}

Tensor make(Shape shape, const Eigen::Ref<const Mat>& m) {
  Tensor t = Tensor::zeros(std::move(shape));
  t.mat() = m;
  return t;
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " +
                     to_string(b.shape()) + " differ");
  }
}

// Elementwise op whose derivative is a function of (input, output).
template <typename Fwd, typename Deriv>
Var unary(const char* op, Var x, Fwd fwd, Deriv deriv) {
  Tensor out(x.shape(), x.value().values.unaryExpr(fwd));
  return x.tape().record(op, std::move(out), {x}, [deriv](const BackwardContext& ctx) {
    if (!ctx.needs(0)) return;
    const auto& in = ctx.input(0).values.array();
    const auto& y = ctx.output().values.array();
    auto g = ctx.in_grad(0);
    Eigen::Map<Eigen::ArrayXd>(g.data(), g.size()) +=
        Eigen::Map<const Eigen::ArrayXd>(ctx.out_grad().data(), g.size()) * deriv(in, y);
  });
}

}  // namespace

Var affine(Var input, Var weight, Var bias) {
  const auto& x = input.value();
  const auto& w = weight.value();
  const auto& b = bias.value();
  if (x.rank() < 1 || w.rank() != 2 || b.rank() != 1 || w.shape[1] != x.cols() ||
      b.shape[0] != w.shape[0]) {
    throw ShapeError("affine: input " + to_string(x.shape) + ", weight " + to_string(w.shape) +
                     ", bias " + to_string(b.shape) + " do not conform");
  }
  Mat y = x.mat() * w.mat().transpose();
  y.rowwise() += b.values.transpose();
  return input.tape().record(
      "affine", make(with_last(x.shape, w.shape[0]), y), {input, weight, bias},
      [](const BackwardContext& ctx) {
        const auto g = ctx.out_grad();
        if (ctx.needs(0)) ctx.in_grad(0).noalias() += g * ctx.input(1).mat();
        if (ctx.needs(1)) ctx.in_grad(1).noalias() += g.transpose() * ctx.input(0).mat();
        if (ctx.needs(2)) ctx.in_grad(2) += g.colwise().sum();
      });
}

Var tanh(Var x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](const auto&, const auto& y) { return 1.0 - y.square(); });
}

Var sigmoid(Var x) {
  return unary(
      "sigmoid", x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](const auto&, const auto& y) { return y * (1.0 - y); });
}

Var exp(Var x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](const auto&, const auto& y) { return y; });
}

Var log(Var x, double floor) {
  return unary(
      "log", x, [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](const auto& in, const auto&) {
        return (in > floor).select(1.0 / in.max(floor), 0.0);
      });
}

Var softplus(Var x) {
  return unary(
      "softplus", x,
      [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
      [](const auto& in, const auto&) { return 1.0 / (1.0 + (-in).exp()); });
}

Var softmax(Var x) {
  Mat m = x.mat();
  for (Index r = 0; r < m.rows(); ++r) {
    m.row(r).array() -= m.row(r).maxCoeff();
    m.row(r) = m.row(r).array().exp().matrix();
    m.row(r) /= m.row(r).sum();
  }
  return x.tape().record("softmax", make(x.shape(), m), {x}, [](const BackwardContext& ctx) {
    if (!ctx.needs(0)) return;
    const auto y = ctx.output().mat();
    const auto g = ctx.out_grad();
    // dx = y * (g - <g, y>) per row
    const Eigen::VectorXd dots = (g.array() * y.array()).rowwise().sum();
    ctx.in_grad(0).array() += y.array() * (g.colwise() - dots).array();
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  return a.tape().record("add", Tensor(a.shape(), a.value().values + b.value().values), {a, b},
                         [](const BackwardContext& ctx) {
                           if (ctx.needs(0)) ctx.in_grad(0) += ctx.out_grad();
                           if (ctx.needs(1)) ctx.in_grad(1) += ctx.out_grad();
                         });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  return a.tape().record("sub", Tensor(a.shape(), a.value().values - b.value().values), {a, b},
                         [](const BackwardContext& ctx) {
                           if (ctx.needs(0)) ctx.in_grad(0) += ctx.out_grad();
                           if (ctx.needs(1)) ctx.in_grad(1) -= ctx.out_grad();
                         });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor out(a.shape(), a.value().values.cwiseProduct(b.value().values));
  return a.tape().record("mul", std::move(out), {a, b}, [](const BackwardContext& ctx) {
    const auto g = ctx.out_grad();
    if (ctx.needs(0)) ctx.in_grad(0) += g.cwiseProduct(ctx.input(1).mat());
    if (ctx.needs(1)) ctx.in_grad(1) += g.cwiseProduct(ctx.input(0).mat());
  });
}

Var scale(Var x, double factor) {
  return x.tape().record("scale", Tensor(x.shape(), x.value().values * factor), {x},
                         [factor](const BackwardContext& ctx) {
                           if (ctx.needs(0)) ctx.in_grad(0) += factor * ctx.out_grad();
                         });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of an empty list");
  const Shape lead = drop_last(parts[0].shape());
  Index total = 0;
  for (const Var& p : parts) {
    if (p.shape().empty() || drop_last(p.shape()) != lead) {
      throw ShapeError("concat: part shape " + to_string(p.shape()) + " does not conform");
    }
    total += p.shape().back();
  }
  Mat m(parts[0].value().rows(), total);
  std::vector<Index> offsets;
  Index off = 0;
  for (const Var& p : parts) {
    offsets.push_back(off);
    m.middleCols(off, p.shape().back()) = p.mat();
    off += p.shape().back();
  }
  return parts[0].tape().record(
      "concat", make(with_last(parts[0].shape(), total), m), std::vector<Var>(parts.begin(), parts.end()),
      [offsets](const BackwardContext& ctx) {
        const auto g = ctx.out_grad();
        for (std::size_t k = 0; k < offsets.size(); ++k) {
          if (!ctx.needs(k)) continue;
          auto dst = ctx.in_grad(k);
          dst += g.middleCols(offsets[k], dst.cols());
        }
      });
}

Var slice(Var x, Index start, Index count) {
  const Index cols = x.value().cols();
  if (x.shape().empty() || start < 0 || count < 0 || start + count > cols) {
    throw ShapeError("slice [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of range for shape " + to_string(x.shape()));
  }
  Mat m = x.mat().middleCols(start, count);
  return x.tape().record("slice", make(with_last(x.shape(), count), m), {x},
                         [start, count](const BackwardContext& ctx) {
                           if (ctx.needs(0)) ctx.in_grad(0).middleCols(start, count) += ctx.out_grad();
                         });
}

std::array<Var, 4> split4(Var x) {
  if (x.shape().empty() || x.shape().back() % 4 != 0) {
    throw ShapeError("split4: last extent of " + to_string(x.shape()) + " is not divisible by 4");
  }
  const Index q = x.shape().back() / 4;
  return {slice(x, 0, q), slice(x, q, q), slice(x, 2 * q, q), slice(x, 3 * q, q)};
}

Var cosine_similarity(Var u, Var v, double eps) {
  require_same_shape("cosine_similarity", u, v);
  const auto a = u.mat();
  const auto b = v.mat();
  const Eigen::VectorXd na = a.rowwise().norm().array() + eps;
  const Eigen::VectorXd nb = b.rowwise().norm().array() + eps;
  const Eigen::VectorXd dots = (a.array() * b.array()).rowwise().sum();
  const Eigen::VectorXd sim = dots.array() / (na.array() * nb.array());
  return u.tape().record(
      "cosine_similarity", Tensor(drop_last(u.shape()), sim), {u, v},
      [na, nb, dots, eps](const BackwardContext& ctx) {
        const auto a = ctx.input(0).mat();
        const auto b = ctx.input(1).mat();
        const auto g = ctx.out_grad();  // rows x 1 view of the per-row gradient
        for (Index r = 0; r < a.rows(); ++r) {
          const double gr = g.size() == a.rows() ? g.data()[r] : g(0, 0);
          const double denom = na(r) * nb(r);
          const double ra = na(r) - eps, rb = nb(r) - eps;
          // d(sim)/da = b / (|a||b|) - dots * a / (|a|_raw * |a|^2 |b|)
          if (ctx.needs(0)) {
            auto da = ctx.in_grad(0).row(r);
            da += gr * b.row(r) / denom;
            if (ra > 0) da -= gr * dots(r) / (denom * na(r) * ra) * a.row(r);
          }
          if (ctx.needs(1)) {
            auto db = ctx.in_grad(1).row(r);
            db += gr * a.row(r) / denom;
            if (rb > 0) db -= gr * dots(r) / (denom * nb(r) * rb) * b.row(r);
          }
        }
      });
}

Var gather_rows(Var x, std::span<const Index> rows) {
  if (x.shape().size() != 2) throw ShapeError("gather_rows needs a rank-2 tensor");
  const auto m = x.mat();
  Mat out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) throw ShapeError("gather_rows: row index out of range");
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  std::vector<Index> idx(rows.begin(), rows.end());
  return x.tape().record("gather_rows", make(Shape{out.rows(), out.cols()}, out), {x},
                         [idx](const BackwardContext& ctx) {
                           if (!ctx.needs(0)) return;
                           auto dst = ctx.in_grad(0);
                           const auto g = ctx.out_grad();
                           for (std::size_t i = 0; i < idx.size(); ++i) {
                             dst.row(idx[i]) += g.row(static_cast<Index>(i));
                           }
                         });
}

Var column(Var x, Index j) {
  if (x.shape().empty() || j < 0 || j >= x.shape().back()) {
    throw ShapeError("column index out of range for shape " + to_string(x.shape()));
  }
  const Eigen::VectorXd c = x.mat().col(j);
  return x.tape().record("column", Tensor(drop_last(x.shape()), c), {x},
                         [j](const BackwardContext& ctx) {
                           if (!ctx.needs(0)) return;
                           const auto g = ctx.out_grad();
                           ctx.in_grad(0).col(j) +=
                               Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
                         });
}

Var scale_rows(Var x, Var s) {
  if (x.shape().empty() || drop_last(x.shape()) != s.shape()) {
    throw ShapeError("scale_rows: " + to_string(x.shape()) + " by " + to_string(s.shape()));
  }
  const Eigen::Map<const Eigen::VectorXd> sv(s.value().values.data(), s.value().size());
  Mat m = x.mat().array().colwise() * sv.array();
  return x.tape().record("scale_rows", make(x.shape(), m), {x, s}, [](const BackwardContext& ctx) {
    const auto g = ctx.out_grad();
    const auto xm = ctx.input(0).mat();
    const auto& sv = ctx.input(1).values;
    if (ctx.needs(0)) ctx.in_grad(0).array() += g.array().colwise() * sv.array();
    if (ctx.needs(1)) {
      auto ds = ctx.in_grad(1);
      const Eigen::VectorXd d = (g.array() * xm.array()).rowwise().sum();
      Eigen::Map<Eigen::VectorXd>(ds.data(), ds.size()) += d;
    }
  });
}

Var row_sum(Var x) {
  if (x.shape().empty()) throw ShapeError("row_sum of a scalar");
  const Eigen::VectorXd s = x.mat().rowwise().sum();
  return x.tape().record("row_sum", Tensor(drop_last(x.shape()), s), {x},
                         [](const BackwardContext& ctx) {
                           if (!ctx.needs(0)) return;
                           const auto g = ctx.out_grad();
                           ctx.in_grad(0).colwise() +=
                               Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
                         });
}

Var sum(Var x) {
  return x.tape().record("sum", Tensor::scalar(x.value().values.sum()), {x},
                         [](const BackwardContext& ctx) {
                           if (ctx.needs(0)) ctx.in_grad(0).array() += ctx.out_grad()(0, 0);
                         });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  if (n == 0) throw ShapeError("mean of an empty tensor");
  return x.tape().record("mean", Tensor::scalar(x.value().values.sum() / n), {x},
                         [n](const BackwardContext& ctx) {
                           if (ctx.needs(0)) ctx.in_grad(0).array() += ctx.out_grad()(0, 0) / n;
                         });
}

}  // namespace intent::ad
