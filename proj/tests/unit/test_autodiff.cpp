#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "intent/autodiff/gradient_check.hpp"
#include "intent/autodiff/ops.hpp"

using namespace intent::ad;

namespace {

Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -2, double hi = 2) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::zeros(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.values(i) = u(rng);
  return t;
}

// Naive triple loop: x[B,k] * W[m,k]^T + b
RowMatrix<double> naive_affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  const Index rows = x.rows(), k = x.cols(), m = w.shape[0];
  RowMatrix<double> out(rows, m);
  for (Index r = 0; r < rows; ++r) {
    for (Index j = 0; j < m; ++j) {
      double acc = b.values(j);
      for (Index i = 0; i < k; ++i) acc += x.values(r * k + i) * w.values(j * k + i);
      out(r, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("affine forward") {
  Tape tape;
  const auto x = tape.constant(Tensor::vector({1.5, -2.0, 0.25}));

  Tensor eye = Tensor::zeros({3, 3});
  eye.mat().setIdentity();
  const auto out = affine(x, tape.constant(eye), tape.constant(Tensor::zeros({3})));
  CHECK(out.value().values == x.value().values);
  CHECK(out.shape() == Shape{3});

  const auto b = Tensor::vector({0.5, 1.0});
  const auto only_bias = affine(x, tape.constant(Tensor::zeros({2, 3})), tape.constant(b));
  CHECK(only_bias.value().values == b.values);

  std::mt19937_64 rng(1);
  const auto xs = random_tensor(rng, {3, 2});
  const auto w = random_tensor(rng, {4, 2});
  const auto bias = random_tensor(rng, {4});
  const auto y = affine(tape.constant(xs), tape.constant(w), tape.constant(bias));
  CHECK(y.shape() == Shape{3, 4});
  CHECK((y.mat() - naive_affine(xs, w, bias)).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(affine(x, tape.constant(Tensor::zeros({2, 4})), tape.constant(b)),
                  intent::ShapeError);
}

TEST_CASE("activations and softmax") {
  Tape tape;
  CHECK(sigmoid(tape.constant(Tensor::scalar(0))).item() == 0.5);
  CHECK(tanh(tape.constant(Tensor::scalar(0))).item() == 0.0);

  const auto uniform = softmax(tape.constant(Tensor::vector({0, 0, 0, 0})));
  for (Index i = 0; i < 4; ++i) CHECK(uniform.value().values(i) == doctest::Approx(0.25));

  const auto peaked = softmax(tape.constant(Tensor::vector({10, 0})));
  const double e10 = std::exp(10.0);
  CHECK(std::abs(peaked.value().values(0) - e10 / (e10 + 1)) < 1e-15);
  CHECK(std::abs(peaked.value().values(1) - 1 / (e10 + 1)) < 1e-15);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto logits = random_tensor(rng, {3, 5}, -30, 30);
    auto shifted = logits;
    shifted.values.array() += 123.0;
    const auto p = softmax(tape.constant(logits));
    const auto q = softmax(tape.constant(shifted));
    CHECK((p.mat().rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(p.value().values.minCoeff() >= 0.0);
    CHECK((p.mat() - q.mat()).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(exp(tape.constant(Tensor::scalar(1000))), intent::NumericError);
}

TEST_CASE("concat and split4") {
  Tape tape;
  const auto ab = concat({tape.constant(Tensor::vector({1})), tape.constant(Tensor::vector({2}))});
  CHECK(ab.value().values == Tensor::vector({1, 2}).values);
  CHECK_THROWS_AS(concat(std::span<const Var>{}), intent::ShapeError);

  std::mt19937_64 rng(3);
  const auto f = concat({tape.constant(random_tensor(rng, {32})), tape.constant(random_tensor(rng, {32})),
                         tape.constant(random_tensor(rng, {32}))});
  CHECK(f.shape() == Shape{96});

  const auto parts = split4(tape.constant(Tensor::vector({1, 2, 3, 4})));
  for (int i = 0; i < 4; ++i) CHECK(parts[i].item() == i + 1);

  const auto x = tape.constant(random_tensor(rng, {5, 256}));
  const auto chunks = split4(x);
  for (const auto& c : chunks) CHECK(c.shape() == Shape{5, 64});
  CHECK(concat({chunks[0], chunks[1], chunks[2], chunks[3]}).value().values == x.value().values);
  CHECK_THROWS_AS(split4(tape.constant(Tensor::zeros({6}))), intent::ShapeError);
}

TEST_CASE("cosine similarity") {
  Tape tape;
  const auto u = tape.constant(Tensor::vector({1, 2, 3}));
  CHECK(cosine_similarity(u, u).item() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity(u, -u).item() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cosine_similarity(tape.constant(Tensor::vector({1, 0})), tape.constant(Tensor::vector({0, 3})))
            .item() == 0.0);
  CHECK(cosine_similarity(tape.constant(Tensor::zeros({3})), u).item() == 0.0);
}

TEST_CASE("backward on simple losses") {
  std::mt19937_64 rng(4);
  ParamSet ps;
  ps.add("w", random_tensor(rng, {6}));
  {
    Tape tape;
    tape.backward(sum(tape.param(ps, "w")));
    CHECK(ps.at("w").grad.isApprox(Eigen::VectorXd::Ones(6)));
  }
  ps.clear_grad();
  {
    Tape tape;
    const auto w = tape.param(ps, "w");
    tape.backward(sum(w * w));
    CHECK(ps.at("w").grad.isApprox(2 * ps.at("w").value.values));
  }
  Tape tape;
  CHECK_THROWS_AS(tape.backward(tape.param(ps, "w")), intent::ShapeError);
}

TEST_CASE("every op passes gradient check on random inputs") {
  std::mt19937_64 rng(5);
  ParamSet ps;
  ps.add("x", random_tensor(rng, {3, 8}));
  ps.add("y", random_tensor(rng, {3, 8}));
  ps.add("w", random_tensor(rng, {8, 8}));
  ps.add("b", random_tensor(rng, {8}));
  ps.add("s", random_tensor(rng, {3}));
  const std::vector<Index> rows{2, 0, 2};

  const std::vector<std::pair<const char*, LossClosure>> cases = {
      {"affine", [](Tape& t, ParamSet& p) {
         return sum(tanh(affine(t.param(p, "x"), t.param(p, "w"), t.param(p, "b"))));
       }},
      {"sigmoid", [](Tape& t, ParamSet& p) { return sum(sigmoid(t.param(p, "x")) * t.param(p, "y")); }},
      {"exp_log", [](Tape& t, ParamSet& p) {
         return mean(log(exp(t.param(p, "x")) + exp(t.param(p, "y"))));
       }},
      {"softplus", [](Tape& t, ParamSet& p) { return sum(softplus(t.param(p, "x") - t.param(p, "y"))); }},
      {"softmax", [](Tape& t, ParamSet& p) {
         return sum(softmax(t.param(p, "x")) * t.param(p, "y"));
       }},
      {"concat_split", [](Tape& t, ParamSet& p) {
         const auto parts = split4(concat({t.param(p, "x"), t.param(p, "y")}));
         return sum(parts[0] * parts[3]) + sum(tanh(parts[1] - parts[2]));
       }},
      {"cosine", [](Tape& t, ParamSet& p) {
         return sum(cosine_similarity(t.param(p, "x"), t.param(p, "y")) * t.param(p, "s"));
       }},
      {"rows", [rows](Tape& t, ParamSet& p) {
         const auto g = gather_rows(t.param(p, "x"), rows);
         return sum(row_sum(scale_rows(g, column(t.param(p, "y"), 3))) * t.param(p, "s"));
       }},
  };
  for (const auto& [name, closure] : cases) {
    CAPTURE(name);
    const auto report = gradient_check(closure, ps, 1e-4);
    CHECK(report.passed);
    CHECK(report.max_relative_error < 1e-6);
  }
}

TEST_CASE("gradient check tolerances") {
  std::mt19937_64 rng(6);
  ParamSet ps;
  ps.add("w", random_tensor(rng, {4, 3}));
  ps.add("b", random_tensor(rng, {4}));
  ps.add("w2", random_tensor(rng, {2, 4}));
  ps.add("b2", random_tensor(rng, {2}));
  const auto input = random_tensor(rng, {5, 3});

  const auto linear = gradient_check(
      [&](Tape& t, ParamSet& p) {
        return sum(affine(t.constant(input), t.param(p, "w"), t.param(p, "b")));
      },
      ps, 1e-8);
  CHECK(linear.max_relative_error < 1e-8);

  const auto mlp = gradient_check(
      [&](Tape& t, ParamSet& p) {
        const auto h = tanh(affine(t.constant(input), t.param(p, "w"), t.param(p, "b")));
        const auto o = affine(h, t.param(p, "w2"), t.param(p, "b2"));
        return sum(o * o);
      },
      ps, 1e-6);
  CHECK(mlp.passed);

  // negative control: an op whose backward rule is off by a factor of two
  const auto broken_square = [](Var x) {
    Tensor out(x.shape(), x.value().values.cwiseAbs2());
    return x.tape().record("broken_square", std::move(out), {x}, [](const BackwardContext& ctx) {
      ctx.in_grad(0) += 4.0 * ctx.out_grad().cwiseProduct(ctx.input(0).mat());
    });
  };
  const auto bad = gradient_check(
      [&](Tape& t, ParamSet& p) { return sum(broken_square(t.param(p, "b"))); }, ps, 1e-4);
  CHECK_FALSE(bad.passed);
}

TEST_CASE("adam step") {
  ParamSet ps;
  ps.add("p", Tensor::vector({1.0, -2.0}));
  ps.zero_grad();
  adam_step(ps, {0.1});
  CHECK(ps.at("p").value.values == Tensor::vector({1.0, -2.0}).values);
  CHECK(ps.step() == 1);
  CHECK_FALSE(ps.at("p").has_grad);
  CHECK_THROWS_AS(adam_step(ps, {0.1}), std::logic_error);

  ParamSet single;
  single.add("s", Tensor::scalar(3.0));
  single.zero_grad();
  single.at("s").grad(0) = 1.0;
  adam_step(single, {0.1});
  // m_hat = 1, v_hat = 1 on the first step
  CHECK(single.at("s").value.item() == doctest::Approx(3.0 - 0.1 / (1 + 1e-8)).epsilon(1e-15));

  const auto run = [] {
    std::mt19937_64 rng(7);
    ParamSet p;
    p.add("w", random_tensor(rng, {3, 3}));
    for (int i = 0; i < 20; ++i) {
      p.zero_grad();
      Tape t;
      const auto w = t.param(p, "w");
      t.backward(sum(tanh(w) * w));
      adam_step(p, {0.01});
    }
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("param set serialization") {
  std::mt19937_64 rng(8);
  ParamSet ps;
  ps.add("rep.w", random_tensor(rng, {4, 6}));
  ps.add("rep.b", random_tensor(rng, {4}));
  ps.add("scalar", Tensor::scalar(0.5));
  CHECK_THROWS_AS(ps.add("rep.b", Tensor::scalar(1)), intent::ConfigError);

  std::stringstream buf;
  ps.save(buf);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "INTM");
  CHECK(bytes[4] == 1);
  const auto loaded = ParamSet::load(buf);
  CHECK(loaded == ps);

  std::string wrong_version = bytes;
  wrong_version[4] = 2;
  std::stringstream v2(wrong_version);
  CHECK_THROWS_AS(ParamSet::load(v2), intent::ParseError);

  std::stringstream junk("XXXX");
  CHECK_THROWS_AS(ParamSet::load(junk), intent::ParseError);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(ParamSet::load(truncated), intent::ParseError);
}
