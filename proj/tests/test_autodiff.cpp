#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ert/nn/adam.hpp"
#include "ert/nn/autodiff.hpp"

#include <cmath>
#include <random>

using namespace ert;

namespace {

nn::Mat random_mat(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  nn::Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = d(rng);
  return m;
}

// Central-difference check of d(loss)/d(p) for every parameter entry.
template <class F>
void gradcheck(std::vector<nn::Parameter*> params, F build_loss, double tol,
               double h = 1e-6) {
  nn::Tape tape;
  for (auto* p : params) p->zero_grad();
  tape.backward(build_loss(tape));
  for (auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double orig = p->value(i);
      p->value(i) = orig + h;
      nn::Tape tp;
      double up = build_loss(tp).scalar();
      p->value(i) = orig - h;
      nn::Tape tm;
      double dn = build_loss(tm).scalar();
      p->value(i) = orig;
      double num = (up - dn) / (2.0 * h);
      CAPTURE(p->name);
      CAPTURE(i);
      CHECK(std::abs(num - p->grad(i)) <=
            tol * std::max(1.0, std::abs(num)));
    }
  }
}

}  // namespace

TEST_CASE("elementwise op values") {
  nn::Tape t;
  nn::Mat a(2, 2), b(2, 2);
  a << 1, -2, 3, 0.5, b << 4, 5, -1, 2;
  nn::Var va = t.constant(a), vb = t.constant(b);

  CHECK(add(va, vb).value()(0, 1) == 3.0);
  CHECK(sub(va, vb).value()(1, 0) == 4.0);
  CHECK(hadamard(va, vb).value()(0, 0) == 4.0);
  CHECK(scale(va, -2.0).value()(1, 0) == -6.0);
  CHECK(relu(va).value()(0, 1) == 0.0);
  CHECK(relu(va).value()(1, 0) == 3.0);
  CHECK(exp_elem(va).value()(0, 0) == doctest::Approx(std::exp(1.0)));
  CHECK(clamp(va, -1.0, 1.0).value()(0, 1) == -1.0);
  CHECK(vmin(va, vb).value()(0, 0) == 1.0);
  CHECK(sum_all(va).scalar() == doctest::Approx(2.5));
  CHECK(pick(va, 1, 1).scalar() == 0.5);
}

TEST_CASE("matmul values") {
  nn::Tape t;
  nn::Mat a(2, 3), b(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  b << 7, 8, 9, 10, 11, 12;
  nn::Mat prod = matmul(t.constant(a), t.constant(b)).value();
  CHECK(prod(0, 0) == 58.0);
  CHECK(prod(1, 1) == 154.0);
  nn::Mat nt = matmul_nt(t.constant(a), t.constant(a)).value();
  CHECK(nt(0, 1) == 32.0);  // row0 . row1
  CHECK(nt(1, 1) == 77.0);
}

TEST_CASE("softmax and log_softmax rows") {
  nn::Tape t;
  nn::Mat x(1, 3);
  x << 0.0, 1.0, 2.0;
  nn::Mat p = softmax_rows(t.constant(x)).value();
  double z = 1.0 + std::exp(1.0) + std::exp(2.0);
  CHECK(p(0, 0) == doctest::Approx(1.0 / z));
  CHECK(p.row(0).sum() == doctest::Approx(1.0));
  nn::Mat lp = log_softmax_rows(t.constant(x)).value();
  CHECK(lp(0, 2) == doctest::Approx(2.0 - std::log(z)));
  // large logits stay finite (stable against overflow)
  nn::Mat big(1, 2);
  big << 1000.0, 1001.0;
  nn::Mat lbig = log_softmax_rows(t.constant(big)).value();
  CHECK(std::isfinite(lbig(0, 0)));
}

TEST_CASE("layer_norm rows") {
  nn::Tape t;
  nn::Mat x(1, 4), g(1, 4), b(1, 4);
  x << 1, 2, 3, 4;
  g.setOnes();
  b.setZero();
  nn::Mat y = layer_norm_rows(t.constant(x), t.constant(g), t.constant(b)).value();
  CHECK(y.row(0).mean() == doctest::Approx(0.0).epsilon(1e-10));
  double var = (y.row(0).array() - y.row(0).mean()).square().mean();
  CHECK(var == doctest::Approx(1.0).epsilon(1e-4));  // eps shifts it slightly
}

TEST_CASE("gradcheck: binary and unary ops") {
  std::mt19937_64 rng(7);
  nn::Parameter A("A", random_mat(3, 4, rng));
  nn::Parameter B("B", random_mat(3, 4, rng));
  nn::Mat C = random_mat(3, 4, rng);

  auto reduce = [&](nn::Tape& t, nn::Var v) {
    return sum_all(hadamard(v, t.constant(C)));
  };

  gradcheck({&A, &B}, [&](nn::Tape& t) {
    return reduce(t, add(t.leaf(A), t.leaf(B)));
  }, 1e-4);
  gradcheck({&A, &B}, [&](nn::Tape& t) {
    return reduce(t, sub(t.leaf(A), t.leaf(B)));
  }, 1e-4);
  gradcheck({&A, &B}, [&](nn::Tape& t) {
    return reduce(t, hadamard(t.leaf(A), t.leaf(B)));
  }, 1e-4);
  gradcheck({&A}, [&](nn::Tape& t) {
    return reduce(t, scale(t.leaf(A), -1.7));
  }, 1e-4);
  gradcheck({&A}, [&](nn::Tape& t) {
    return reduce(t, exp_elem(t.leaf(A)));
  }, 1e-4);
  gradcheck({&A, &B}, [&](nn::Tape& t) {
    return reduce(t, vmin(t.leaf(A), t.leaf(B)));
  }, 1e-4);
  // keep entries away from the relu kink and clamp boundaries
  A.value.array() += (A.value.array() >= 0).cast<double>() * 0.1 - 0.05;
  gradcheck({&A}, [&](nn::Tape& t) {
    return reduce(t, relu(t.leaf(A)));
  }, 1e-4);
  gradcheck({&A}, [&](nn::Tape& t) {
    return reduce(t, clamp(t.leaf(A), -0.5, 0.5));
  }, 1e-4);
}

TEST_CASE("gradcheck: matmul family") {
  std::mt19937_64 rng(11);
  nn::Parameter A("A", random_mat(2, 3, rng));
  nn::Parameter B("B", random_mat(3, 4, rng));
  nn::Parameter B2("B2", random_mat(5, 3, rng));
  nn::Mat C = random_mat(2, 4, rng), C2 = random_mat(2, 5, rng);

  gradcheck({&A, &B}, [&](nn::Tape& t) {
    return sum_all(hadamard(matmul(t.leaf(A), t.leaf(B)), t.constant(C)));
  }, 1e-4);
  gradcheck({&A, &B2}, [&](nn::Tape& t) {
    return sum_all(hadamard(matmul_nt(t.leaf(A), t.leaf(B2)), t.constant(C2)));
  }, 1e-4);
}

TEST_CASE("gradcheck: softmax, log_softmax, layer_norm") {
  std::mt19937_64 rng(13);
  nn::Parameter X("X", random_mat(3, 5, rng));
  nn::Parameter G("G", random_mat(1, 5, rng, 0.3));
  G.value.array() += 1.0;
  nn::Parameter Bi("Bi", random_mat(1, 5, rng, 0.3));
  nn::Mat C = random_mat(3, 5, rng);

  auto reduce = [&](nn::Tape& t, nn::Var v) {
    return sum_all(hadamard(v, t.constant(C)));
  };
  gradcheck({&X}, [&](nn::Tape& t) {
    return reduce(t, softmax_rows(t.leaf(X)));
  }, 1e-4);
  gradcheck({&X}, [&](nn::Tape& t) {
    return reduce(t, log_softmax_rows(t.leaf(X)));
  }, 1e-4);
  gradcheck({&X, &G, &Bi}, [&](nn::Tape& t) {
    return reduce(t, layer_norm_rows(t.leaf(X), t.leaf(G), t.leaf(Bi)));
  }, 1e-4);
}

TEST_CASE("gradcheck: structure ops") {
  std::mt19937_64 rng(17);
  nn::Parameter A("A", random_mat(4, 3, rng));
  nn::Parameter B("B", random_mat(4, 2, rng));
  nn::Mat C5 = random_mat(4, 5, rng), C2 = random_mat(4, 2, rng),
          Cg = random_mat(3, 3, rng);

  gradcheck({&A, &B}, [&](nn::Tape& t) {
    return sum_all(hadamard(nn::concat_cols<double>({t.leaf(A), t.leaf(B)}),
                            t.constant(C5)));
  }, 1e-4);
  gradcheck({&A}, [&](nn::Tape& t) {
    return sum_all(hadamard(slice_cols(t.leaf(A), 1, 2), t.constant(C2)));
  }, 1e-4);
  gradcheck({&A}, [&](nn::Tape& t) {
    // repeated index exercises gradient accumulation
    return sum_all(hadamard(gather_rows(t.leaf(A), {2, 0, 2}), t.constant(Cg)));
  }, 1e-4);
  gradcheck({&A}, [&](nn::Tape& t) { return pick(t.leaf(A), 2, 1); }, 1e-4);
}

TEST_CASE("gradcheck: linear tight tolerance") {
  std::mt19937_64 rng(19);
  nn::Parameter X("X", random_mat(4, 3, rng));
  nn::Parameter W("W", random_mat(3, 5, rng));
  nn::Parameter B("B", random_mat(1, 5, rng));
  nn::Mat C = random_mat(4, 5, rng);
  gradcheck({&X, &W, &B}, [&](nn::Tape& t) {
    return sum_all(hadamard(linear(t.leaf(X), t.leaf(W), t.leaf(B)),
                            t.constant(C)));
  }, 1e-6, 1e-5);
}

TEST_CASE("dropout semantics") {
  nn::Tape t;
  std::mt19937_64 rng(23);
  nn::Mat x = random_mat(6, 6, rng);
  // identity when not training or rate is zero
  nn::Var v = t.constant(x);
  CHECK(dropout(v, 0.5, rng, false).value() == x);
  CHECK(dropout(v, 0.0, rng, true).value() == x);
  // training: entries are either zero or scaled by 1/keep
  nn::Mat d = dropout(v, 0.5, rng, true).value();
  int zeros = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    bool zeroed = d(i) == 0.0;
    bool scaled = std::abs(d(i) - 2.0 * x(i)) < 1e-12;
    CHECK((zeroed || scaled));
    if (zeroed) ++zeros;
  }
  CHECK(zeros > 0);
  CHECK(zeros < d.size());
  // same seed, same mask
  std::mt19937_64 r1(99), r2(99);
  nn::Mat d1 = dropout(v, 0.3, r1, true).value();
  nn::Mat d2 = dropout(v, 0.3, r2, true).value();
  CHECK(d1 == d2);
}

TEST_CASE("backward seed scaling and disconnected parameters") {
  nn::Parameter A("A", nn::Mat::Constant(2, 2, 3.0));
  nn::Parameter unused("unused", nn::Mat::Constant(1, 1, 1.0));
  nn::Tape t;
  nn::Var loss = sum_all(hadamard(t.leaf(A), t.leaf(A)));
  A.zero_grad();
  unused.zero_grad();
  t.backward(loss, 0.25);
  CHECK(A.grad(0, 0) == doctest::Approx(2.0 * 3.0 * 0.25));
  CHECK(unused.grad(0, 0) == 0.0);
  // constant-only loss: no parameter receives gradient and nothing throws
  nn::Tape t2;
  nn::Var c = sum_all(t2.constant(nn::Mat::Constant(2, 2, 5.0)));
  t2.backward(c);
}

TEST_CASE("gradients accumulate across backward calls") {
  nn::Parameter A("A", nn::Mat::Constant(1, 1, 2.0));
  nn::Tape t;
  nn::Var loss = hadamard(t.leaf(A), t.leaf(A));
  A.zero_grad();
  t.backward(loss);
  t.backward(loss);
  CHECK(A.grad(0, 0) == doctest::Approx(8.0));  // 2 * dL/dA
}

TEST_CASE("adam matches a scalar oracle") {
  nn::AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  nn::Parameter p("p", nn::Mat::Constant(1, 1, 1.0));
  nn::Adam opt({&p}, cfg, nn::LinearDecay{1e18});  // effectively no decay

  double m = 0.0, v = 0.0, x = 1.0;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gdist(0.5, 1.0);
  for (int k = 1; k <= 20; ++k) {
    double g = gdist(rng);
    p.grad(0, 0) = g;
    opt.step(0.0);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    double mhat = m / (1.0 - std::pow(0.9, k));
    double vhat = v / (1.0 - std::pow(0.999, k));
    x -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(p.value(0, 0) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("linear lr decay reaches zero and clamps") {
  nn::LinearDecay sched{100.0};
  CHECK(sched.lr(0.3, 0.0) == doctest::Approx(0.3));
  CHECK(sched.lr(0.3, 50.0) == doctest::Approx(0.15));
  CHECK(sched.lr(0.3, 100.0) == doctest::Approx(0.0));
  CHECK(sched.lr(0.3, 150.0) == doctest::Approx(0.0));  // clamped past the end

  // a step at full progress leaves parameters untouched
  nn::Parameter p("p", nn::Mat::Constant(1, 1, 4.0));
  nn::Adam opt({&p}, {0.1, 0.9, 0.999, 1e-8}, sched);
  p.grad(0, 0) = 1.0;
  opt.step(100.0);
  CHECK(p.value(0, 0) == 4.0);
}
