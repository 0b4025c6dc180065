#pragma once

// Reverse-mode automatic differentiation over dense Eigen matrices.
// A Tape records one forward pass at matrix-op granularity; backward()
// walks the recorded nodes in reverse creation order, which is a valid
// reverse topological order since every op only consumes earlier nodes.

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ert::nn {

template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Trainable tensor: value plus accumulated gradient of the same shape.
template <class S>
struct ParameterT {
  std::string name;
  MatT<S> value;
  MatT<S> grad;

  ParameterT() = default;
  ParameterT(std::string n, MatT<S> v)
      : name(std::move(n)), value(std::move(v)),
        grad(MatT<S>::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

template <class S>
class TapeT;

// Handle into a tape node. Cheap to copy; valid until the tape is reset.
template <class S>
struct VarT {
  TapeT<S>* tape = nullptr;
  int idx = -1;

  bool valid() const { return tape != nullptr && idx >= 0; }
  const MatT<S>& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  S scalar() const {
    assert(value().size() == 1);
    return value()(0, 0);
  }
};

template <class S>
class TapeT {
 public:
  using Mat = MatT<S>;
  using Var = VarT<S>;
  using Parameter = ParameterT<S>;

  struct Node {
    Mat val;
    Mat grad;                    // sized lazily in backward()
    bool needs_grad = false;
    std::function<void()> back;  // pulls from this node's grad into parents
  };

  Var constant(Mat v) { return push(std::move(v), false, {}); }

  // Registers a parameter leaf; backward() accumulates into p.grad.
  Var leaf(Parameter& p) {
    Var out = push(p.value, true, {});
    Parameter* pp = &p;
    int i = out.idx;
    nodes_[i].back = [this, i, pp] { pp->grad += nodes_[i].grad; };
    return out;
  }

  Var push(Mat v, bool needs_grad, std::function<void()> back) {
    nodes_.push_back(Node{std::move(v), Mat(), needs_grad, std::move(back)});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  Node& node(int i) { return nodes_[i]; }
  const Mat& val(int i) const { return nodes_[i].val; }
  Mat& grad(int i) { return nodes_[i].grad; }

  // Seeds d(loss)/d(loss) = seed and propagates to every parameter leaf.
  void backward(Var loss, S seed = S(1)) {
    if (loss.value().size() != 1)
      throw std::invalid_argument("backward: loss must be scalar");
    for (auto& n : nodes_)
      if (n.needs_grad) n.grad = Mat::Zero(n.val.rows(), n.val.cols());
    if (!nodes_[loss.idx].needs_grad) return;  // loss unreachable from params
    nodes_[loss.idx].grad(0, 0) = seed;
    for (int i = loss.idx; i >= 0; --i)
      if (nodes_[i].needs_grad && nodes_[i].back) nodes_[i].back();
  }

  void reset() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

template <class S>
const MatT<S>& VarT<S>::value() const {
  return tape->val(idx);
}

namespace detail {
template <class S>
inline void check_same_tape(VarT<S> a, VarT<S> b) {
  assert(a.tape == b.tape);
  (void)a;
  (void)b;
}
}  // namespace detail

template <class S>
VarT<S> add(VarT<S> a, VarT<S> b) {
  detail::check_same_tape(a, b);
  TapeT<S>* t = a.tape;
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw std::invalid_argument("add: shape mismatch");
  bool ng = t->node(a.idx).needs_grad || t->node(b.idx).needs_grad;
  auto out = t->push(a.value() + b.value(), ng, {});
  if (ng) {
    int ai = a.idx, bi = b.idx, oi = out.idx;
    t->node(oi).back = [t, ai, bi, oi] {
      if (t->node(ai).needs_grad) t->grad(ai) += t->grad(oi);
      if (t->node(bi).needs_grad) t->grad(bi) += t->grad(oi);
    };
  }
  return out;
}

template <class S>
VarT<S> sub(VarT<S> a, VarT<S> b) {
  detail::check_same_tape(a, b);
  TapeT<S>* t = a.tape;
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw std::invalid_argument("sub: shape mismatch");
  bool ng = t->node(a.idx).needs_grad || t->node(b.idx).needs_grad;
  auto out = t->push(a.value() - b.value(), ng, {});
  if (ng) {
    int ai = a.idx, bi = b.idx, oi = out.idx;
    t->node(oi).back = [t, ai, bi, oi] {
      if (t->node(ai).needs_grad) t->grad(ai) += t->grad(oi);
      if (t->node(bi).needs_grad) t->grad(bi) -= t->grad(oi);
    };
  }
  return out;
}

template <class S>
VarT<S> hadamard(VarT<S> a, VarT<S> b) {
  detail::check_same_tape(a, b);
  TapeT<S>* t = a.tape;
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw std::invalid_argument("hadamard: shape mismatch");
  bool ng = t->node(a.idx).needs_grad || t->node(b.idx).needs_grad;
  auto out = t->push(a.value().cwiseProduct(b.value()), ng, {});
  if (ng) {
    int ai = a.idx, bi = b.idx, oi = out.idx;
    t->node(oi).back = [t, ai, bi, oi] {
      if (t->node(ai).needs_grad)
        t->grad(ai) += t->grad(oi).cwiseProduct(t->val(bi));
      if (t->node(bi).needs_grad)
        t->grad(bi) += t->grad(oi).cwiseProduct(t->val(ai));
    };
  }
  return out;
}

template <class S>
VarT<S> scale(VarT<S> a, S c) {
  TapeT<S>* t = a.tape;
  bool ng = t->node(a.idx).needs_grad;
  auto out = t->push(a.value() * c, ng, {});
  if (ng) {
    int ai = a.idx, oi = out.idx;
    t->node(oi).back = [t, ai, oi, c] { t->grad(ai) += t->grad(oi) * c; };
  }
  return out;
}

template <class S>
VarT<S> matmul(VarT<S> a, VarT<S> b) {
  detail::check_same_tape(a, b);
  TapeT<S>* t = a.tape;
  if (a.value().cols() != b.value().rows())
    throw std::invalid_argument("matmul: inner dimension mismatch");
  bool ng = t->node(a.idx).needs_grad || t->node(b.idx).needs_grad;
  auto out = t->push(a.value() * b.value(), ng, {});
  if (ng) {
    int ai = a.idx, bi = b.idx, oi = out.idx;
    t->node(oi).back = [t, ai, bi, oi] {
      if (t->node(ai).needs_grad)
        t->grad(ai) += t->grad(oi) * t->val(bi).transpose();
      if (t->node(bi).needs_grad)
        t->grad(bi) += t->val(ai).transpose() * t->grad(oi);
    };
  }
  return out;
}

// a * b^T
template <class S>
VarT<S> matmul_nt(VarT<S> a, VarT<S> b) {
  detail::check_same_tape(a, b);
  TapeT<S>* t = a.tape;
  if (a.value().cols() != b.value().cols())
    throw std::invalid_argument("matmul_nt: inner dimension mismatch");
  bool ng = t->node(a.idx).needs_grad || t->node(b.idx).needs_grad;
  auto out = t->push(a.value() * b.value().transpose(), ng, {});
  if (ng) {
    int ai = a.idx, bi = b.idx, oi = out.idx;
    t->node(oi).back = [t, ai, bi, oi] {
      if (t->node(ai).needs_grad) t->grad(ai) += t->grad(oi) * t->val(bi);
      if (t->node(bi).needs_grad)
        t->grad(bi) += t->grad(oi).transpose() * t->val(ai);
    };
  }
  return out;
}

template <class S>
VarT<S> relu(VarT<S> a) {
  TapeT<S>* t = a.tape;
  bool ng = t->node(a.idx).needs_grad;
  auto out = t->push(a.value().cwiseMax(S(0)), ng, {});
  if (ng) {
    int ai = a.idx, oi = out.idx;
    t->node(oi).back = [t, ai, oi] {
      t->grad(ai) += t->grad(oi).cwiseProduct(
          (t->val(ai).array() > S(0)).template cast<S>().matrix());
    };
  }
  return out;
}

template <class S>
VarT<S> exp_elem(VarT<S> a) {
  TapeT<S>* t = a.tape;
  bool ng = t->node(a.idx).needs_grad;
  auto out = t->push(a.value().array().exp().matrix(), ng, {});
  if (ng) {
    int ai = a.idx, oi = out.idx;
    t->node(oi).back = [t, ai, oi] {
      t->grad(ai) += t->grad(oi).cwiseProduct(t->val(oi));
    };
  }
  return out;
}

template <class S>
VarT<S> softmax_rows(VarT<S> a) {
  TapeT<S>* t = a.tape;
  MatT<S> v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    S m = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - m).exp();
    v.row(r) /= v.row(r).sum();
  }
  bool ng = t->node(a.idx).needs_grad;
  auto out = t->push(std::move(v), ng, {});
  if (ng) {
    int ai = a.idx, oi = out.idx;
    t->node(oi).back = [t, ai, oi] {
      const MatT<S>& p = t->val(oi);
      const MatT<S>& g = t->grad(oi);
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        S dot = g.row(r).dot(p.row(r));
        t->grad(ai).row(r) +=
            p.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
      }
    };
  }
  return out;
}

template <class S>
VarT<S> log_softmax_rows(VarT<S> a) {
  TapeT<S>* t = a.tape;
  MatT<S> v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    S m = v.row(r).maxCoeff();
    S lse = std::log((v.row(r).array() - m).exp().sum()) + m;
    v.row(r).array() -= lse;
  }
  bool ng = t->node(a.idx).needs_grad;
  auto out = t->push(std::move(v), ng, {});
  if (ng) {
    int ai = a.idx, oi = out.idx;
    t->node(oi).back = [t, ai, oi] {
      const MatT<S>& ls = t->val(oi);
      const MatT<S>& g = t->grad(oi);
      for (Eigen::Index r = 0; r < ls.rows(); ++r) {
        S gsum = g.row(r).sum();
        t->grad(ai).row(r) +=
            g.row(r) - (ls.row(r).array().exp() * gsum).matrix();
      }
    };
  }
  return out;
}

// Row-wise layer normalization; gain/bias are 1 x d.
template <class S>
VarT<S> layer_norm_rows(VarT<S> x, VarT<S> gain, VarT<S> bias, S eps = S(1e-5)) {
  detail::check_same_tape(x, gain);
  TapeT<S>* t = x.tape;
  const MatT<S>& xv = x.value();
  Eigen::Index n = xv.rows(), d = xv.cols();
  if (gain.value().cols() != d || bias.value().cols() != d)
    throw std::invalid_argument("layer_norm: gain/bias width mismatch");
  MatT<S> xhat(n, d), out(n, d);
  Eigen::Matrix<S, Eigen::Dynamic, 1> inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    S mu = xv.row(r).mean();
    S var = (xv.row(r).array() - mu).square().mean();
    inv_std(r) = S(1) / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mu).matrix() * inv_std(r);
    out.row(r) = xhat.row(r).cwiseProduct(gain.value().row(0)) + bias.value().row(0);
  }
  bool ng = t->node(x.idx).needs_grad || t->node(gain.idx).needs_grad ||
            t->node(bias.idx).needs_grad;
  auto o = t->push(std::move(out), ng, {});
  if (ng) {
    int xi = x.idx, gi = gain.idx, bi = bias.idx, oi = o.idx;
    t->node(oi).back = [t, xi, gi, bi, oi, xhat, inv_std] {
      const MatT<S>& g = t->grad(oi);
      const MatT<S>& gv = t->val(gi);
      Eigen::Index n2 = g.rows();
      if (t->node(gi).needs_grad)
        for (Eigen::Index r = 0; r < n2; ++r)
          t->grad(gi).row(0) += g.row(r).cwiseProduct(xhat.row(r));
      if (t->node(bi).needs_grad)
        for (Eigen::Index r = 0; r < n2; ++r) t->grad(bi).row(0) += g.row(r);
      if (t->node(xi).needs_grad) {
        for (Eigen::Index r = 0; r < n2; ++r) {
          Eigen::Matrix<S, 1, Eigen::Dynamic> dxhat =
              g.row(r).cwiseProduct(gv.row(0));
          S m1 = dxhat.mean();
          S m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
          t->grad(xi).row(r) +=
              ((dxhat.array() - m1 - xhat.row(r).array() * m2) * inv_std(r))
                  .matrix();
        }
      }
    };
  }
  return o;
}

// Inverted dropout. Identity when training is false.
template <class S>
VarT<S> dropout(VarT<S> x, S rate, std::mt19937_64& rng, bool training) {
  if (!training || rate <= S(0)) return x;
  TapeT<S>* t = x.tape;
  const MatT<S>& xv = x.value();
  MatT<S> mask(xv.rows(), xv.cols());
  S keep = S(1) - rate;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    // 53-bit uniform in [0,1); independent of libstdc++ distribution details
    S u = S(std::ldexp(static_cast<double>(rng() >> 11), -53));
    mask(i) = u < keep ? S(1) / keep : S(0);
  }
  bool ng = t->node(x.idx).needs_grad;
  auto out = t->push(xv.cwiseProduct(mask), ng, {});
  if (ng) {
    int xi = x.idx, oi = out.idx;
    t->node(oi).back = [t, xi, oi, mask] {
      t->grad(xi) += t->grad(oi).cwiseProduct(mask);
    };
  }
  return out;
}

// x * W + broadcast bias (bias is 1 x out).
template <class S>
VarT<S> linear(VarT<S> x, VarT<S> W, VarT<S> b) {
  detail::check_same_tape(x, W);
  TapeT<S>* t = x.tape;
  if (x.value().cols() != W.value().rows() || b.value().cols() != W.value().cols())
    throw std::invalid_argument("linear: shape mismatch");
  MatT<S> v = x.value() * W.value();
  v.rowwise() += b.value().row(0);
  bool ng = t->node(x.idx).needs_grad || t->node(W.idx).needs_grad ||
            t->node(b.idx).needs_grad;
  auto out = t->push(std::move(v), ng, {});
  if (ng) {
    int xi = x.idx, wi = W.idx, bi = b.idx, oi = out.idx;
    t->node(oi).back = [t, xi, wi, bi, oi] {
      const MatT<S>& g = t->grad(oi);
      if (t->node(xi).needs_grad) t->grad(xi) += g * t->val(wi).transpose();
      if (t->node(wi).needs_grad) t->grad(wi) += t->val(xi).transpose() * g;
      if (t->node(bi).needs_grad) t->grad(bi).row(0) += g.colwise().sum();
    };
  }
  return out;
}

template <class S>
VarT<S> concat_cols(const std::vector<VarT<S>>& parts) {
  assert(!parts.empty());
  TapeT<S>* t = parts[0].tape;
  Eigen::Index n = parts[0].value().rows(), total = 0;
  bool ng = false;
  for (auto p : parts) {
    if (p.value().rows() != n)
      throw std::invalid_argument("concat_cols: row count mismatch");
    total += p.value().cols();
    ng = ng || t->node(p.idx).needs_grad;
  }
  MatT<S> v(n, total);
  Eigen::Index off = 0;
  std::vector<std::pair<int, Eigen::Index>> spans;
  for (auto p : parts) {
    Eigen::Index c = p.value().cols();
    v.middleCols(off, c) = p.value();
    spans.emplace_back(p.idx, c);
    off += c;
  }
  auto out = t->push(std::move(v), ng, {});
  if (ng) {
    int oi = out.idx;
    t->node(oi).back = [t, oi, spans] {
      Eigen::Index o2 = 0;
      for (auto [idx, c] : spans) {
        if (t->node(idx).needs_grad)
          t->grad(idx) += t->grad(oi).middleCols(o2, c);
        o2 += c;
      }
    };
  }
  return out;
}

template <class S>
VarT<S> slice_cols(VarT<S> x, Eigen::Index start, Eigen::Index count) {
  TapeT<S>* t = x.tape;
  if (start < 0 || start + count > x.value().cols())
    throw std::invalid_argument("slice_cols: out of range");
  bool ng = t->node(x.idx).needs_grad;
  auto out = t->push(x.value().middleCols(start, count), ng, {});
  if (ng) {
    int xi = x.idx, oi = out.idx;
    t->node(oi).back = [t, xi, oi, start, count] {
      t->grad(xi).middleCols(start, count) += t->grad(oi);
    };
  }
  return out;
}

template <class S>
VarT<S> gather_rows(VarT<S> x, std::vector<int> rows) {
  TapeT<S>* t = x.tape;
  MatT<S> v(static_cast<Eigen::Index>(rows.size()), x.value().cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= x.value().rows())
      throw std::invalid_argument("gather_rows: index out of range");
    v.row(static_cast<Eigen::Index>(i)) = x.value().row(rows[i]);
  }
  bool ng = t->node(x.idx).needs_grad;
  auto out = t->push(std::move(v), ng, {});
  if (ng) {
    int xi = x.idx, oi = out.idx;
    t->node(oi).back = [t, xi, oi, rows = std::move(rows)] {
      for (std::size_t i = 0; i < rows.size(); ++i)
        t->grad(xi).row(rows[i]) += t->grad(oi).row(static_cast<Eigen::Index>(i));
    };
  }
  return out;
}

template <class S>
VarT<S> sum_all(VarT<S> x) {
  TapeT<S>* t = x.tape;
  MatT<S> v(1, 1);
  v(0, 0) = x.value().sum();
  bool ng = t->node(x.idx).needs_grad;
  auto out = t->push(std::move(v), ng, {});
  if (ng) {
    int xi = x.idx, oi = out.idx;
    t->node(oi).back = [t, xi, oi] {
      t->grad(xi).array() += t->grad(oi)(0, 0);
    };
  }
  return out;
}

template <class S>
VarT<S> pick(VarT<S> x, Eigen::Index r, Eigen::Index c) {
  TapeT<S>* t = x.tape;
  MatT<S> v(1, 1);
  v(0, 0) = x.value()(r, c);
  bool ng = t->node(x.idx).needs_grad;
  auto out = t->push(std::move(v), ng, {});
  if (ng) {
    int xi = x.idx, oi = out.idx;
    t->node(oi).back = [t, xi, oi, r, c] { t->grad(xi)(r, c) += t->grad(oi)(0, 0); };
  }
  return out;
}

// Elementwise clamp; gradient passes through inside [lo, hi].
template <class S>
VarT<S> clamp(VarT<S> x, S lo, S hi) {
  TapeT<S>* t = x.tape;
  bool ng = t->node(x.idx).needs_grad;
  auto out = t->push(x.value().cwiseMax(lo).cwiseMin(hi), ng, {});
  if (ng) {
    int xi = x.idx, oi = out.idx;
    t->node(oi).back = [t, xi, oi, lo, hi] {
      const MatT<S>& xv = t->val(xi);
      t->grad(xi) += t->grad(oi).cwiseProduct(
          ((xv.array() >= lo) && (xv.array() <= hi)).template cast<S>().matrix());
    };
  }
  return out;
}

// Elementwise minimum; ties route the gradient to the first argument.
template <class S>
VarT<S> vmin(VarT<S> a, VarT<S> b) {
  detail::check_same_tape(a, b);
  TapeT<S>* t = a.tape;
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    throw std::invalid_argument("vmin: shape mismatch");
  bool ng = t->node(a.idx).needs_grad || t->node(b.idx).needs_grad;
  auto out = t->push(a.value().cwiseMin(b.value()), ng, {});
  if (ng) {
    int ai = a.idx, bi = b.idx, oi = out.idx;
    t->node(oi).back = [t, ai, bi, oi] {
      auto a_wins = (t->val(ai).array() <= t->val(bi).array()).template cast<S>();
      if (t->node(ai).needs_grad)
        t->grad(ai) += t->grad(oi).cwiseProduct(a_wins.matrix());
      if (t->node(bi).needs_grad)
        t->grad(bi) += t->grad(oi).cwiseProduct((S(1) - a_wins).matrix());
    };
  }
  return out;
}

using Scalar = double;
using Mat = MatT<Scalar>;
using Tape = TapeT<Scalar>;
using Var = VarT<Scalar>;
using Parameter = ParameterT<Scalar>;

}  // namespace ert::nn
