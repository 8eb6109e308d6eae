// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major tensors with reverse-mode automatic differentiation.
// Minimal op set for transformer training: matmul, elementwise arithmetic,
// gelu, layer norm, masked softmax, cross entropy, row gather/paste and
// column slice/concat. Ops record a backward closure on an explicit Tape;
// Tape::backward replays the records once in reverse.

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "sclm/errors.hpp"
#include "sclm/random.hpp"

namespace sclm {

inline int64_t numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t e : shape) n *= e;
  return n;
}

template <class S>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<S> v;  // values, row-major
  std::vector<S> g;  // gradient accumulator; empty until first needed
  bool requires_grad = false;
  uint64_t tape_id = 0;                // 0 for leaves and constants
  std::function<void()> backprop;      // set only on op outputs

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  bool is_scalar() const { return v.size() == 1; }
  int64_t rank() const { return static_cast<int64_t>(shape.size()); }
  int64_t rows() const { return shape.empty() ? 1 : shape[0]; }
  int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  void ensure_grad() {
    if (g.empty()) g.assign(v.size(), S(0));
  }
  void zero_grad() { std::fill(g.begin(), g.end(), S(0)); }
};

template <class S>
using TensorPtr = std::shared_ptr<Tensor<S>>;

template <class S>
TensorPtr<S> make_tensor(std::vector<int64_t> shape, bool requires_grad = false) {
  auto t = std::make_shared<Tensor<S>>();
  t->shape = std::move(shape);
  t->v.assign(static_cast<size_t>(numel(t->shape)), S(0));
  t->requires_grad = requires_grad;
  return t;
}

template <class S>
TensorPtr<S> make_tensor(std::vector<int64_t> shape, std::vector<S> values,
                         bool requires_grad = false) {
  if (numel(shape) != static_cast<int64_t>(values.size()))
    throw DimensionError("tensor: shape does not match value count");
  auto t = std::make_shared<Tensor<S>>();
  t->shape = std::move(shape);
  t->v = std::move(values);
  t->requires_grad = requires_grad;
  return t;
}

template <class S>
TensorPtr<S> scalar_tensor(S value, bool requires_grad = false) {
  return make_tensor<S>({1}, std::vector<S>{value}, requires_grad);
}

template <class S>
void fill_gaussian(Tensor<S>& t, RandomSource& rng, double stddev) {
  for (auto& x : t.v) x = static_cast<S>(rng.gaussian() * stddev);
}

template <class S>
void fill_uniform(Tensor<S>& t, RandomSource& rng, double lo, double hi) {
  for (auto& x : t.v) x = static_cast<S>(lo + rng.uniform() * (hi - lo));
}

template <class S>
void fill_constant(Tensor<S>& t, S value) {
  std::fill(t.v.begin(), t.v.end(), value);
}

template <class S>
bool all_finite(const Tensor<S>& t) {
  for (S x : t.v)
    if (!std::isfinite(static_cast<double>(x))) return false;
  return true;
}

namespace detail {
#ifndef NDEBUG
template <class S>
inline void check_finite(const Tensor<S>& t, const char* op) {
  if (!all_finite(t)) throw Error(std::string(op) + ": non-finite value produced");
}
#else
template <class S>
inline void check_finite(const Tensor<S>&, const char*) {}
#endif
}  // namespace detail

// Ordered record of op outputs. Ops append in execution order, so the record
// is topological by construction; backward walks it once in reverse.
template <class S>
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {
    static uint64_t next_id = 1;
    id_ = next_id++;
  }

  bool grad_enabled() const { return grad_enabled_; }
  uint64_t id() const { return id_; }
  size_t size() const { return nodes_.size(); }

  TensorPtr<S> record(TensorPtr<S> t) {
    if (t->requires_grad) {
      t->tape_id = id_;
      nodes_.push_back(t);
    }
    return t;
  }

  // Seeds d(out)/d(out) = 1 and accumulates into every requires_grad leaf.
  // Intermediate grads are reset first, so repeated calls add another full
  // gradient into the leaves.
  void backward(const TensorPtr<S>& out) {
    if (!out->is_scalar()) throw ContractError("backward: output must be scalar");
    if (out->tape_id != id_)
      throw ContractError("backward: output was not produced on this tape");
    for (auto& n : nodes_) n->zero_grad();
    out->ensure_grad();
    out->g[0] = S(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Tensor<S>& n = **it;
      if (n.backprop && !n.g.empty()) n.backprop();
    }
  }

  void clear() { nodes_.clear(); }

 private:
  bool grad_enabled_;
  uint64_t id_ = 0;
  std::vector<TensorPtr<S>> nodes_;
};

namespace detail {

template <class S>
using EMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using Map = Eigen::Map<EMat<S>>;
template <class S>
using CMap = Eigen::Map<const EMat<S>>;

template <class S>
TensorPtr<S> op_output(Tape<S>& tape, std::vector<int64_t> shape,
                       bool any_input_grad) {
  auto out = make_tensor<S>(std::move(shape));
  out->requires_grad = tape.grad_enabled() && any_input_grad;
  return out;
}

}  // namespace detail

template <class S>
TensorPtr<S> matmul(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
  if (a->rank() != 2 || b->rank() != 2 || a->shape[1] != b->shape[0])
    throw DimensionError("matmul: inner extents do not match");
  const int64_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
  auto out = detail::op_output(tape, {m, n}, a->requires_grad || b->requires_grad);
  detail::CMap<S> ma(a->v.data(), m, k), mb(b->v.data(), k, n);
  detail::Map<S>(out->v.data(), m, n).noalias() = ma * mb;
  detail::check_finite(*out, "matmul");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), a, b, m, k, n]() {
      detail::CMap<S> go(self->g.data(), m, n);
      if (a->requires_grad) {
        a->ensure_grad();
        detail::CMap<S> mb(b->v.data(), k, n);
        detail::Map<S>(a->g.data(), m, k).noalias() += go * mb.transpose();
      }
      if (b->requires_grad) {
        b->ensure_grad();
        detail::CMap<S> ma(a->v.data(), m, k);
        detail::Map<S>(b->g.data(), k, n).noalias() += ma.transpose() * go;
      }
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> transpose(Tape<S>& tape, const TensorPtr<S>& x) {
  if (x->rank() != 2) throw DimensionError("transpose: rank-2 tensor required");
  const int64_t r = x->shape[0], c = x->shape[1];
  auto out = detail::op_output(tape, {c, r}, x->requires_grad);
  detail::Map<S>(out->v.data(), c, r) = detail::CMap<S>(x->v.data(), r, c).transpose();
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x, r, c]() {
      x->ensure_grad();
      detail::Map<S>(x->g.data(), r, c) +=
          detail::CMap<S>(self->g.data(), c, r).transpose();
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> add(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
  if (a->shape != b->shape) throw DimensionError("add: shape mismatch");
  auto out = detail::op_output(tape, a->shape, a->requires_grad || b->requires_grad);
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = a->v[i] + b->v[i];
  detail::check_finite(*out, "add");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), a, b]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (size_t i = 0; i < self->g.size(); ++i) a->g[i] += self->g[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (size_t i = 0; i < self->g.size(); ++i) b->g[i] += self->g[i];
      }
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> mul(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
  if (a->shape != b->shape) throw DimensionError("mul: shape mismatch");
  auto out = detail::op_output(tape, a->shape, a->requires_grad || b->requires_grad);
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = a->v[i] * b->v[i];
  detail::check_finite(*out, "mul");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), a, b]() {
      if (a->requires_grad) {
        a->ensure_grad();
        for (size_t i = 0; i < self->g.size(); ++i) a->g[i] += self->g[i] * b->v[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (size_t i = 0; i < self->g.size(); ++i) b->g[i] += self->g[i] * a->v[i];
      }
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> scale(Tape<S>& tape, const TensorPtr<S>& x, S c) {
  auto out = detail::op_output(tape, x->shape, x->requires_grad);
  for (size_t i = 0; i < out->v.size(); ++i) out->v[i] = x->v[i] * c;
  detail::check_finite(*out, "scale");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x, c]() {
      x->ensure_grad();
      for (size_t i = 0; i < self->g.size(); ++i) x->g[i] += self->g[i] * c;
    };
  }
  return tape.record(out);
}

// x[r x c] + bias[c], broadcast over rows.
template <class S>
TensorPtr<S> add_bias(Tape<S>& tape, const TensorPtr<S>& x, const TensorPtr<S>& b) {
  if (x->rank() != 2 || b->size() != x->shape[1])
    throw DimensionError("add_bias: bias width must equal column count");
  const int64_t r = x->shape[0], c = x->shape[1];
  auto out = detail::op_output(tape, x->shape, x->requires_grad || b->requires_grad);
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < c; ++j)
      out->v[i * c + j] = x->v[i * c + j] + b->v[j];
  detail::check_finite(*out, "add_bias");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x, b, r, c]() {
      if (x->requires_grad) {
        x->ensure_grad();
        for (size_t i = 0; i < self->g.size(); ++i) x->g[i] += self->g[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (int64_t i = 0; i < r; ++i)
          for (int64_t j = 0; j < c; ++j) b->g[j] += self->g[i * c + j];
      }
    };
  }
  return tape.record(out);
}

// Exact gelu, 0.5 * x * (1 + erf(x / sqrt(2))).
template <class S>
TensorPtr<S> gelu(Tape<S>& tape, const TensorPtr<S>& x) {
  auto out = detail::op_output(tape, x->shape, x->requires_grad);
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  for (size_t i = 0; i < out->v.size(); ++i) {
    const double xi = static_cast<double>(x->v[i]);
    out->v[i] = static_cast<S>(0.5 * xi * (1.0 + std::erf(xi * inv_sqrt2)));
  }
  detail::check_finite(*out, "gelu");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x]() {
      constexpr double inv_sqrt2 = 0.7071067811865475244;
      constexpr double inv_sqrt2pi = 0.3989422804014326779;
      x->ensure_grad();
      for (size_t i = 0; i < self->g.size(); ++i) {
        const double xi = static_cast<double>(x->v[i]);
        const double d = 0.5 * (1.0 + std::erf(xi * inv_sqrt2)) +
                         xi * inv_sqrt2pi * std::exp(-0.5 * xi * xi);
        x->g[i] += self->g[i] * static_cast<S>(d);
      }
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> layer_norm(Tape<S>& tape, const TensorPtr<S>& x,
                        const TensorPtr<S>& gain, const TensorPtr<S>& bias,
                        double eps) {
  if (x->rank() != 2) throw DimensionError("layer_norm: rank-2 tensor required");
  const int64_t r = x->shape[0], c = x->shape[1];
  if (gain->size() != c || bias->size() != c)
    throw DimensionError("layer_norm: gain/bias width must equal column count");
  auto out = detail::op_output(
      tape, x->shape, x->requires_grad || gain->requires_grad || bias->requires_grad);
  auto xhat = std::make_shared<std::vector<S>>(x->v.size());
  auto rstd = std::make_shared<std::vector<S>>(static_cast<size_t>(r));
  for (int64_t i = 0; i < r; ++i) {
    const S* row = x->v.data() + i * c;
    double mean = 0.0;
    for (int64_t j = 0; j < c; ++j) mean += static_cast<double>(row[j]);
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double d = static_cast<double>(row[j]) - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[static_cast<size_t>(i)] = static_cast<S>(rs);
    for (int64_t j = 0; j < c; ++j) {
      const S xh = static_cast<S>((static_cast<double>(row[j]) - mean) * rs);
      (*xhat)[i * c + j] = xh;
      out->v[i * c + j] = xh * gain->v[j] + bias->v[j];
    }
  }
  detail::check_finite(*out, "layer_norm");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x, gain, bias, xhat, rstd, r, c]() {
      if (gain->requires_grad) gain->ensure_grad();
      if (bias->requires_grad) bias->ensure_grad();
      if (x->requires_grad) x->ensure_grad();
      for (int64_t i = 0; i < r; ++i) {
        const S* go = self->g.data() + i * c;
        const S* xh = xhat->data() + i * c;
        if (gain->requires_grad)
          for (int64_t j = 0; j < c; ++j) gain->g[j] += go[j] * xh[j];
        if (bias->requires_grad)
          for (int64_t j = 0; j < c; ++j) bias->g[j] += go[j];
        if (x->requires_grad) {
          double mean_a = 0.0, mean_ax = 0.0;
          for (int64_t j = 0; j < c; ++j) {
            const double aj = static_cast<double>(go[j]) * static_cast<double>(gain->v[j]);
            mean_a += aj;
            mean_ax += aj * static_cast<double>(xh[j]);
          }
          mean_a /= static_cast<double>(c);
          mean_ax /= static_cast<double>(c);
          const double rs = static_cast<double>((*rstd)[static_cast<size_t>(i)]);
          for (int64_t j = 0; j < c; ++j) {
            const double aj = static_cast<double>(go[j]) * static_cast<double>(gain->v[j]);
            x->g[i * c + j] += static_cast<S>(
                rs * (aj - mean_a - static_cast<double>(xh[j]) * mean_ax));
          }
        }
      }
    };
  }
  return tape.record(out);
}

// Softmax over the last dimension with hard masking: disallowed entries get
// probability exactly zero. `allow` is row-major, same element count as
// `scores`. A row with no allowed key is a contract violation.
template <class S>
TensorPtr<S> masked_softmax(Tape<S>& tape, const TensorPtr<S>& scores,
                            const std::vector<uint8_t>& allow) {
  if (scores->rank() != 2) throw DimensionError("masked_softmax: rank-2 tensor required");
  if (allow.size() != scores->v.size())
    throw DimensionError("masked_softmax: mask size mismatch");
  const int64_t r = scores->shape[0], c = scores->shape[1];
  auto out = detail::op_output(tape, scores->shape, scores->requires_grad);
  for (int64_t i = 0; i < r; ++i) {
    const S* row = scores->v.data() + i * c;
    const uint8_t* arow = allow.data() + i * c;
    double m = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < c; ++j)
      if (arow[j]) m = std::max(m, static_cast<double>(row[j]));
    if (!std::isfinite(m))
      throw ContractError("masked_softmax: fully masked row " + std::to_string(i));
    double denom = 0.0;
    for (int64_t j = 0; j < c; ++j)
      if (arow[j]) denom += std::exp(static_cast<double>(row[j]) - m);
    for (int64_t j = 0; j < c; ++j)
      out->v[i * c + j] =
          arow[j] ? static_cast<S>(std::exp(static_cast<double>(row[j]) - m) / denom)
                  : S(0);
  }
  detail::check_finite(*out, "masked_softmax");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), scores, r, c]() {
      scores->ensure_grad();
      for (int64_t i = 0; i < r; ++i) {
        const S* p = self->v.data() + i * c;
        const S* go = self->g.data() + i * c;
        double dot = 0.0;
        for (int64_t j = 0; j < c; ++j)
          dot += static_cast<double>(go[j]) * static_cast<double>(p[j]);
        for (int64_t j = 0; j < c; ++j)
          scores->g[i * c + j] += static_cast<S>(
              static_cast<double>(p[j]) * (static_cast<double>(go[j]) - dot));
      }
    };
  }
  return tape.record(out);
}

// Mean of -log p(target) over the masked-in rows of logits[T x V].
// Stable log-sum-exp; probabilities for backward are kept from the forward
// pass. All arithmetic stays in S so two implementations that follow the
// same evaluation order agree bitwise.
template <class S>
TensorPtr<S> cross_entropy(Tape<S>& tape, const TensorPtr<S>& logits,
                           const std::vector<int32_t>& targets,
                           const std::vector<uint8_t>& target_mask) {
  if (logits->rank() != 2) throw DimensionError("cross_entropy: rank-2 logits required");
  const int64_t t_count = logits->shape[0], v_count = logits->shape[1];
  if (static_cast<int64_t>(targets.size()) != t_count ||
      static_cast<int64_t>(target_mask.size()) != t_count)
    throw DimensionError("cross_entropy: targets/mask length mismatch");
  int64_t active = 0;
  for (uint8_t m : target_mask)
    if (m) ++active;
  if (active == 0) throw ContractError("cross_entropy: all positions masked out");
  for (int64_t t = 0; t < t_count; ++t)
    if (target_mask[t] && (targets[t] < 0 || targets[t] >= v_count))
      throw ContractError("cross_entropy: target id out of vocabulary");

  auto out = detail::op_output(tape, {1}, logits->requires_grad);
  S total = S(0);
  for (int64_t t = 0; t < t_count; ++t) {
    if (!target_mask[t]) continue;
    const S* row = logits->v.data() + t * v_count;
    S m = row[0];
    for (int64_t j = 1; j < v_count; ++j) m = std::max(m, row[j]);
    S sum = S(0);
    for (int64_t j = 0; j < v_count; ++j) sum += std::exp(row[j] - m);
    const S lse = m + std::log(sum);
    total += lse - row[targets[t]];
  }
  out->v[0] = total / static_cast<S>(active);
  detail::check_finite(*out, "cross_entropy");
  if (out->requires_grad) {
    out->backprop = [self = out.get(), logits, targets, target_mask, t_count,
                     v_count, active]() {
      logits->ensure_grad();
      const S gscale = self->g[0] / static_cast<S>(active);
      for (int64_t t = 0; t < t_count; ++t) {
        if (!target_mask[t]) continue;
        const S* row = logits->v.data() + t * v_count;
        S* grow = logits->g.data() + t * v_count;
        S m = row[0];
        for (int64_t j = 1; j < v_count; ++j) m = std::max(m, row[j]);
        S sum = S(0);
        for (int64_t j = 0; j < v_count; ++j) sum += std::exp(row[j] - m);
        for (int64_t j = 0; j < v_count; ++j) {
          S p = std::exp(row[j] - m) / sum;
          if (j == targets[t]) p -= S(1);
          grow[j] += gscale * p;
        }
      }
    };
  }
  return tape.record(out);
}

// Gather rows by index; duplicates allowed. Backward scatter-adds, which is
// what makes this double as embedding_lookup.
template <class S>
TensorPtr<S> gather_rows(Tape<S>& tape, const TensorPtr<S>& x,
                         const std::vector<int64_t>& rows) {
  if (x->rank() != 2) throw DimensionError("gather_rows: rank-2 tensor required");
  const int64_t c = x->shape[1];
  for (int64_t r : rows)
    if (r < 0 || r >= x->shape[0])
      throw ContractError("gather_rows: row index out of range");
  auto out = detail::op_output(tape, {static_cast<int64_t>(rows.size()), c},
                               x->requires_grad);
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy_n(x->v.data() + rows[i] * c, c, out->v.data() + static_cast<int64_t>(i) * c);
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x, rows, c]() {
      x->ensure_grad();
      for (size_t i = 0; i < rows.size(); ++i) {
        const S* go = self->g.data() + static_cast<int64_t>(i) * c;
        S* gx = x->g.data() + rows[i] * c;
        for (int64_t j = 0; j < c; ++j) gx[j] += go[j];
      }
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> slice_cols(Tape<S>& tape, const TensorPtr<S>& x, int64_t c0, int64_t c1) {
  if (x->rank() != 2 || c0 < 0 || c1 > x->shape[1] || c0 >= c1)
    throw DimensionError("slice_cols: bad column range");
  const int64_t r = x->shape[0], c = x->shape[1], w = c1 - c0;
  auto out = detail::op_output(tape, {r, w}, x->requires_grad);
  for (int64_t i = 0; i < r; ++i)
    std::copy_n(x->v.data() + i * c + c0, w, out->v.data() + i * w);
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x, r, c, c0, w]() {
      x->ensure_grad();
      for (int64_t i = 0; i < r; ++i)
        for (int64_t j = 0; j < w; ++j) x->g[i * c + c0 + j] += self->g[i * w + j];
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> concat_cols(Tape<S>& tape, const std::vector<TensorPtr<S>>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const int64_t r = parts[0]->shape[0];
  int64_t total = 0;
  bool any_grad = false;
  for (const auto& p : parts) {
    if (p->rank() != 2 || p->shape[0] != r)
      throw DimensionError("concat_cols: row count mismatch");
    total += p->shape[1];
    any_grad = any_grad || p->requires_grad;
  }
  auto out = detail::op_output(tape, {r, total}, any_grad);
  int64_t off = 0;
  for (const auto& p : parts) {
    const int64_t w = p->shape[1];
    for (int64_t i = 0; i < r; ++i)
      std::copy_n(p->v.data() + i * w, w, out->v.data() + i * total + off);
    off += w;
  }
  if (out->requires_grad) {
    out->backprop = [self = out.get(), parts, r, total]() {
      int64_t off = 0;
      for (const auto& p : parts) {
        const int64_t w = p->shape[1];
        if (p->requires_grad) {
          p->ensure_grad();
          for (int64_t i = 0; i < r; ++i)
            for (int64_t j = 0; j < w; ++j) p->g[i * w + j] += self->g[i * total + off + j];
        }
        off += w;
      }
    };
  }
  return tape.record(out);
}

// Copy of `base` with rows [row0, row0+patch.rows) replaced by `patch`.
// The replaced base rows receive zero gradient.
template <class S>
TensorPtr<S> paste_rows(Tape<S>& tape, const TensorPtr<S>& base,
                        const TensorPtr<S>& patch, int64_t row0) {
  if (base->rank() != 2 || patch->rank() != 2 || base->shape[1] != patch->shape[1])
    throw DimensionError("paste_rows: column widths differ");
  const int64_t r = base->shape[0], c = base->shape[1], p = patch->shape[0];
  if (row0 < 0 || row0 + p > r) throw DimensionError("paste_rows: rows out of range");
  auto out = detail::op_output(tape, base->shape,
                               base->requires_grad || patch->requires_grad);
  out->v = base->v;
  std::copy_n(patch->v.data(), p * c, out->v.data() + row0 * c);
  if (out->requires_grad) {
    out->backprop = [self = out.get(), base, patch, row0, c, p, r]() {
      if (base->requires_grad) {
        base->ensure_grad();
        for (int64_t i = 0; i < r; ++i) {
          if (i >= row0 && i < row0 + p) continue;
          for (int64_t j = 0; j < c; ++j) base->g[i * c + j] += self->g[i * c + j];
        }
      }
      if (patch->requires_grad) {
        patch->ensure_grad();
        for (int64_t i = 0; i < p * c; ++i) patch->g[i] += self->g[row0 * c + i];
      }
    };
  }
  return tape.record(out);
}

template <class S>
TensorPtr<S> sum(Tape<S>& tape, const TensorPtr<S>& x) {
  auto out = detail::op_output(tape, {1}, x->requires_grad);
  S total = S(0);
  for (S xi : x->v) total += xi;
  out->v[0] = total;
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x]() {
      x->ensure_grad();
      for (auto& gi : x->g) gi += self->g[0];
    };
  }
  return tape.record(out);
}

// Inverted dropout; identity when rate == 0.
template <class S>
TensorPtr<S> dropout(Tape<S>& tape, const TensorPtr<S>& x, double rate,
                     RandomSource& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ContractError("dropout: rate must be < 1");
  auto out = detail::op_output(tape, x->shape, x->requires_grad);
  auto keep = std::make_shared<std::vector<S>>(x->v.size());
  const S scale_up = static_cast<S>(1.0 / (1.0 - rate));
  for (size_t i = 0; i < x->v.size(); ++i) {
    const S f = rng.bernoulli(rate) ? S(0) : scale_up;
    (*keep)[i] = f;
    out->v[i] = x->v[i] * f;
  }
  if (out->requires_grad) {
    out->backprop = [self = out.get(), x, keep]() {
      x->ensure_grad();
      for (size_t i = 0; i < self->g.size(); ++i) x->g[i] += self->g[i] * (*keep)[i];
    };
  }
  return tape.record(out);
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace sclm
