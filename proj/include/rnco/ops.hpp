#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "rnco/kernels.hpp"
#include "rnco/tensor.hpp"

// Differentiable building blocks. Every op computes its forward result and,
// when a Tape is supplied and some input requires grad, records a closure that
// accumulates into the inputs' gradient buffers. Passing tape == nullptr runs
// pure inference with no graph retained.

namespace rnco {

template <typename Real>
bool all_finite(const Tensor<Real>& t) {
  for (Real v : *t.data) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

namespace detail {

template <typename Real>
Tensor<Real> make_output(std::vector<int> shape, bool needs_grad) {
  auto t = Tensor<Real>::zeros(std::move(shape));
  if (needs_grad) {
    t.ensure_grad();
    t.requires_grad = true;
  }
  return t;
}

template <typename Real>
bool taped(const Tape<Real>* tape, std::initializer_list<const Tensor<Real>*> inputs) {
  if (!tape) return false;
  for (const auto* t : inputs) {
    if (t->requires_grad) return true;
  }
  return false;
}

}  // namespace detail

// y[n x b] = x[n x a] * w[b x a]^T + bias[b]
template <typename Real>
Tensor<Real> linear(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& bias,
                    Tape<std::type_identity_t<Real>>* tape) {
  const int n = x.rows(), a = x.cols(), b = w.rows();
  if (w.cols() != a || bias.size() != b) throw ShapeError("linear: shapes do not conform");
  const bool rec = detail::taped(tape, {&x, &w, &bias});
  auto y = detail::make_output<Real>({n, b}, rec);
  kern::matmul_nt(x.ptr(), w.ptr(), y.ptr(), n, a, b, false);
  Real* yp = y.ptr();
  const Real* bp = bias.ptr();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < b; ++j) yp[static_cast<std::size_t>(i) * b + j] += bp[j];
  }
  if (rec) {
    tape->record([x, w, bias, y, n, a, b]() {
      const Real* dy = y.gptr();
      if (x.requires_grad) kern::matmul_nn(dy, w.ptr(), x.gptr(), n, b, a, true);
      if (w.requires_grad) kern::matmul_tn(dy, x.ptr(), w.gptr(), n, b, a, true);
      if (bias.requires_grad) {
        Real* db = bias.gptr();
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < b; ++j) db[j] += dy[static_cast<std::size_t>(i) * b + j];
        }
      }
    });
  }
  return y;
}

// y_ij = gain_j * x_ij / sqrt(mean_j(x_ij^2) + eps)
template <typename Real>
Tensor<Real> rmsnorm(const Tensor<Real>& x, const Tensor<Real>& gain, std::type_identity_t<Real> eps, Tape<std::type_identity_t<Real>>* tape) {
  const int n = x.rows(), d = x.cols();
  if (gain.size() != d) throw ShapeError("rmsnorm: gain length != row width");
  if (d < 1 || eps <= Real(0)) throw ShapeError("rmsnorm: need d >= 1 and eps > 0");
  const bool rec = detail::taped(tape, {&x, &gain});
  auto y = detail::make_output<Real>({n, d}, rec);
  auto rms = std::make_shared<std::vector<Real>>(n);
  const Real* xp = x.ptr();
  const Real* gp = gain.ptr();
  Real* yp = y.ptr();
  for (int i = 0; i < n; ++i) {
    const Real* xi = xp + static_cast<std::size_t>(i) * d;
    Real ss = 0;
    for (int j = 0; j < d; ++j) ss += xi[j] * xi[j];
    const Real r = std::sqrt(ss / d + eps);
    (*rms)[i] = r;
    Real* yi = yp + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) yi[j] = gp[j] * xi[j] / r;
  }
  if (rec) {
    tape->record([x, gain, y, rms, n, d]() {
      const Real* dy = y.gptr();
      const Real* xp2 = x.ptr();
      const Real* gp2 = gain.ptr();
      for (int i = 0; i < n; ++i) {
        const Real* dyi = dy + static_cast<std::size_t>(i) * d;
        const Real* xi = xp2 + static_cast<std::size_t>(i) * d;
        const Real r = (*rms)[i];
        if (x.requires_grad) {
          Real s = 0;
          for (int j = 0; j < d; ++j) s += dyi[j] * gp2[j] * xi[j];
          Real* dxi = x.gptr() + static_cast<std::size_t>(i) * d;
          const Real c = s / (d * r * r * r);
          for (int j = 0; j < d; ++j) dxi[j] += dyi[j] * gp2[j] / r - xi[j] * c;
        }
        if (gain.requires_grad) {
          Real* dg = gain.gptr();
          for (int j = 0; j < d; ++j) dg[j] += dyi[j] * xi[j] / r;
        }
      }
    });
  }
  return y;
}

template <typename Real>
Tensor<Real> relu(const Tensor<Real>& x, Tape<std::type_identity_t<Real>>* tape) {
  const bool rec = detail::taped(tape, {&x});
  auto y = detail::make_output<Real>(x.shape, rec);
  const Real* xp = x.ptr();
  Real* yp = y.ptr();
  const int n = x.size();
  for (int i = 0; i < n; ++i) yp[i] = xp[i] > Real(0) ? xp[i] : Real(0);
  if (rec) {
    tape->record([x, y, n]() {
      if (!x.requires_grad) return;
      const Real* dy = y.gptr();
      const Real* xp2 = x.ptr();
      Real* dx = x.gptr();
      for (int i = 0; i < n; ++i) {
        if (xp2[i] > Real(0)) dx[i] += dy[i];
      }
    });
  }
  return y;
}

template <typename Real>
Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b, Tape<std::type_identity_t<Real>>* tape) {
  if (!a.same_shape(b)) throw ShapeError("add: shape mismatch");
  const bool rec = detail::taped(tape, {&a, &b});
  auto y = detail::make_output<Real>(a.shape, rec);
  const int n = a.size();
  for (int i = 0; i < n; ++i) y.ptr()[i] = a.ptr()[i] + b.ptr()[i];
  if (rec) {
    tape->record([a, b, y, n]() {
      const Real* dy = y.gptr();
      if (a.requires_grad) {
        Real* da = a.gptr();
        for (int i = 0; i < n; ++i) da[i] += dy[i];
      }
      if (b.requires_grad) {
        Real* db = b.gptr();
        for (int i = 0; i < n; ++i) db[i] += dy[i];
      }
    });
  }
  return y;
}

// y = h + alpha * branch, with a learnable scalar alpha (ReZero residual)
template <typename Real>
Tensor<Real> rezero_add(const Tensor<Real>& h, const Tensor<Real>& branch,
                        const Tensor<Real>& alpha, Tape<std::type_identity_t<Real>>* tape) {
  if (!h.same_shape(branch)) throw ShapeError("rezero_add: shape mismatch");
  if (alpha.size() != 1) throw ShapeError("rezero_add: alpha must be a scalar");
  const bool rec = detail::taped(tape, {&h, &branch, &alpha});
  auto y = detail::make_output<Real>(h.shape, rec);
  const Real al = alpha.item();
  const int n = h.size();
  for (int i = 0; i < n; ++i) y.ptr()[i] = h.ptr()[i] + al * branch.ptr()[i];
  if (rec) {
    tape->record([h, branch, alpha, y, al, n]() {
      const Real* dy = y.gptr();
      if (h.requires_grad) {
        Real* dh = h.gptr();
        for (int i = 0; i < n; ++i) dh[i] += dy[i];
      }
      if (branch.requires_grad) {
        Real* db = branch.gptr();
        for (int i = 0; i < n; ++i) db[i] += al * dy[i];
      }
      if (alpha.requires_grad) {
        Real acc = 0;
        for (int i = 0; i < n; ++i) acc += dy[i] * branch.ptr()[i];
        alpha.gptr()[0] += acc;
      }
    });
  }
  return y;
}

template <typename Real>
Tensor<Real> scale(const Tensor<Real>& x, std::type_identity_t<Real> c, Tape<std::type_identity_t<Real>>* tape) {
  const bool rec = detail::taped(tape, {&x});
  auto y = detail::make_output<Real>(x.shape, rec);
  const int n = x.size();
  for (int i = 0; i < n; ++i) y.ptr()[i] = c * x.ptr()[i];
  if (rec) {
    tape->record([x, y, c, n]() {
      if (!x.requires_grad) return;
      Real* dx = x.gptr();
      const Real* dy = y.gptr();
      for (int i = 0; i < n; ++i) dx[i] += c * dy[i];
    });
  }
  return y;
}

// y[n x (p+q)] = [a | b]
template <typename Real>
Tensor<Real> concat_cols(const Tensor<Real>& a, const Tensor<Real>& b, Tape<std::type_identity_t<Real>>* tape) {
  const int n = a.rows(), p = a.cols(), q = b.cols();
  if (b.rows() != n) throw ShapeError("concat_cols: row count mismatch");
  const bool rec = detail::taped(tape, {&a, &b});
  auto y = detail::make_output<Real>({n, p + q}, rec);
  for (int i = 0; i < n; ++i) {
    Real* yi = y.ptr() + static_cast<std::size_t>(i) * (p + q);
    const Real* ai = a.ptr() + static_cast<std::size_t>(i) * p;
    const Real* bi = b.ptr() + static_cast<std::size_t>(i) * q;
    std::copy(ai, ai + p, yi);
    std::copy(bi, bi + q, yi + p);
  }
  if (rec) {
    tape->record([a, b, y, n, p, q]() {
      const Real* dy = y.gptr();
      for (int i = 0; i < n; ++i) {
        const Real* dyi = dy + static_cast<std::size_t>(i) * (p + q);
        if (a.requires_grad) {
          Real* dai = a.gptr() + static_cast<std::size_t>(i) * p;
          for (int j = 0; j < p; ++j) dai[j] += dyi[j];
        }
        if (b.requires_grad) {
          Real* dbi = b.gptr() + static_cast<std::size_t>(i) * q;
          for (int j = 0; j < q; ++j) dbi[j] += dyi[p + j];
        }
      }
    });
  }
  return y;
}

// y[i] = x[idx[i]] (row gather; idx entries must be valid rows of x)
template <typename Real>
Tensor<Real> gather_rows(const Tensor<Real>& x, const std::vector<int>& idx, Tape<std::type_identity_t<Real>>* tape) {
  const int n = x.rows(), d = x.cols();
  for (int r : idx) {
    if (r < 0 || r >= n) throw ShapeError("gather_rows: row index out of range");
  }
  const bool rec = detail::taped(tape, {&x});
  auto y = detail::make_output<Real>({static_cast<int>(idx.size()), d}, rec);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Real* xi = x.ptr() + static_cast<std::size_t>(idx[i]) * d;
    std::copy(xi, xi + d, y.ptr() + i * d);
  }
  if (rec) {
    tape->record([x, y, idx, d]() {
      if (!x.requires_grad) return;
      const Real* dy = y.gptr();
      Real* dx = x.gptr();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        Real* dxi = dx + static_cast<std::size_t>(idx[i]) * d;
        for (int j = 0; j < d; ++j) dxi[j] += dy[i * d + j];
      }
    });
  }
  return y;
}

// y = x with v added to one row
template <typename Real>
Tensor<Real> add_to_row(const Tensor<Real>& x, int row, const Tensor<Real>& v, Tape<std::type_identity_t<Real>>* tape) {
  const int n = x.rows(), d = x.cols();
  if (row < 0 || row >= n) throw ShapeError("add_to_row: row out of range");
  if (v.size() != d) throw ShapeError("add_to_row: vector length != row width");
  const bool rec = detail::taped(tape, {&x, &v});
  auto y = detail::make_output<Real>({n, d}, rec);
  std::copy(x.ptr(), x.ptr() + x.size(), y.ptr());
  Real* yr = y.ptr() + static_cast<std::size_t>(row) * d;
  for (int j = 0; j < d; ++j) yr[j] += v.ptr()[j];
  if (rec) {
    tape->record([x, v, y, row, d]() {
      const Real* dy = y.gptr();
      if (x.requires_grad) {
        Real* dx = x.gptr();
        const int total = x.size();
        for (int i = 0; i < total; ++i) dx[i] += dy[i];
      }
      if (v.requires_grad) {
        Real* dv = v.gptr();
        const Real* dyr = dy + static_cast<std::size_t>(row) * d;
        for (int j = 0; j < d; ++j) dv[j] += dyr[j];
      }
    });
  }
  return y;
}

// y[j] = flat(x)[idx[j]]
template <typename Real>
Tensor<Real> gather_elems(const Tensor<Real>& x, const std::vector<int>& idx, Tape<std::type_identity_t<Real>>* tape) {
  const int total = x.size();
  for (int i : idx) {
    if (i < 0 || i >= total) throw ShapeError("gather_elems: index out of range");
  }
  const bool rec = detail::taped(tape, {&x});
  auto y = detail::make_output<Real>({static_cast<int>(idx.size())}, rec);
  for (std::size_t j = 0; j < idx.size(); ++j) y.ptr()[j] = x.ptr()[idx[j]];
  if (rec) {
    tape->record([x, y, idx]() {
      if (!x.requires_grad) return;
      Real* dx = x.gptr();
      const Real* dy = y.gptr();
      for (std::size_t j = 0; j < idx.size(); ++j) dx[idx[j]] += dy[j];
    });
  }
  return y;
}

// y = sum_i x_i^2 (scalar)
template <typename Real>
Tensor<Real> sum_squares(const Tensor<Real>& x, Tape<std::type_identity_t<Real>>* tape) {
  const bool rec = detail::taped(tape, {&x});
  auto y = detail::make_output<Real>({1}, rec);
  Real acc = 0;
  const int n = x.size();
  for (int i = 0; i < n; ++i) acc += x.ptr()[i] * x.ptr()[i];
  y.ptr()[0] = acc;
  if (rec) {
    tape->record([x, y, n]() {
      if (!x.requires_grad) return;
      const Real d = y.gptr()[0];
      Real* dx = x.gptr();
      for (int i = 0; i < n; ++i) dx[i] += Real(2) * x.ptr()[i] * d;
    });
  }
  return y;
}

// Masked softmax over the feasible subset. Masked entries are exactly zero;
// the normalization runs over feasible entries only.
template <typename Real>
std::vector<Real> masked_softmax(const std::vector<Real>& logits, const std::vector<std::uint8_t>& mask) {
  if (logits.size() != mask.size()) throw ShapeError("masked_softmax: mask length mismatch");
  Real mx = 0;
  bool any = false;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] && (!any || logits[i] > mx)) {
      mx = logits[i];
      any = true;
    }
  }
  if (!any) throw FeasibilityError("masked_softmax: no feasible action");
  std::vector<Real> p(logits.size(), Real(0));
  Real sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) {
      p[i] = std::exp(logits[i] - mx);
      sum += p[i];
    }
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) p[i] /= sum;
  }
  return p;
}

// loss = -log(masked_softmax(logits)[target])
template <typename Real>
Tensor<Real> cross_entropy(const Tensor<Real>& logits, const std::vector<std::uint8_t>& mask,
                           int target, Tape<std::type_identity_t<Real>>* tape) {
  const int n = logits.size();
  if (static_cast<int>(mask.size()) != n) throw ShapeError("cross_entropy: mask length mismatch");
  if (target < 0 || target >= n || !mask[target]) {
    throw ContractError("cross_entropy: target action is infeasible");
  }
  std::vector<Real> lv(logits.ptr(), logits.ptr() + n);
  auto probs = std::make_shared<std::vector<Real>>(masked_softmax(lv, mask));
  const bool rec = detail::taped(tape, {&logits});
  auto y = detail::make_output<Real>({1}, rec);
  y.ptr()[0] = -std::log((*probs)[target]);
  if (rec) {
    tape->record([logits, y, probs, mask, target, n]() {
      if (!logits.requires_grad) return;
      const Real d = y.gptr()[0];
      Real* dl = logits.gptr();
      for (int i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        Real g = (*probs)[i];
        if (i == target) g -= Real(1);
        dl[i] += g * d;
      }
    });
  }
  return y;
}

// Scaled dot-product attention over heads: q, k, v are [n x d] with d split
// into n_heads contiguous blocks. Full pairwise attention, no masking.
template <typename Real>
Tensor<Real> attention_core(const Tensor<Real>& q, const Tensor<Real>& k, const Tensor<Real>& v,
                            int n_heads, Tape<std::type_identity_t<Real>>* tape) {
  const int n = q.rows(), d = q.cols();
  if (!q.same_shape(k) || !q.same_shape(v)) throw ShapeError("attention: q/k/v shape mismatch");
  if (n_heads < 1 || d % n_heads != 0) throw ConfigError("attention: d not divisible by n_heads");
  const int hd = d / n_heads;
  const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(hd));
  const bool rec = detail::taped(tape, {&q, &k, &v});
  auto y = detail::make_output<Real>({n, d}, rec);
  // attn weights per head, kept for the backward pass
  auto attn = std::make_shared<std::vector<Real>>(static_cast<std::size_t>(n_heads) * n * n);
  std::vector<Real> qh(static_cast<std::size_t>(n) * hd), kh(qh.size()), vh(qh.size()), oh(qh.size());
  for (int h = 0; h < n_heads; ++h) {
    const int off = h * hd;
    for (int i = 0; i < n; ++i) {
      const std::size_t src = static_cast<std::size_t>(i) * d + off;
      std::copy(q.ptr() + src, q.ptr() + src + hd, qh.begin() + static_cast<std::size_t>(i) * hd);
      std::copy(k.ptr() + src, k.ptr() + src + hd, kh.begin() + static_cast<std::size_t>(i) * hd);
      std::copy(v.ptr() + src, v.ptr() + src + hd, vh.begin() + static_cast<std::size_t>(i) * hd);
    }
    Real* a = attn->data() + static_cast<std::size_t>(h) * n * n;
    kern::matmul_nt(qh.data(), kh.data(), a, n, hd, n, false);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * n; ++i) a[i] *= inv_sqrt;
    kern::softmax_rows(a, n, n);
    kern::matmul_nn(a, vh.data(), oh.data(), n, n, hd, false);
    for (int i = 0; i < n; ++i) {
      const std::size_t dst = static_cast<std::size_t>(i) * d + off;
      std::copy(oh.begin() + static_cast<std::size_t>(i) * hd,
                oh.begin() + static_cast<std::size_t>(i + 1) * hd, y.ptr() + dst);
    }
  }
  if (rec) {
    tape->record([q, k, v, y, attn, n, d, hd, n_heads, inv_sqrt]() {
      std::vector<Real> qh(static_cast<std::size_t>(n) * hd), kh(qh.size()), vh(qh.size());
      std::vector<Real> doh(qh.size()), dvh(qh.size()), dqh(qh.size()), dkh(qh.size());
      std::vector<Real> da(static_cast<std::size_t>(n) * n), ds(da.size());
      for (int h = 0; h < n_heads; ++h) {
        const int off = h * hd;
        for (int i = 0; i < n; ++i) {
          const std::size_t src = static_cast<std::size_t>(i) * d + off;
          std::copy(q.ptr() + src, q.ptr() + src + hd, qh.begin() + static_cast<std::size_t>(i) * hd);
          std::copy(k.ptr() + src, k.ptr() + src + hd, kh.begin() + static_cast<std::size_t>(i) * hd);
          std::copy(v.ptr() + src, v.ptr() + src + hd, vh.begin() + static_cast<std::size_t>(i) * hd);
          std::copy(y.gptr() + src, y.gptr() + src + hd, doh.begin() + static_cast<std::size_t>(i) * hd);
        }
        const Real* a = attn->data() + static_cast<std::size_t>(h) * n * n;
        // dv = a^T * do
        kern::matmul_tn(a, doh.data(), dvh.data(), n, n, hd, false);
        // da = do * v^T
        kern::matmul_nt(doh.data(), vh.data(), da.data(), n, hd, n, false);
        // ds = a .* (da - rowsum(da .* a))
        for (int i = 0; i < n; ++i) {
          const Real* ai = a + static_cast<std::size_t>(i) * n;
          const Real* dai = da.data() + static_cast<std::size_t>(i) * n;
          Real dot = 0;
          for (int j = 0; j < n; ++j) dot += ai[j] * dai[j];
          Real* dsi = ds.data() + static_cast<std::size_t>(i) * n;
          for (int j = 0; j < n; ++j) dsi[j] = ai[j] * (dai[j] - dot) * inv_sqrt;
        }
        kern::matmul_nn(ds.data(), kh.data(), dqh.data(), n, n, hd, false);
        kern::matmul_tn(ds.data(), qh.data(), dkh.data(), n, n, hd, false);
        for (int i = 0; i < n; ++i) {
          const std::size_t dst = static_cast<std::size_t>(i) * d + off;
          const std::size_t s = static_cast<std::size_t>(i) * hd;
          if (q.requires_grad) {
            for (int j = 0; j < hd; ++j) q.gptr()[dst + j] += dqh[s + j];
          }
          if (k.requires_grad) {
            for (int j = 0; j < hd; ++j) k.gptr()[dst + j] += dkh[s + j];
          }
          if (v.requires_grad) {
            for (int j = 0; j < hd; ++j) v.gptr()[dst + j] += dvh[s + j];
          }
        }
      }
    });
  }
  return y;
}

template <typename Real>
struct MhaParams {
  Tensor<Real> wq, bq, wk, bk, wv, bv, wo, bo;
};

template <typename Real>
Tensor<Real> multi_head_attention(const Tensor<Real>& h, const MhaParams<Real>& p, int n_heads,
                                  Tape<std::type_identity_t<Real>>* tape) {
  auto q = linear(h, p.wq, p.bq, tape);
  auto k = linear(h, p.wk, p.bk, tape);
  auto v = linear(h, p.wv, p.bv, tape);
  auto mixed = attention_core(q, k, v, n_heads, tape);
  return linear(mixed, p.wo, p.bo, tape);
}

template <typename Real>
struct BlockParams {
  Tensor<Real> norm1_gain;
  MhaParams<Real> mha;
  Tensor<Real> alpha_attn;
  Tensor<Real> norm2_gain;
  Tensor<Real> ff_w1, ff_b1, ff_w2, ff_b2;
  Tensor<Real> alpha_ff;
};

// Pre-norm ReZero transformer block:
//   h <- h + alpha_attn * MHA(RMSNorm(h))
//   h <- h + alpha_ff   * FF(RMSNorm(h))
template <typename Real>
Tensor<Real> transformer_block(const Tensor<Real>& h, const BlockParams<Real>& p, int n_heads,
                               std::type_identity_t<Real> eps, Tape<std::type_identity_t<Real>>* tape) {
  auto att = multi_head_attention(rmsnorm(h, p.norm1_gain, eps, tape), p.mha, n_heads, tape);
  auto h1 = rezero_add(h, att, p.alpha_attn, tape);
  auto f = linear(relu(linear(rmsnorm(h1, p.norm2_gain, eps, tape), p.ff_w1, p.ff_b1, tape), tape),
                  p.ff_w2, p.ff_b2, tape);
  return rezero_add(h1, f, p.alpha_ff, tape);
}

}  // namespace rnco
