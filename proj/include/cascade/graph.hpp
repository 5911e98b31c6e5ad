#pragma once

#include "cascade/errors.hpp"
#include "cascade/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace cascade::nn {

using Var = std::size_t;

// One tokenized mini-batch: ids row-major [batch x time], lengths give the
// number of real (non-PAD) tokens per row. Padding is always a suffix.
struct BatchTokens {
  std::size_t batch = 0;
  std::size_t time = 0;
  std::vector<std::int32_t> ids;
  std::vector<std::size_t> lengths;
};

// Reverse-mode tape. Every op records its inputs' node indices and a
// backward closure; backward(loss) walks the tape once in reverse. The tape
// is single-use: build a Graph per forward pass, read gradients, drop it.
template <typename T>
class Graph {
public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var leaf(Tensor<T> value) { return push(std::move(value), true, nullptr); }
  Var constant(Tensor<T> value) { return push(std::move(value), false, nullptr); }

  const Tensor<T>& value(Var v) const { return nodes_[v].value; }

  T scalar_value(Var v) const {
    if (nodes_[v].value.size() != 1) {
      throw UsageError("scalar_value: node is not a scalar, shape " + nodes_[v].value.shape_str());
    }
    return nodes_[v].value.data[0];
  }

  // Gather token + positional embeddings: out[b,t,:] = tok[ids[b,t],:] + pos[t,:].
  Var embed(Var tok_emb, Var pos_emb, const BatchTokens& tokens) {
    const Tensor<T>& tok = nodes_[tok_emb].value;
    const Tensor<T>& pos = nodes_[pos_emb].value;
    if (tok.rank() != 2 || pos.rank() != 2 || tok.dim(1) != pos.dim(1)) {
      throw UsageError("embed: embedding tables must be [V,h] and [P,h]");
    }
    const std::size_t B = tokens.batch, Tm = tokens.time, h = tok.dim(1);
    if (Tm > pos.dim(0)) {
      throw UsageError("embed: sequence length " + std::to_string(Tm) +
                       " exceeds positional table " + std::to_string(pos.dim(0)));
    }
    Tensor<T> out(std::vector<std::size_t>{B, Tm, h});
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t t = 0; t < Tm; ++t) {
        const auto id = static_cast<std::size_t>(tokens.ids[b * Tm + t]);
        if (id >= tok.dim(0)) throw UsageError("embed: token id out of range");
        const T* trow = tok.ptr() + id * h;
        const T* prow = pos.ptr() + t * h;
        T* orow = out.ptr() + (b * Tm + t) * h;
        for (std::size_t c = 0; c < h; ++c) orow[c] = trow[c] + prow[c];
      }
    }
    std::vector<std::int32_t> ids = tokens.ids;
    return push(std::move(out), needs_grad(tok_emb) || needs_grad(pos_emb),
                [this, tok_emb, pos_emb, B, Tm, h, ids](Var self) {
                  const Tensor<T>& g = grads_[self];
                  Tensor<T>& gtok = grads_[tok_emb];
                  Tensor<T>& gpos = grads_[pos_emb];
                  for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t t = 0; t < Tm; ++t) {
                      const auto id = static_cast<std::size_t>(ids[b * Tm + t]);
                      const T* grow = g.ptr() + (b * Tm + t) * h;
                      T* trow = gtok.ptr() + id * h;
                      T* prow = gpos.ptr() + t * h;
                      for (std::size_t c = 0; c < h; ++c) {
                        trow[c] += grow[c];
                        prow[c] += grow[c];
                      }
                    }
                  }
                });
  }

  // x[..., in] * w[in, out] + b[out]; leading dims are flattened.
  Var linear(Var x, Var w, Var b) {
    const Tensor<T>& xv = nodes_[x].value;
    const Tensor<T>& wv = nodes_[w].value;
    const Tensor<T>& bv = nodes_[b].value;
    if (wv.rank() != 2) throw UsageError("linear: weight must be rank 2");
    const std::size_t in = wv.dim(0), out = wv.dim(1);
    if (xv.rank() < 1 || xv.dims.back() != in) {
      throw UsageError("linear: input last dim " + xv.shape_str() + " != weight in dim " +
                       std::to_string(in));
    }
    if (bv.size() != out) throw UsageError("linear: bias size mismatch");
    const std::size_t rows = xv.size() / in;
    std::vector<std::size_t> odims = xv.dims;
    odims.back() = out;
    Tensor<T> y(odims);
    gemm_nn(xv.ptr(), wv.ptr(), y.ptr(), rows, in, out, false);
    for (std::size_t r = 0; r < rows; ++r) {
      T* yrow = y.ptr() + r * out;
      for (std::size_t j = 0; j < out; ++j) yrow[j] += bv.data[j];
    }
    return push(std::move(y), needs_grad(x) || needs_grad(w) || needs_grad(b),
                [this, x, w, b, rows, in, out](Var self) {
                  const Tensor<T>& g = grads_[self];
                  const Tensor<T>& xv = nodes_[x].value;
                  const Tensor<T>& wv = nodes_[w].value;
                  // dX = dY * W^T
                  gemm_nt(g.ptr(), wv.ptr(), grads_[x].ptr(), rows, out, in, true);
                  // dW = X^T * dY
                  gemm_tn(xv.ptr(), g.ptr(), grads_[w].ptr(), rows, in, out, true);
                  Tensor<T>& gb = grads_[b];
                  for (std::size_t r = 0; r < rows; ++r) {
                    const T* grow = g.ptr() + r * out;
                    for (std::size_t j = 0; j < out; ++j) gb.data[j] += grow[j];
                  }
                });
  }

  // Multi-head scaled dot-product self-attention with a padding mask.
  // q,k,v are [B,T,h]; each row b attends only over keys [0, lengths[b]).
  Var attention(Var q, Var k, Var v, std::vector<std::size_t> lengths, std::size_t heads) {
    const Tensor<T>& qv = nodes_[q].value;
    if (qv.rank() != 3) throw UsageError("attention: inputs must be [B,T,h]");
    if (!qv.same_shape(nodes_[k].value) || !qv.same_shape(nodes_[v].value)) {
      throw UsageError("attention: q/k/v shape mismatch");
    }
    const std::size_t B = qv.dim(0), Tm = qv.dim(1), h = qv.dim(2);
    if (heads == 0 || h % heads != 0) throw UsageError("attention: heads must divide h");
    if (lengths.size() != B) throw UsageError("attention: lengths size != batch");
    for (std::size_t len : lengths) {
      if (len == 0 || len > Tm) throw UsageError("attention: invalid sequence length");
    }
    const std::size_t dh = h / heads;
    const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dh)));

    Tensor<T> out(std::vector<std::size_t>{B, Tm, h});
    // Cached softmax weights, [B, heads, T, T]; masked columns stay zero.
    Tensor<T> probs(std::vector<std::size_t>{B, heads, Tm, Tm});
    std::vector<T> qa(Tm * dh), ka(Tm * dh), va(Tm * dh), scores(Tm * Tm), ctx(Tm * dh);

    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t len = lengths[b];
      for (std::size_t a = 0; a < heads; ++a) {
        gather_head(qv, b, a, dh, h, Tm, qa.data());
        gather_head(nodes_[k].value, b, a, dh, h, Tm, ka.data());
        gather_head(nodes_[v].value, b, a, dh, h, Tm, va.data());
        gemm_nt(qa.data(), ka.data(), scores.data(), Tm, dh, Tm, false);
        T* prob = probs.ptr() + ((b * heads + a) * Tm) * Tm;
        for (std::size_t t = 0; t < Tm; ++t) {
          T* srow = scores.data() + t * Tm;
          T* prow = prob + t * Tm;
          T maxv = srow[0] * scale;
          for (std::size_t j = 1; j < len; ++j) maxv = std::max(maxv, srow[j] * scale);
          T sum = T(0);
          for (std::size_t j = 0; j < len; ++j) {
            const T e = std::exp(srow[j] * scale - maxv);
            prow[j] = e;
            sum += e;
          }
          for (std::size_t j = len; j < Tm; ++j) prow[j] = T(0);
          const T inv = T(1) / sum;
          for (std::size_t j = 0; j < len; ++j) prow[j] *= inv;
        }
        gemm_nn(prob, va.data(), ctx.data(), Tm, Tm, dh, false);
        scatter_head(ctx.data(), b, a, dh, h, Tm, out);
      }
    }
    return push(std::move(out), needs_grad(q) || needs_grad(k) || needs_grad(v),
                [this, q, k, v, lengths = std::move(lengths), heads, dh, h, scale,
                 probs = std::move(probs)](Var self) {
                  const Tensor<T>& g = grads_[self];
                  const std::size_t B = g.dim(0), Tm = g.dim(1);
                  std::vector<T> qa(Tm * dh), ka(Tm * dh), va(Tm * dh);
                  std::vector<T> dc(Tm * dh), dp(Tm * Tm), ds(Tm * Tm), tmp(Tm * dh);
                  for (std::size_t b = 0; b < B; ++b) {
                    const std::size_t len = lengths[b];
                    for (std::size_t a = 0; a < heads; ++a) {
                      gather_head(nodes_[q].value, b, a, dh, h, Tm, qa.data());
                      gather_head(nodes_[k].value, b, a, dh, h, Tm, ka.data());
                      gather_head(nodes_[v].value, b, a, dh, h, Tm, va.data());
                      gather_head(g, b, a, dh, h, Tm, dc.data());
                      const T* prob = probs.ptr() + ((b * heads + a) * Tm) * Tm;
                      // dV = P^T * dC
                      gemm_tn(prob, dc.data(), tmp.data(), Tm, Tm, dh, false);
                      accumulate_head(tmp.data(), b, a, dh, h, Tm, grads_[v]);
                      // dP = dC * V^T
                      gemm_nt(dc.data(), va.data(), dp.data(), Tm, dh, Tm, false);
                      // dS = P o (dP - rowsum(dP o P)), masked columns zero
                      for (std::size_t t = 0; t < Tm; ++t) {
                        const T* prow = prob + t * Tm;
                        const T* dprow = dp.data() + t * Tm;
                        T* dsrow = ds.data() + t * Tm;
                        T dot = T(0);
                        for (std::size_t j = 0; j < len; ++j) dot += dprow[j] * prow[j];
                        for (std::size_t j = 0; j < len; ++j) {
                          dsrow[j] = prow[j] * (dprow[j] - dot) * scale;
                        }
                        for (std::size_t j = len; j < Tm; ++j) dsrow[j] = T(0);
                      }
                      // dQ = dS * K, dK = dS^T * Q (scale folded into dS)
                      gemm_nn(ds.data(), ka.data(), tmp.data(), Tm, Tm, dh, false);
                      accumulate_head(tmp.data(), b, a, dh, h, Tm, grads_[q]);
                      gemm_tn(ds.data(), qa.data(), tmp.data(), Tm, Tm, dh, false);
                      accumulate_head(tmp.data(), b, a, dh, h, Tm, grads_[k]);
                    }
                  }
                });
  }

  Var add(Var a, Var b) {
    const Tensor<T>& av = nodes_[a].value;
    if (!av.same_shape(nodes_[b].value)) throw UsageError("add: shape mismatch");
    Tensor<T> y = av;
    const Tensor<T>& bv = nodes_[b].value;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += bv.data[i];
    return push(std::move(y), needs_grad(a) || needs_grad(b), [this, a, b](Var self) {
      const Tensor<T>& g = grads_[self];
      accumulate(grads_[a], g);
      accumulate(grads_[b], g);
    });
  }

  // Normalizes the last dimension of x; gamma/beta are [h].
  Var layer_norm(Var x, Var gamma, Var beta, T eps) {
    const Tensor<T>& xv = nodes_[x].value;
    const std::size_t h = xv.dims.back();
    if (nodes_[gamma].value.size() != h || nodes_[beta].value.size() != h) {
      throw UsageError("layer_norm: gamma/beta size mismatch");
    }
    const std::size_t rows = xv.size() / h;
    Tensor<T> y(xv.dims);
    Tensor<T> xhat(xv.dims);
    std::vector<T> inv_std(rows);
    const T* gptr = nodes_[gamma].value.ptr();
    const T* bptr = nodes_[beta].value.ptr();
    for (std::size_t r = 0; r < rows; ++r) {
      const T* xrow = xv.ptr() + r * h;
      T mean = T(0);
      for (std::size_t c = 0; c < h; ++c) mean += xrow[c];
      mean /= static_cast<T>(h);
      T var = T(0);
      for (std::size_t c = 0; c < h; ++c) {
        const T d = xrow[c] - mean;
        var += d * d;
      }
      var /= static_cast<T>(h);
      const T inv = T(1) / std::sqrt(var + eps);
      inv_std[r] = inv;
      T* hrow = xhat.ptr() + r * h;
      T* yrow = y.ptr() + r * h;
      for (std::size_t c = 0; c < h; ++c) {
        hrow[c] = (xrow[c] - mean) * inv;
        yrow[c] = hrow[c] * gptr[c] + bptr[c];
      }
    }
    return push(std::move(y), needs_grad(x) || needs_grad(gamma) || needs_grad(beta),
                [this, x, gamma, beta, rows, h, xhat = std::move(xhat),
                 inv_std = std::move(inv_std)](Var self) {
                  const Tensor<T>& g = grads_[self];
                  const T* gptr = nodes_[gamma].value.ptr();
                  Tensor<T>& gx = grads_[x];
                  Tensor<T>& gg = grads_[gamma];
                  Tensor<T>& gb = grads_[beta];
                  for (std::size_t r = 0; r < rows; ++r) {
                    const T* grow = g.ptr() + r * h;
                    const T* hrow = xhat.ptr() + r * h;
                    T* xrow = gx.ptr() + r * h;
                    T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
                    for (std::size_t c = 0; c < h; ++c) {
                      const T dxh = grow[c] * gptr[c];
                      sum_dxhat += dxh;
                      sum_dxhat_xhat += dxh * hrow[c];
                      gg.data[c] += grow[c] * hrow[c];
                      gb.data[c] += grow[c];
                    }
                    const T m1 = sum_dxhat / static_cast<T>(h);
                    const T m2 = sum_dxhat_xhat / static_cast<T>(h);
                    for (std::size_t c = 0; c < h; ++c) {
                      const T dxh = grow[c] * gptr[c];
                      xrow[c] += inv_std[r] * (dxh - m1 - hrow[c] * m2);
                    }
                  }
                });
  }

  Var gelu(Var x) {
    const Tensor<T>& xv = nodes_[x].value;
    Tensor<T> y(xv.dims);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const T v = xv.data[i];
      y.data[i] = T(0.5) * v * (T(1) + std::erf(v / T(std::sqrt(2.0))));
    }
    return push(std::move(y), needs_grad(x), [this, x](Var self) {
      const Tensor<T>& g = grads_[self];
      const Tensor<T>& xv = nodes_[x].value;
      Tensor<T>& gx = grads_[x];
      const T inv_sqrt2 = T(1) / T(std::sqrt(2.0));
      const T inv_sqrt2pi = T(1) / T(std::sqrt(2.0 * 3.14159265358979323846));
      for (std::size_t i = 0; i < xv.size(); ++i) {
        const T v = xv.data[i];
        const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
        const T pdf = std::exp(T(-0.5) * v * v) * inv_sqrt2pi;
        gx.data[i] += g.data[i] * (cdf + v * pdf);
      }
    });
  }

  // [B,T,h] -> [B,h], keeping position 0.
  Var cls(Var x) {
    const Tensor<T>& xv = nodes_[x].value;
    if (xv.rank() != 3) throw UsageError("cls: input must be [B,T,h]");
    const std::size_t B = xv.dim(0), Tm = xv.dim(1), h = xv.dim(2);
    Tensor<T> y(std::vector<std::size_t>{B, h});
    for (std::size_t b = 0; b < B; ++b) {
      const T* src = xv.ptr() + b * Tm * h;
      T* dst = y.ptr() + b * h;
      for (std::size_t c = 0; c < h; ++c) dst[c] = src[c];
    }
    return push(std::move(y), needs_grad(x), [this, x, B, Tm, h](Var self) {
      const Tensor<T>& g = grads_[self];
      Tensor<T>& gx = grads_[x];
      for (std::size_t b = 0; b < B; ++b) {
        const T* src = g.ptr() + b * h;
        T* dst = gx.ptr() + b * Tm * h;
        for (std::size_t c = 0; c < h; ++c) dst[c] += src[c];
      }
    });
  }

  // a[m,k] * b[n,k]^T -> [m,n]; the score matrix between two embedding sets.
  Var matmul_nt(Var a, Var b) {
    const Tensor<T>& av = nodes_[a].value;
    const Tensor<T>& bv = nodes_[b].value;
    if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(1)) {
      throw UsageError("matmul_nt: need [m,k] and [n,k]");
    }
    const std::size_t m = av.dim(0), kk = av.dim(1), n = bv.dim(0);
    Tensor<T> y(std::vector<std::size_t>{m, n});
    gemm_nt(av.ptr(), bv.ptr(), y.ptr(), m, kk, n, false);
    return push(std::move(y), needs_grad(a) || needs_grad(b), [this, a, b, m, kk, n](Var self) {
      const Tensor<T>& g = grads_[self];
      gemm_nn(g.ptr(), nodes_[b].value.ptr(), grads_[a].ptr(), m, n, kk, true);
      gemm_tn(g.ptr(), nodes_[a].value.ptr(), grads_[b].ptr(), m, n, kk, true);
    });
  }

  // x[B,h] . w[h] + bias[1] -> [B]; the scalar relevance head.
  Var rows_dot(Var x, Var w, Var bias) {
    const Tensor<T>& xv = nodes_[x].value;
    const Tensor<T>& wv = nodes_[w].value;
    if (xv.rank() != 2 || wv.size() != xv.dim(1)) throw UsageError("rows_dot: shape mismatch");
    if (nodes_[bias].value.size() != 1) throw UsageError("rows_dot: bias must be scalar");
    const std::size_t B = xv.dim(0), h = xv.dim(1);
    Tensor<T> y(std::vector<std::size_t>{B});
    const T bv = nodes_[bias].value.data[0];
    for (std::size_t b = 0; b < B; ++b) {
      const T* xrow = xv.ptr() + b * h;
      T acc = T(0);
      for (std::size_t c = 0; c < h; ++c) acc += xrow[c] * wv.data[c];
      y.data[b] = acc + bv;
    }
    return push(std::move(y), needs_grad(x) || needs_grad(w) || needs_grad(bias),
                [this, x, w, bias, B, h](Var self) {
                  const Tensor<T>& g = grads_[self];
                  const Tensor<T>& xv = nodes_[x].value;
                  const Tensor<T>& wv = nodes_[w].value;
                  Tensor<T>& gx = grads_[x];
                  Tensor<T>& gw = grads_[w];
                  for (std::size_t b = 0; b < B; ++b) {
                    const T gb = g.data[b];
                    const T* xrow = xv.ptr() + b * h;
                    T* gxrow = gx.ptr() + b * h;
                    for (std::size_t c = 0; c < h; ++c) {
                      gxrow[c] += gb * wv.data[c];
                      gw.data[c] += gb * xrow[c];
                    }
                    grads_[bias].data[0] += gb;
                  }
                });
  }

  // Row-wise log softmax with max subtraction.
  Var log_softmax_rows(Var x) {
    const Tensor<T>& xv = nodes_[x].value;
    if (xv.rank() != 2) throw UsageError("log_softmax_rows: input must be rank 2");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    Tensor<T> y(xv.dims);
    Tensor<T> p(xv.dims); // cached softmax
    for (std::size_t i = 0; i < m; ++i) {
      const T* xrow = xv.ptr() + i * n;
      T* yrow = y.ptr() + i * n;
      T* prow = p.ptr() + i * n;
      T maxv = xrow[0];
      for (std::size_t j = 1; j < n; ++j) maxv = std::max(maxv, xrow[j]);
      T sum = T(0);
      for (std::size_t j = 0; j < n; ++j) sum += std::exp(xrow[j] - maxv);
      const T lse = maxv + std::log(sum);
      for (std::size_t j = 0; j < n; ++j) {
        yrow[j] = xrow[j] - lse;
        prow[j] = std::exp(yrow[j]);
      }
    }
    return push(std::move(y), needs_grad(x), [this, x, m, n, p = std::move(p)](Var self) {
      const Tensor<T>& g = grads_[self];
      Tensor<T>& gx = grads_[x];
      for (std::size_t i = 0; i < m; ++i) {
        const T* grow = g.ptr() + i * n;
        const T* prow = p.ptr() + i * n;
        T* xrow = gx.ptr() + i * n;
        T gsum = T(0);
        for (std::size_t j = 0; j < n; ++j) gsum += grow[j];
        for (std::size_t j = 0; j < n; ++j) xrow[j] += grow[j] - prow[j] * gsum;
      }
    });
  }

  Var transpose(Var x) {
    const Tensor<T>& xv = nodes_[x].value;
    if (xv.rank() != 2) throw UsageError("transpose: input must be rank 2");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    Tensor<T> y(std::vector<std::size_t>{n, m});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) y.at(j, i) = xv.at(i, j);
    }
    return push(std::move(y), needs_grad(x), [this, x, m, n](Var self) {
      const Tensor<T>& g = grads_[self];
      Tensor<T>& gx = grads_[x];
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) gx.at(i, j) += g.at(j, i);
      }
    });
  }

  Var diag(Var x) {
    const Tensor<T>& xv = nodes_[x].value;
    if (xv.rank() != 2 || xv.dim(0) != xv.dim(1)) throw UsageError("diag: input must be square");
    const std::size_t n = xv.dim(0);
    Tensor<T> y(std::vector<std::size_t>{n});
    for (std::size_t i = 0; i < n; ++i) y.data[i] = xv.at(i, i);
    return push(std::move(y), needs_grad(x), [this, x, n](Var self) {
      const Tensor<T>& g = grads_[self];
      for (std::size_t i = 0; i < n; ++i) grads_[x].at(i, i) += g.data[i];
    });
  }

  // Weighted sum of a vector with constant weights -> scalar.
  Var weighted_sum(Var x, std::vector<T> w) {
    const Tensor<T>& xv = nodes_[x].value;
    if (xv.rank() != 1 || xv.size() != w.size()) throw UsageError("weighted_sum: size mismatch");
    T acc = T(0);
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * xv.data[i];
    return push(Tensor<T>::scalar(acc), needs_grad(x), [this, x, w = std::move(w)](Var self) {
      const T g = grads_[self].data[0];
      for (std::size_t i = 0; i < w.size(); ++i) grads_[x].data[i] += g * w[i];
    });
  }

  Var reshape(Var x, std::vector<std::size_t> dims) {
    const Tensor<T>& xv = nodes_[x].value;
    Tensor<T> y(std::move(dims));
    if (y.size() != xv.size()) throw UsageError("reshape: element count mismatch");
    y.data = xv.data;
    return push(std::move(y), needs_grad(x), [this, x](Var self) {
      const Tensor<T>& g = grads_[self];
      for (std::size_t i = 0; i < g.size(); ++i) grads_[x].data[i] += g.data[i];
    });
  }

  Var slice1d(Var x, std::size_t start, std::size_t len) {
    const Tensor<T>& xv = nodes_[x].value;
    if (xv.rank() != 1 || start + len > xv.size()) throw UsageError("slice1d: out of range");
    Tensor<T> y(std::vector<std::size_t>{len});
    for (std::size_t i = 0; i < len; ++i) y.data[i] = xv.data[start + i];
    return push(std::move(y), needs_grad(x), [this, x, start, len](Var self) {
      const Tensor<T>& g = grads_[self];
      for (std::size_t i = 0; i < len; ++i) grads_[x].data[start + i] += g.data[i];
    });
  }

  Var pick(Var x, std::size_t i) {
    const Tensor<T>& xv = nodes_[x].value;
    if (i >= xv.size()) throw UsageError("pick: index out of range");
    return push(Tensor<T>::scalar(xv.data[i]), needs_grad(x),
                [this, x, i](Var self) { grads_[x].data[i] += grads_[self].data[0]; });
  }

  // ca*a + cb*b elementwise, same shape.
  Var lincomb(T ca, Var a, T cb, Var b) {
    const Tensor<T>& av = nodes_[a].value;
    if (!av.same_shape(nodes_[b].value)) throw UsageError("lincomb: shape mismatch");
    Tensor<T> y(av.dims);
    const Tensor<T>& bv = nodes_[b].value;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = ca * av.data[i] + cb * bv.data[i];
    return push(std::move(y), needs_grad(a) || needs_grad(b), [this, a, b, ca, cb](Var self) {
      const Tensor<T>& g = grads_[self];
      for (std::size_t i = 0; i < g.size(); ++i) {
        grads_[a].data[i] += ca * g.data[i];
        grads_[b].data[i] += cb * g.data[i];
      }
    });
  }

  Var scale(Var x, T c) {
    const Tensor<T>& xv = nodes_[x].value;
    Tensor<T> y(xv.dims);
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = c * xv.data[i];
    return push(std::move(y), needs_grad(x), [this, x, c](Var self) {
      const Tensor<T>& g = grads_[self];
      for (std::size_t i = 0; i < g.size(); ++i) grads_[x].data[i] += c * g.data[i];
    });
  }

  Var neg(Var x) { return scale(x, T(-1)); }

  Var sum_all(Var x) {
    const Tensor<T>& xv = nodes_[x].value;
    T acc = T(0);
    for (T v : xv.data) acc += v;
    return push(Tensor<T>::scalar(acc), needs_grad(x), [this, x](Var self) {
      const T g = grads_[self].data[0];
      for (std::size_t i = 0; i < grads_[x].size(); ++i) grads_[x].data[i] += g;
    });
  }

  // Sum of scalar vars with constant coefficients -> scalar.
  Var combine(const std::vector<Var>& vars, const std::vector<T>& coeffs) {
    if (vars.size() != coeffs.size() || vars.empty()) throw UsageError("combine: size mismatch");
    T acc = T(0);
    bool rg = false;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      acc += coeffs[i] * scalar_value(vars[i]);
      rg = rg || needs_grad(vars[i]);
    }
    return push(Tensor<T>::scalar(acc), rg,
                [this, vars, coeffs](Var self) {
                  const T g = grads_[self].data[0];
                  for (std::size_t i = 0; i < vars.size(); ++i) {
                    grads_[vars[i]].data[0] += coeffs[i] * g;
                  }
                });
  }

  // Runs reverse accumulation from a scalar loss. Single use per graph.
  void backward(Var loss) {
    if (nodes_[loss].value.size() != 1) {
      throw UsageError("backward: loss must be a scalar, got " + nodes_[loss].value.shape_str());
    }
    if (backward_done_) throw UsageError("backward: already run on this graph");
    grads_.clear();
    grads_.reserve(nodes_.size());
    for (const Node& n : nodes_) grads_.emplace_back(n.value.dims);
    grads_[loss].data[0] = T(1);
    for (std::size_t i = loss + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.requires_grad && n.back) n.back(i);
    }
    // closures may have spilled into constant inputs; constants report zero
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].requires_grad) {
        std::fill(grads_[i].data.begin(), grads_[i].data.end(), T(0));
      }
    }
    backward_done_ = true;
  }

  bool backward_done() const { return backward_done_; }

  const Tensor<T>& grad(Var v) const {
    if (!backward_done_) throw UsageError("grad: backward has not been run");
    return grads_[v];
  }

  std::size_t node_count() const { return nodes_.size(); }

private:
  struct Node {
    Tensor<T> value;
    std::function<void(Var)> back;
    bool requires_grad = false;
  };

  bool needs_grad(Var v) const { return nodes_[v].requires_grad; }

  Var push(Tensor<T> value, bool requires_grad, std::function<void(Var)> back) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  static void gather_head(const Tensor<T>& x, std::size_t b, std::size_t a, std::size_t dh,
                          std::size_t h, std::size_t Tm, T* out) {
    for (std::size_t t = 0; t < Tm; ++t) {
      const T* src = x.ptr() + (b * Tm + t) * h + a * dh;
      T* dst = out + t * dh;
      for (std::size_t c = 0; c < dh; ++c) dst[c] = src[c];
    }
  }

  static void scatter_head(const T* src, std::size_t b, std::size_t a, std::size_t dh,
                           std::size_t h, std::size_t Tm, Tensor<T>& out) {
    for (std::size_t t = 0; t < Tm; ++t) {
      T* dst = out.ptr() + (b * Tm + t) * h + a * dh;
      const T* s = src + t * dh;
      for (std::size_t c = 0; c < dh; ++c) dst[c] = s[c];
    }
  }

  static void accumulate_head(const T* src, std::size_t b, std::size_t a, std::size_t dh,
                              std::size_t h, std::size_t Tm, Tensor<T>& out) {
    for (std::size_t t = 0; t < Tm; ++t) {
      T* dst = out.ptr() + (b * Tm + t) * h + a * dh;
      const T* s = src + t * dh;
      for (std::size_t c = 0; c < dh; ++c) dst[c] += s[c];
    }
  }

  static void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
  }

  std::vector<Node> nodes_;
  std::vector<Tensor<T>> grads_;
  bool backward_done_ = false;
};

} // namespace cascade::nn
