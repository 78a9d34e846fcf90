#pragma once

// Differentiable operations. Convolution lowers to im2col + GEMM; backward
// recomputes the column buffer instead of caching it, trading ~10% time for
// a flat memory profile. All loss reductions accumulate in double no matter
// the tensor scalar type.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "burnscan/nn/blas.hpp"
#include "burnscan/nn/graph.hpp"
#include "burnscan/nn/tensor.hpp"

namespace burnscan::nn {

namespace detail {

template <typename T>
void im2col(const T* x, long C, long H, long W, long kh, long kw, long stride,
            long pad, long Ho, long Wo, T* cols) {
  for (long c = 0; c < C; ++c)
    for (long i = 0; i < kh; ++i)
      for (long j = 0; j < kw; ++j) {
        T* dst = cols + ((c * kh + i) * kw + j) * (Ho * Wo);
        for (long oy = 0; oy < Ho; ++oy) {
          const long iy = oy * stride - pad + i;
          if (iy < 0 || iy >= H) {
            std::fill(dst, dst + Wo, T(0));
            dst += Wo;
            continue;
          }
          const T* src = x + (c * H + iy) * W;
          for (long ox = 0; ox < Wo; ++ox) {
            const long ix = ox * stride - pad + j;
            *dst++ = (ix >= 0 && ix < W) ? src[ix] : T(0);
          }
        }
      }
}

template <typename T>
void col2im_acc(const T* cols, long C, long H, long W, long kh, long kw,
                long stride, long pad, long Ho, long Wo, T* dx) {
  for (long c = 0; c < C; ++c)
    for (long i = 0; i < kh; ++i)
      for (long j = 0; j < kw; ++j) {
        const T* src = cols + ((c * kh + i) * kw + j) * (Ho * Wo);
        for (long oy = 0; oy < Ho; ++oy) {
          const long iy = oy * stride - pad + i;
          if (iy < 0 || iy >= H) {
            src += Wo;
            continue;
          }
          T* dst = dx + (c * H + iy) * W;
          for (long ox = 0; ox < Wo; ++ox) {
            const long ix = ox * stride - pad + j;
            if (ix >= 0 && ix < W) dst[ix] += src[ox];
          }
          src += Wo;
        }
      }
}

}  // namespace detail

// x: (N,C,H,W), w: (K,C,kh,kw), bias: (K) or null.
template <typename T>
NodePtr<T> conv2d(Graph<T>& g, NodePtr<T> x, NodePtr<T> w, NodePtr<T> bias,
                  long stride, long pad) {
  const long N = x->val.size(0), C = x->val.size(1), H = x->val.size(2),
             W = x->val.size(3);
  const long K = w->val.size(0), kh = w->val.size(2), kw = w->val.size(3);
  if (w->val.size(1) != C)
    throw Error(Errc::shape_error,
                "conv2d weight expects " + std::to_string(w->val.size(1)) +
                    " input channels, activation has " + std::to_string(C));
  const long Ho = (H + 2 * pad - kh) / stride + 1;
  const long Wo = (W + 2 * pad - kw) / stride + 1;
  if (Ho < 1 || Wo < 1)
    throw Error(Errc::shape_error, "conv2d output would be empty");
  const long ckk = C * kh * kw, hw = Ho * Wo;
  const bool pointwise = kh == 1 && kw == 1 && stride == 1 && pad == 0;

  Tensor<T> out({N, K, Ho, Wo});
  {
    std::vector<T> cols(pointwise ? 0 : ckk * hw);
    for (long n = 0; n < N; ++n) {
      const T* xn = x->val.data() + n * C * H * W;
      if (!pointwise) detail::im2col(xn, C, H, W, kh, kw, stride, pad, Ho, Wo, cols.data());
      gemm(false, false, int(K), int(hw), int(ckk), T(1), w->val.data(), int(ckk),
           pointwise ? xn : cols.data(), int(hw), T(0),
           out.data() + n * K * hw, int(hw));
    }
    if (bias)
      for (long n = 0; n < N; ++n)
        for (long k = 0; k < K; ++k) {
          T* row = out.data() + (n * K + k) * hw;
          const T b = bias->val.v[std::size_t(k)];
          for (long i = 0; i < hw; ++i) row[i] += b;
        }
  }

  std::vector<NodePtr<T>> ins{x, w};
  if (bias) ins.push_back(bias);
  return g.op(std::move(out), std::move(ins),
              [=](Node<T>& self) {
                T* dw = grad_sink(w);
                T* dx = grad_sink(x);
                T* db = bias ? grad_sink(bias) : nullptr;
                std::vector<T> cols((dw && !pointwise) ? ckk * hw : 0);
                std::vector<T> dcols((dx && !pointwise) ? ckk * hw : 0);
                for (long n = 0; n < N; ++n) {
                  const T* dout = self.grad.data() + n * K * hw;
                  const T* xn = x->val.data() + n * C * H * W;
                  if (dw) {
                    if (!pointwise)
                      detail::im2col(xn, C, H, W, kh, kw, stride, pad, Ho, Wo,
                                     cols.data());
                    gemm(false, true, int(K), int(ckk), int(hw), T(1), dout,
                         int(hw), pointwise ? xn : cols.data(), int(hw), T(1), dw,
                         int(ckk));
                  }
                  if (dx) {
                    T* dxn = dx + n * C * H * W;
                    if (pointwise) {
                      gemm(true, false, int(ckk), int(hw), int(K), T(1),
                           w->val.data(), int(ckk), dout, int(hw), T(1), dxn,
                           int(hw));
                    } else {
                      gemm(true, false, int(ckk), int(hw), int(K), T(1),
                           w->val.data(), int(ckk), dout, int(hw), T(0),
                           dcols.data(), int(hw));
                      detail::col2im_acc(dcols.data(), C, H, W, kh, kw, stride,
                                         pad, Ho, Wo, dxn);
                    }
                  }
                  if (db)
                    for (long k = 0; k < K; ++k) {
                      double s = 0;
                      const T* row = dout + k * hw;
                      for (long i = 0; i < hw; ++i) s += double(row[i]);
                      db[k] += T(s);
                    }
                }
              });
}

template <typename T>
NodePtr<T> conv2d(Graph<T>& g, NodePtr<T> x, NodePtr<T> w, long stride,
                  long pad) {
  return conv2d(g, std::move(x), std::move(w), NodePtr<T>{}, stride, pad);
}

template <typename T>
NodePtr<T> relu(Graph<T>& g, NodePtr<T> x) {
  Tensor<T> out = x->val;
  for (auto& e : out.v) e = e > T(0) ? e : T(0);
  return g.op(std::move(out), {x}, [x](Node<T>& self) {
    if (T* dx = grad_sink(x)) {
      const T* xv = x->val.data();
      const T* dy = self.grad.data();
      const long n = self.val.numel();
      for (long i = 0; i < n; ++i)
        if (xv[i] > T(0)) dx[i] += dy[i];
    }
  });
}

template <typename T>
NodePtr<T> add(Graph<T>& g, NodePtr<T> a, NodePtr<T> b) {
  if (a->val.shape != b->val.shape)
    throw Error(Errc::shape_error, "add: shape mismatch " +
                                       shape_string(a->val.shape) + " vs " +
                                       shape_string(b->val.shape));
  Tensor<T> out = a->val;
  for (long i = 0; i < out.numel(); ++i) out.v[std::size_t(i)] += b->val.v[std::size_t(i)];
  return g.op(std::move(out), {a, b}, [a, b](Node<T>& self) {
    const T* dy = self.grad.data();
    const long n = self.val.numel();
    if (T* da = grad_sink(a))
      for (long i = 0; i < n; ++i) da[i] += dy[i];
    if (T* db = grad_sink(b))
      for (long i = 0; i < n; ++i) db[i] += dy[i];
  });
}

template <typename T>
NodePtr<T> maxpool2d(Graph<T>& g, NodePtr<T> x, long k, long stride, long pad) {
  const long N = x->val.size(0), C = x->val.size(1), H = x->val.size(2),
             W = x->val.size(3);
  const long Ho = (H + 2 * pad - k) / stride + 1;
  const long Wo = (W + 2 * pad - k) / stride + 1;
  Tensor<T> out({N, C, Ho, Wo});
  auto argmax = std::make_shared<std::vector<long>>(std::size_t(out.numel()));
  long o = 0;
  for (long n = 0; n < N; ++n)
    for (long c = 0; c < C; ++c) {
      const T* plane = x->val.data() + (n * C + c) * H * W;
      for (long oy = 0; oy < Ho; ++oy)
        for (long ox = 0; ox < Wo; ++ox, ++o) {
          T best{};
          long best_idx = -1;
          for (long i = 0; i < k; ++i) {
            const long iy = oy * stride - pad + i;
            if (iy < 0 || iy >= H) continue;
            for (long j = 0; j < k; ++j) {
              const long ix = ox * stride - pad + j;
              if (ix < 0 || ix >= W) continue;
              const T v = plane[iy * W + ix];
              if (best_idx < 0 || v > best) {
                best = v;
                best_idx = (n * C + c) * H * W + iy * W + ix;
              }
            }
          }
          out.v[std::size_t(o)] = best;
          (*argmax)[std::size_t(o)] = best_idx;
        }
    }
  return g.op(std::move(out), {x}, [x, argmax](Node<T>& self) {
    if (T* dx = grad_sink(x)) {
      const T* dy = self.grad.data();
      const long n = self.val.numel();
      for (long i = 0; i < n; ++i) dx[(*argmax)[std::size_t(i)]] += dy[i];
    }
  });
}

// Output bin i covers input rows [floor(i*H/out), ceil((i+1)*H/out)), the
// usual adaptive pooling convention; bins may overlap when out > H.
template <typename T>
NodePtr<T> adaptive_avg_pool(Graph<T>& g, NodePtr<T> x, long out_h, long out_w) {
  const long N = x->val.size(0), C = x->val.size(1), H = x->val.size(2),
             W = x->val.size(3);
  const auto lo = [](long i, long in, long out) { return (i * in) / out; };
  const auto hi = [](long i, long in, long out) {
    return ((i + 1) * in + out - 1) / out;
  };
  Tensor<T> out({N, C, out_h, out_w});
  long o = 0;
  for (long n = 0; n < N; ++n)
    for (long c = 0; c < C; ++c) {
      const T* plane = x->val.data() + (n * C + c) * H * W;
      for (long oy = 0; oy < out_h; ++oy)
        for (long ox = 0; ox < out_w; ++ox, ++o) {
          double s = 0;
          const long y0 = lo(oy, H, out_h), y1 = hi(oy, H, out_h);
          const long x0 = lo(ox, W, out_w), x1 = hi(ox, W, out_w);
          for (long iy = y0; iy < y1; ++iy)
            for (long ix = x0; ix < x1; ++ix) s += double(plane[iy * W + ix]);
          out.v[std::size_t(o)] = T(s / double((y1 - y0) * (x1 - x0)));
        }
    }
  return g.op(std::move(out), {x}, [x, out_h, out_w, N, C, H, W, lo, hi](Node<T>& self) {
    if (T* dx = grad_sink(x)) {
      const T* dy = self.grad.data();
      long o = 0;
      for (long n = 0; n < N; ++n)
        for (long c = 0; c < C; ++c) {
          T* dplane = dx + (n * C + c) * H * W;
          for (long oy = 0; oy < out_h; ++oy)
            for (long ox = 0; ox < out_w; ++ox, ++o) {
              const long y0 = lo(oy, H, out_h), y1 = hi(oy, H, out_h);
              const long x0 = lo(ox, W, out_w), x1 = hi(ox, W, out_w);
              const T share = dy[o] / T((y1 - y0) * (x1 - x0));
              for (long iy = y0; iy < y1; ++iy)
                for (long ix = x0; ix < x1; ++ix) dplane[iy * W + ix] += share;
            }
        }
    }
  });
}

// align_corners=false: source coordinate (dst+0.5)*in/out - 0.5, clamped.
template <typename T>
NodePtr<T> upsample_bilinear(Graph<T>& g, NodePtr<T> x, long out_h, long out_w) {
  const long N = x->val.size(0), C = x->val.size(1), H = x->val.size(2),
             W = x->val.size(3);
  struct Mix {
    long i0, i1;
    T w1;  // weight of i1; i0 gets 1-w1
  };
  const auto build = [](long in, long out) {
    std::vector<Mix> m(static_cast<std::size_t>(out));
    for (long o = 0; o < out; ++o) {
      double s = (double(o) + 0.5) * double(in) / double(out) - 0.5;
      s = std::max(0.0, std::min(s, double(in - 1)));
      const long i0 = long(s);
      m[std::size_t(o)] = {i0, std::min(i0 + 1, in - 1), T(s - double(i0))};
    }
    return m;
  };
  const auto ys = std::make_shared<std::vector<Mix>>(build(H, out_h));
  const auto xs = std::make_shared<std::vector<Mix>>(build(W, out_w));

  Tensor<T> out({N, C, out_h, out_w});
  for (long n = 0; n < N; ++n)
    for (long c = 0; c < C; ++c) {
      const T* plane = x->val.data() + (n * C + c) * H * W;
      T* op = out.data() + (n * C + c) * out_h * out_w;
      for (long oy = 0; oy < out_h; ++oy) {
        const Mix my = (*ys)[std::size_t(oy)];
        for (long ox = 0; ox < out_w; ++ox) {
          const Mix mx = (*xs)[std::size_t(ox)];
          const T top = plane[my.i0 * W + mx.i0] * (T(1) - mx.w1) +
                        plane[my.i0 * W + mx.i1] * mx.w1;
          const T bot = plane[my.i1 * W + mx.i0] * (T(1) - mx.w1) +
                        plane[my.i1 * W + mx.i1] * mx.w1;
          *op++ = top * (T(1) - my.w1) + bot * my.w1;
        }
      }
    }
  return g.op(std::move(out), {x}, [x, ys, xs, N, C, H, W, out_h, out_w](Node<T>& self) {
    if (T* dx = grad_sink(x)) {
      const T* dy = self.grad.data();
      for (long n = 0; n < N; ++n)
        for (long c = 0; c < C; ++c) {
          T* dplane = dx + (n * C + c) * H * W;
          const T* dp = dy + (n * C + c) * out_h * out_w;
          for (long oy = 0; oy < out_h; ++oy) {
            const Mix my = (*ys)[std::size_t(oy)];
            for (long ox = 0; ox < out_w; ++ox) {
              const Mix mx = (*xs)[std::size_t(ox)];
              const T d = *dp++;
              dplane[my.i0 * W + mx.i0] += d * (T(1) - my.w1) * (T(1) - mx.w1);
              dplane[my.i0 * W + mx.i1] += d * (T(1) - my.w1) * mx.w1;
              dplane[my.i1 * W + mx.i0] += d * my.w1 * (T(1) - mx.w1);
              dplane[my.i1 * W + mx.i1] += d * my.w1 * mx.w1;
            }
          }
        }
    }
  });
}

template <typename T>
NodePtr<T> concat_channels(Graph<T>& g, std::vector<NodePtr<T>> parts) {
  if (parts.empty()) throw Error(Errc::invalid_argument, "concat of nothing");
  const long N = parts[0]->val.size(0), H = parts[0]->val.size(2),
             W = parts[0]->val.size(3);
  long C = 0;
  for (const auto& p : parts) {
    if (p->val.size(0) != N || p->val.size(2) != H || p->val.size(3) != W)
      throw Error(Errc::shape_error, "concat_channels: spatial shapes differ");
    C += p->val.size(1);
  }
  Tensor<T> out({N, C, H, W});
  for (long n = 0; n < N; ++n) {
    long c_off = 0;
    for (const auto& p : parts) {
      const long pc = p->val.size(1);
      std::copy_n(p->val.data() + n * pc * H * W, pc * H * W,
                  out.data() + (n * C + c_off) * H * W);
      c_off += pc;
    }
  }
  return g.op(std::move(out), parts, [parts, N, C, H, W](Node<T>& self) {
    const T* dy = self.grad.data();
    for (long n = 0; n < N; ++n) {
      long c_off = 0;
      for (const auto& p : parts) {
        const long pc = p->val.size(1);
        if (T* dp = grad_sink(p)) {
          const T* src = dy + (n * C + c_off) * H * W;
          T* dst = dp + n * pc * H * W;
          for (long i = 0; i < pc * H * W; ++i) dst[i] += src[i];
        }
        c_off += pc;
      }
    }
  });
}

// Softmax probability of class 1 for two-class logits (N,2,H,W), flattened
// to N*H*W. Pure function, used at inference time.
template <typename T>
std::vector<T> burned_probability(const Tensor<T>& logits) {
  const long N = logits.size(0), H = logits.size(2), W = logits.size(3);
  if (logits.size(1) != 2)
    throw Error(Errc::shape_error, "expected two-class logits");
  std::vector<T> p(std::size_t(N * H * W));
  for (long n = 0; n < N; ++n) {
    const T* z0 = logits.data() + n * 2 * H * W;
    const T* z1 = z0 + H * W;
    T* out = p.data() + n * H * W;
    for (long i = 0; i < H * W; ++i) {
      const T m = std::max(z0[i], z1[i]);
      const T e0 = std::exp(z0[i] - m), e1 = std::exp(z1[i] - m);
      out[i] = e1 / (e0 + e1);
    }
  }
  return p;
}

// Pixel cross-entropy plus per-sample soft Dice on the positive class,
// weighted w_ce and w_dice. Labels are {0,1}, length N*H*W. The Dice smooth
// term (+1 in numerator and denominator) makes an empty-vs-empty sample
// score a perfect 1.
template <typename T>
NodePtr<T> segmentation_loss(Graph<T>& g, NodePtr<T> logits,
                             std::shared_ptr<const std::vector<std::uint8_t>> labels,
                             double w_ce, double w_dice) {
  const long N = logits->val.size(0), H = logits->val.size(2),
             W = logits->val.size(3);
  if (logits->val.size(1) != 2)
    throw Error(Errc::shape_error, "segmentation loss expects two-class logits");
  if (long(labels->size()) != N * H * W)
    throw Error(Errc::shape_error, "label count does not match logits");
  const long hw = H * W;
  constexpr double kSmooth = 1.0;

  auto numer = std::make_shared<std::vector<double>>(std::size_t(N));
  auto denom = std::make_shared<std::vector<double>>(std::size_t(N));
  double ce = 0;
  double dice_loss = 0;
  for (long n = 0; n < N; ++n) {
    const T* z0 = logits->val.data() + n * 2 * hw;
    const T* z1 = z0 + hw;
    const std::uint8_t* y = labels->data() + n * hw;
    double sp = 0, spy = 0, sy = 0;
    for (long i = 0; i < hw; ++i) {
      const double m = double(std::max(z0[i], z1[i]));
      const double e0 = std::exp(double(z0[i]) - m), e1 = std::exp(double(z1[i]) - m);
      const double lse = m + std::log(e0 + e1);
      const double p1 = e1 / (e0 + e1);
      ce -= (y[i] ? double(z1[i]) : double(z0[i])) - lse;
      sp += p1;
      spy += p1 * double(y[i]);
      sy += double(y[i]);
    }
    (*numer)[std::size_t(n)] = 2.0 * spy + kSmooth;
    (*denom)[std::size_t(n)] = sp + sy + kSmooth;
    dice_loss += 1.0 - (*numer)[std::size_t(n)] / (*denom)[std::size_t(n)];
  }
  ce /= double(N * hw);
  dice_loss /= double(N);

  Tensor<T> out({1});
  out.v[0] = T(w_ce * ce + w_dice * dice_loss);

  return g.op(std::move(out), {logits},
              [logits, labels, numer, denom, w_ce, w_dice, N, hw](Node<T>& self) {
                if (T* dz = grad_sink(logits)) {
                  const double seed = double(self.grad.v[0]);
                  const double ce_scale = w_ce * seed / double(N * hw);
                  for (long n = 0; n < N; ++n) {
                    const T* z0 = logits->val.data() + n * 2 * hw;
                    const T* z1 = z0 + hw;
                    const std::uint8_t* y = labels->data() + n * hw;
                    T* d0 = dz + n * 2 * hw;
                    T* d1 = d0 + hw;
                    const double A = (*numer)[std::size_t(n)];
                    const double B = (*denom)[std::size_t(n)];
                    const double dice_scale = w_dice * seed / double(N);
                    for (long i = 0; i < hw; ++i) {
                      const double m = double(std::max(z0[i], z1[i]));
                      const double e0 = std::exp(double(z0[i]) - m),
                                   e1 = std::exp(double(z1[i]) - m);
                      const double p1 = e1 / (e0 + e1);
                      const double p0 = 1.0 - p1;
                      // cross-entropy: dL/dz = p - onehot(y)
                      d1[i] += T(ce_scale * (p1 - double(y[i])));
                      d0[i] += T(ce_scale * (p0 - double(1 - y[i])));
                      // dice: d(1 - A/B)/dp1 = (A - 2 y B) / B^2, then the
                      // two-class softmax jacobian dp1/dz1 = p1 p0 = -dp1/dz0
                      const double dLdp1 =
                          dice_scale * (A - 2.0 * double(y[i]) * B) / (B * B);
                      d1[i] += T(dLdp1 * p1 * p0);
                      d0[i] -= T(dLdp1 * p1 * p0);
                    }
                  }
                }
              });
}

}  // namespace burnscan::nn
