#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "burnscan/nn/graph.hpp"
#include "burnscan/nn/ops.hpp"
#include "burnscan/util/rng.hpp"

namespace burnscan::nn {

// Named views over a model's state: "params" take gradients, "buffers"
// (batch-norm running statistics) do not but must serialize with them.
template <typename T>
struct StateRefs {
  std::vector<std::pair<std::string, NodePtr<T>>> params;
  std::vector<std::pair<std::string, Tensor<T>*>> buffers;
};

template <typename T>
struct Conv2d {
  NodePtr<T> w;  // (out, in, k, k)
  NodePtr<T> b;  // (out) or null; convolutions feeding a batch norm skip it
  long stride = 1, pad = 0;

  Conv2d() = default;
  Conv2d(long in_ch, long out_ch, long k, long stride_, long pad_, bool bias,
         Rng& rng)
      : w(make_param<T>({out_ch, in_ch, k, k})), stride(stride_), pad(pad_) {
    const double std_dev = std::sqrt(2.0 / double(in_ch * k * k));
    for (auto& e : w->val.v) e = T(rng.normal(0.0, std_dev));
    if (bias) b = make_param<T>({out_ch});
  }

  NodePtr<T> forward(Graph<T>& g, NodePtr<T> x) const {
    return conv2d(g, x, w, b, stride, pad);
  }

  void collect(const std::string& prefix, StateRefs<T>& out) {
    out.params.emplace_back(prefix + ".w", w);
    if (b) out.params.emplace_back(prefix + ".b", b);
  }
};

template <typename T>
struct BatchNorm2d {
  NodePtr<T> gamma, beta;
  Tensor<T> running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  BatchNorm2d() = default;
  explicit BatchNorm2d(long channels)
      : gamma(make_param<T>({channels})),
        beta(make_param<T>({channels})),
        running_mean(Tensor<T>::zeros({channels})),
        running_var(Tensor<T>::zeros({channels})) {
    for (auto& e : gamma->val.v) e = T(1);
    for (auto& e : running_var.v) e = T(1);
  }

  // Training normalizes with batch statistics (biased variance) and blends
  // the unbiased variance into the running buffers; evaluation normalizes
  // with the running buffers alone.
  NodePtr<T> forward(Graph<T>& g, NodePtr<T> x, bool training) {
    const long N = x->val.size(0), C = x->val.size(1), H = x->val.size(2),
               W = x->val.size(3);
    const long m = N * H * W;
    auto mean = std::make_shared<std::vector<double>>(std::size_t(C));
    auto invstd = std::make_shared<std::vector<double>>(std::size_t(C));

    for (long c = 0; c < C; ++c) {
      double mu, var;
      if (training) {
        double s = 0, s2 = 0;
        for (long n = 0; n < N; ++n) {
          const T* plane = x->val.data() + (n * C + c) * H * W;
          for (long i = 0; i < H * W; ++i) {
            s += double(plane[i]);
            s2 += double(plane[i]) * double(plane[i]);
          }
        }
        mu = s / double(m);
        var = s2 / double(m) - mu * mu;
        if (var < 0) var = 0;
        const double unbiased = m > 1 ? var * double(m) / double(m - 1) : var;
        running_mean.v[std::size_t(c)] =
            T((1.0 - momentum) * double(running_mean.v[std::size_t(c)]) + momentum * mu);
        running_var.v[std::size_t(c)] =
            T((1.0 - momentum) * double(running_var.v[std::size_t(c)]) +
              momentum * unbiased);
      } else {
        mu = double(running_mean.v[std::size_t(c)]);
        var = double(running_var.v[std::size_t(c)]);
      }
      (*mean)[std::size_t(c)] = mu;
      (*invstd)[std::size_t(c)] = 1.0 / std::sqrt(var + eps);
    }

    Tensor<T> out(x->val.shape);
    for (long n = 0; n < N; ++n)
      for (long c = 0; c < C; ++c) {
        const T* in = x->val.data() + (n * C + c) * H * W;
        T* op = out.data() + (n * C + c) * H * W;
        const T mu = T((*mean)[std::size_t(c)]);
        const T is = T((*invstd)[std::size_t(c)]);
        const T ga = gamma->val.v[std::size_t(c)];
        const T be = beta->val.v[std::size_t(c)];
        for (long i = 0; i < H * W; ++i) op[i] = (in[i] - mu) * is * ga + be;
      }

    auto gm = gamma;
    auto bt = beta;
    return g.op(
        std::move(out), {x, gamma, beta},
        [x, gm, bt, mean, invstd, training, N, C, H, W, m](Node<T>& self) {
          const T* dy = self.grad.data();
          T* dx = grad_sink(x);
          T* dg = grad_sink(gm);
          T* db = grad_sink(bt);
          for (long c = 0; c < C; ++c) {
            const double mu = (*mean)[std::size_t(c)];
            const double is = (*invstd)[std::size_t(c)];
            const double ga = double(gm->val.v[std::size_t(c)]);
            double sum_dy = 0, sum_dy_xhat = 0;
            for (long n = 0; n < N; ++n) {
              const T* xin = x->val.data() + (n * C + c) * H * W;
              const T* d = dy + (n * C + c) * H * W;
              for (long i = 0; i < H * W; ++i) {
                sum_dy += double(d[i]);
                sum_dy_xhat += double(d[i]) * (double(xin[i]) - mu) * is;
              }
            }
            if (dg) dg[c] += T(sum_dy_xhat);
            if (db) db[c] += T(sum_dy);
            if (!dx) continue;
            for (long n = 0; n < N; ++n) {
              const T* xin = x->val.data() + (n * C + c) * H * W;
              const T* d = dy + (n * C + c) * H * W;
              T* dxp = dx + (n * C + c) * H * W;
              if (training) {
                for (long i = 0; i < H * W; ++i) {
                  const double xhat = (double(xin[i]) - mu) * is;
                  dxp[i] += T(ga * is *
                              (double(d[i]) - sum_dy / double(m) -
                               xhat * sum_dy_xhat / double(m)));
                }
              } else {
                for (long i = 0; i < H * W; ++i) dxp[i] += T(ga * is * double(d[i]));
              }
            }
          }
        });
  }

  void collect(const std::string& prefix, StateRefs<T>& out) {
    out.params.emplace_back(prefix + ".gamma", gamma);
    out.params.emplace_back(prefix + ".beta", beta);
    out.buffers.emplace_back(prefix + ".running_mean", &running_mean);
    out.buffers.emplace_back(prefix + ".running_var", &running_var);
  }
};

}  // namespace burnscan::nn
