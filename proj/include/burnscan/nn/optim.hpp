#pragma once

#include <cmath>
#include <vector>

#include "burnscan/nn/graph.hpp"

namespace burnscan::nn {

// Adam with bias correction, no weight decay, no schedule.
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<NodePtr<T>> params, double lr = 1e-3,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
      m_.push_back(Tensor<T>::zeros(p->val.shape));
      v_.push_back(Tensor<T>::zeros(p->val.shape));
    }
  }

  void zero_grad() {
    for (auto& p : params_)
      std::fill(p->ensure_grad().v.begin(), p->grad.v.end(), T(0));
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
      auto& p = params_[pi]->val.v;
      const auto& g = params_[pi]->grad.v;
      auto& m = m_[pi].v;
      auto& v = v_[pi].v;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = double(g[i]);
        const double mi = beta1_ * double(m[i]) + (1.0 - beta1_) * gi;
        const double vi = beta2_ * double(v[i]) + (1.0 - beta2_) * gi * gi;
        m[i] = T(mi);
        v[i] = T(vi);
        p[i] -= T(lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps_));
      }
    }
  }

  long steps() const { return t_; }

 private:
  std::vector<NodePtr<T>> params_;
  std::vector<Tensor<T>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace burnscan::nn
