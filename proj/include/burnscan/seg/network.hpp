#pragma once

// The segmentation network: an 18-layer residual encoder (stem + four
// stages of two basic blocks) and a pyramid-pooling decoder that fuses the
// pooled final features with encoder skip connections on the way back up to
// full resolution. Accepts any input whose sides are multiples of 32; the
// patch pipeline always feeds 128x128.

#include <array>
#include <string>
#include <vector>

#include "burnscan/nn/graph.hpp"
#include "burnscan/nn/layers.hpp"
#include "burnscan/nn/ops.hpp"
#include "burnscan/seg/config.hpp"
#include "burnscan/util/rng.hpp"

namespace burnscan::seg {

template <typename T>
struct BasicBlock {
  nn::Conv2d<T> conv1;
  nn::BatchNorm2d<T> bn1;
  nn::Conv2d<T> conv2;
  nn::BatchNorm2d<T> bn2;
  bool has_down = false;
  nn::Conv2d<T> down_conv;
  nn::BatchNorm2d<T> down_bn;

  BasicBlock() = default;
  BasicBlock(long in_ch, long out_ch, long stride, Rng& rng)
      : conv1(in_ch, out_ch, 3, stride, 1, false, rng),
        bn1(out_ch),
        conv2(out_ch, out_ch, 3, 1, 1, false, rng),
        bn2(out_ch),
        has_down(stride != 1 || in_ch != out_ch) {
    if (has_down) {
      down_conv = nn::Conv2d<T>(in_ch, out_ch, 1, stride, 0, false, rng);
      down_bn = nn::BatchNorm2d<T>(out_ch);
    }
  }

  nn::NodePtr<T> forward(nn::Graph<T>& g, nn::NodePtr<T> x, bool training) {
    auto y = nn::relu(g, bn1.forward(g, conv1.forward(g, x), training));
    y = bn2.forward(g, conv2.forward(g, y), training);
    auto identity = has_down ? down_bn.forward(g, down_conv.forward(g, x), training) : x;
    return nn::relu(g, nn::add(g, y, identity));
  }

  void collect(const std::string& prefix, nn::StateRefs<T>& out) {
    conv1.collect(prefix + ".conv1", out);
    bn1.collect(prefix + ".bn1", out);
    conv2.collect(prefix + ".conv2", out);
    bn2.collect(prefix + ".bn2", out);
    if (has_down) {
      down_conv.collect(prefix + ".down.conv", out);
      down_bn.collect(prefix + ".down.bn", out);
    }
  }
};

template <typename T>
class Network {
 public:
  // Move-only: parameters are shared nodes, so a copy would alias them.
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  explicit Network(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    const long w32 = scaled(32), w64 = scaled(64), w128 = scaled(128),
               w256 = scaled(256), w512 = scaled(512);

    stem_conv_ = nn::Conv2d<T>(cfg_.in_channels, w64, 7, 2, 3, false, rng);
    stem_bn_ = nn::BatchNorm2d<T>(w64);
    blocks_.reserve(8);
    blocks_.emplace_back(w64, w64, 1, rng);
    blocks_.emplace_back(w64, w64, 1, rng);
    blocks_.emplace_back(w64, w128, 2, rng);
    blocks_.emplace_back(w128, w128, 1, rng);
    blocks_.emplace_back(w128, w256, 2, rng);
    blocks_.emplace_back(w256, w256, 1, rng);
    blocks_.emplace_back(w256, w512, 2, rng);
    blocks_.emplace_back(w512, w512, 1, rng);

    for (std::size_t i = 0; i < kBins.size(); ++i) {
      psp_conv_[i] = nn::Conv2d<T>(w512, w128, 1, 1, 0, false, rng);
      psp_bn_[i] = nn::BatchNorm2d<T>(w128);
    }
    psp_fuse_ = nn::Conv2d<T>(w512 + long(kBins.size()) * w128, w256, 3, 1, 1, false, rng);
    psp_fuse_bn_ = nn::BatchNorm2d<T>(w256);

    dec4_ = nn::Conv2d<T>(w256 + w256, w128, 3, 1, 1, false, rng);
    dec4_bn_ = nn::BatchNorm2d<T>(w128);
    dec3_ = nn::Conv2d<T>(w128 + w128, w64, 3, 1, 1, false, rng);
    dec3_bn_ = nn::BatchNorm2d<T>(w64);
    dec2_ = nn::Conv2d<T>(w64 + w64, w64, 3, 1, 1, false, rng);
    dec2_bn_ = nn::BatchNorm2d<T>(w64);
    dec1_ = nn::Conv2d<T>(w64 + w64, w32, 3, 1, 1, false, rng);
    dec1_bn_ = nn::BatchNorm2d<T>(w32);
    head_ = nn::Conv2d<T>(w32, w32, 3, 1, 1, false, rng);
    head_bn_ = nn::BatchNorm2d<T>(w32);
    classifier_ = nn::Conv2d<T>(w32, cfg_.classes, 1, 1, 0, true, rng);
  }

  // Returns (N, classes, H, W) logits.
  nn::NodePtr<T> forward(nn::Graph<T>& g, nn::NodePtr<T> x, bool training) {
    const auto& s = x->val.shape;
    if (s.size() != 4 || s[1] != cfg_.in_channels)
      throw Error(Errc::shape_error,
                  "expected (N," + std::to_string(cfg_.in_channels) +
                      ",H,W) input, got " + nn::shape_string(s));
    const long H = s[2], W = s[3];
    if (H < 32 || W < 32 || H % 32 != 0 || W % 32 != 0)
      throw Error(Errc::shape_error,
                  "input sides must be multiples of 32, got " + nn::shape_string(s));

    auto c1 = nn::relu(g, stem_bn_.forward(g, stem_conv_.forward(g, x), training));
    auto p = nn::maxpool2d(g, c1, 3, 2, 1);
    auto c2 = blocks_[1].forward(g, blocks_[0].forward(g, p, training), training);
    auto c3 = blocks_[3].forward(g, blocks_[2].forward(g, c2, training), training);
    auto c4 = blocks_[5].forward(g, blocks_[4].forward(g, c3, training), training);
    auto c5 = blocks_[7].forward(g, blocks_[6].forward(g, c4, training), training);

    std::vector<nn::NodePtr<T>> pyramid{c5};
    for (std::size_t i = 0; i < kBins.size(); ++i) {
      auto pooled = nn::adaptive_avg_pool(g, c5, kBins[i], kBins[i]);
      auto branch =
          nn::relu(g, psp_bn_[i].forward(g, psp_conv_[i].forward(g, pooled), training));
      pyramid.push_back(nn::upsample_bilinear(g, branch, H / 32, W / 32));
    }
    auto d = nn::relu(g, psp_fuse_bn_.forward(
                             g, psp_fuse_.forward(g, nn::concat_channels(g, pyramid)),
                             training));

    d = nn::upsample_bilinear(g, d, H / 16, W / 16);
    d = nn::relu(g, dec4_bn_.forward(g, dec4_.forward(g, nn::concat_channels(g, {d, c4})),
                                     training));
    d = nn::upsample_bilinear(g, d, H / 8, W / 8);
    d = nn::relu(g, dec3_bn_.forward(g, dec3_.forward(g, nn::concat_channels(g, {d, c3})),
                                     training));
    d = nn::upsample_bilinear(g, d, H / 4, W / 4);
    d = nn::relu(g, dec2_bn_.forward(g, dec2_.forward(g, nn::concat_channels(g, {d, c2})),
                                     training));
    d = nn::upsample_bilinear(g, d, H / 2, W / 2);
    d = nn::relu(g, dec1_bn_.forward(g, dec1_.forward(g, nn::concat_channels(g, {d, c1})),
                                     training));
    d = nn::upsample_bilinear(g, d, H, W);
    d = nn::relu(g, head_bn_.forward(g, head_.forward(g, d), training));
    return classifier_.forward(g, d);
  }

  nn::StateRefs<T> state() {
    nn::StateRefs<T> out;
    stem_conv_.collect("stem.conv", out);
    stem_bn_.collect("stem.bn", out);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      blocks_[i].collect("block" + std::to_string(i), out);
    for (std::size_t i = 0; i < kBins.size(); ++i) {
      psp_conv_[i].collect("psp" + std::to_string(kBins[i]) + ".conv", out);
      psp_bn_[i].collect("psp" + std::to_string(kBins[i]) + ".bn", out);
    }
    psp_fuse_.collect("psp_fuse.conv", out);
    psp_fuse_bn_.collect("psp_fuse.bn", out);
    dec4_.collect("dec4.conv", out);
    dec4_bn_.collect("dec4.bn", out);
    dec3_.collect("dec3.conv", out);
    dec3_bn_.collect("dec3.bn", out);
    dec2_.collect("dec2.conv", out);
    dec2_bn_.collect("dec2.bn", out);
    dec1_.collect("dec1.conv", out);
    dec1_bn_.collect("dec1.bn", out);
    head_.collect("head.conv", out);
    head_bn_.collect("head.bn", out);
    classifier_.collect("classifier", out);
    return out;
  }

  std::vector<nn::NodePtr<T>> params() {
    std::vector<nn::NodePtr<T>> out;
    for (auto& [name, p] : state().params) out.push_back(p);
    return out;
  }

  long parameter_count() {
    long n = 0;
    for (auto& [name, p] : state().params) n += p->val.numel();
    return n;
  }

  const ModelConfig& config() const { return cfg_; }

 private:
  long scaled(long base) const {
    const long w = std::llround(double(base) * cfg_.width_mult);
    return w < 2 ? 2 : w;
  }

  static constexpr std::array<long, 4> kBins{1, 2, 3, 6};

  ModelConfig cfg_;
  nn::Conv2d<T> stem_conv_;
  nn::BatchNorm2d<T> stem_bn_;
  std::vector<BasicBlock<T>> blocks_;
  std::array<nn::Conv2d<T>, 4> psp_conv_;
  std::array<nn::BatchNorm2d<T>, 4> psp_bn_;
  nn::Conv2d<T> psp_fuse_;
  nn::BatchNorm2d<T> psp_fuse_bn_;
  nn::Conv2d<T> dec4_, dec3_, dec2_, dec1_, head_, classifier_;
  nn::BatchNorm2d<T> dec4_bn_, dec3_bn_, dec2_bn_, dec1_bn_, head_bn_;
};

}  // namespace burnscan::seg
