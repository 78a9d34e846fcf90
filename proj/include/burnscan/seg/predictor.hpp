#pragma once

#include <span>
#include <vector>

#include "burnscan/seg/network.hpp"

namespace burnscan::seg {

constexpr long kPatchEdge = 128;
constexpr long kPatchPixels = kPatchEdge * kPatchEdge;

// channels: n patches of planar (3, 128, 128) data back to back. Returns
// n * 128 * 128 burned-class probabilities. Evaluation-mode forward: running
// statistics are read, never written, so calls do not mutate the network.
inline std::vector<float> predict_batch(Network<float>& net,
                                        std::span<const float> channels, long n) {
  const long per = 3 * kPatchPixels;
  if (n < 1 || long(channels.size()) != n * per)
    throw Error(Errc::shape_error,
                "expected " + std::to_string(n) + " patches of 3x128x128 channels, got " +
                    std::to_string(channels.size()) + " values");
  nn::Tensor<float> x({n, 3, kPatchEdge, kPatchEdge});
  std::copy(channels.begin(), channels.end(), x.v.begin());
  nn::Graph<float> g;
  auto logits = net.forward(g, nn::make_input(std::move(x)), false);
  return nn::burned_probability(logits->val);
}

inline std::vector<float> predict_patch(Network<float>& net,
                                        std::span<const float> channels) {
  return predict_batch(net, channels, 1);
}

// mask[i] = 1 iff p[i] >= threshold.
inline std::vector<std::uint8_t> binarize(std::span<const float> probs,
                                          double threshold = 0.5) {
  std::vector<std::uint8_t> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out[i] = double(probs[i]) >= threshold ? 1 : 0;
  return out;
}

}  // namespace burnscan::seg
