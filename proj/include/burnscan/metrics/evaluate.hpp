#pragma once

#include <span>
#include <vector>

#include "burnscan/dataset/labels.hpp"
#include "burnscan/metrics/report.hpp"
#include "burnscan/metrics/scores.hpp"

namespace burnscan::metrics {

// Scores a predictor over labeled patches: probabilities, threshold at
// p >= threshold, per-patch IoU/Dice against the labels. The predictor is
// any callable mapping planar (3,128,128) channels to 128*128 probabilities,
// so evaluation does not care whether predictions come from the network or a
// test oracle.
template <typename PredictFn>
EvalReport evaluate(PredictFn&& predict,
                    std::span<const dataset::LabeledPatch> patches,
                    double threshold = 0.5) {
  if (patches.empty()) throw Error(Errc::empty_scores, "no patches to evaluate");
  std::vector<PatchScore> scores;
  scores.reserve(patches.size());
  for (const auto& p : patches) {
    const std::vector<float> probs = predict(std::span<const float>(p.channels));
    if (probs.size() != p.label.data.size())
      throw Error(Errc::shape_mismatch,
                  "predictor output size does not match label for " + p.patch_id);
    std::vector<std::uint8_t> pred(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
      pred[i] = double(probs[i]) >= threshold ? 1 : 0;
    scores.push_back(score_counts(pred, p.label.data, p.patch_id));
  }
  return aggregate(scores);
}

}  // namespace burnscan::metrics
