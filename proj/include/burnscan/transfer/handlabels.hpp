#pragma once

#include <span>

#include "burnscan/dataset/labels.hpp"
#include "burnscan/metrics/evaluate.hpp"
#include "burnscan/seg/predictor.hpp"

namespace burnscan::transfer {

// Scores the model on hand-labeled target-region patches. Same mechanics as
// source-domain evaluation; the report is tagged so downstream consumers can
// tell the two apart.
inline metrics::EvalReport evaluate_handlabels(
    seg::Network<float>& model, std::span<const dataset::LabeledPatch> patches,
    double threshold = 0.5) {
  auto report = metrics::evaluate(
      [&model](std::span<const float> channels) {
        return seg::predict_patch(model, channels);
      },
      patches, threshold);
  report.domain = "transfer";
  return report;
}

}  // namespace burnscan::transfer
