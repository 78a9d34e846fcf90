#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "burnscan/geo/mask.hpp"
#include "burnscan/util/error.hpp"

namespace burnscan::metrics {

struct PatchScore {
  std::string patch_id;
  double iou = 0.0;
  double dice = 0.0;
  long pred_positive = 0;
  long gt_positive = 0;
  long intersection = 0;
  bool empty_pair = false;  // both masks empty; scored 1.0 by convention

  long union_count() const { return pred_positive + gt_positive - intersection; }
};

// Raw overlap counts; the one place pixels are actually compared.
inline PatchScore score_counts(std::span<const std::uint8_t> pred,
                               std::span<const std::uint8_t> gt,
                               std::string patch_id = {}) {
  if (pred.size() != gt.size())
    throw Error(Errc::shape_mismatch, "prediction and ground truth sizes differ");
  PatchScore s;
  s.patch_id = std::move(patch_id);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    s.pred_positive += pred[i] != 0;
    s.gt_positive += gt[i] != 0;
    s.intersection += (pred[i] != 0) && (gt[i] != 0);
  }
  const long uni = s.union_count();
  if (uni == 0) {
    // Never exercised by burned-only training patches; at transfer time a
    // correctly predicted empty patch counts as 1.0 and is flagged so
    // reports can exclude it.
    s.empty_pair = true;
    s.iou = 1.0;
    s.dice = 1.0;
    return s;
  }
  s.iou = double(s.intersection) / double(uni);
  s.dice = 2.0 * double(s.intersection) / double(s.pred_positive + s.gt_positive);
  return s;
}

inline PatchScore score_masks(const geo::BinaryMask& pred, const geo::BinaryMask& gt,
                              std::string patch_id = {}) {
  if (pred.grid.width != gt.grid.width || pred.grid.height != gt.grid.height)
    throw Error(Errc::shape_mismatch, "mask shapes differ");
  return score_counts(pred.data, gt.data, std::move(patch_id));
}

inline double iou(const geo::BinaryMask& pred, const geo::BinaryMask& gt) {
  return score_masks(pred, gt).iou;
}

inline double dice(const geo::BinaryMask& pred, const geo::BinaryMask& gt) {
  return score_masks(pred, gt).dice;
}

}  // namespace burnscan::metrics
