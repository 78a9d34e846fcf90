#pragma once

// Training loop: seeded shuffling, mini-batches (the last one may be short),
// combined loss, holdout evaluation after every epoch, checkpoint on best
// holdout mean IoU. Runs single-threaded BLAS so results are reproducible.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "burnscan/dataset/labels.hpp"
#include "burnscan/metrics/scores.hpp"
#include "burnscan/nn/optim.hpp"
#include "burnscan/seg/network.hpp"
#include "burnscan/seg/predictor.hpp"

namespace burnscan::seg {

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double holdout_iou = 0.0;  // NaN when no holdout patches were given
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;        // 1-based; the epoch whose weights were kept
  double best_holdout_iou = 0.0;
};

namespace detail {

inline void check_patch_shapes(std::span<const dataset::LabeledPatch> patches) {
  for (const auto& p : patches)
    if (long(p.channels.size()) != 3 * kPatchPixels ||
        long(p.label.data.size()) != kPatchPixels)
      throw Error(Errc::shape_error, "patch " + p.patch_id + " is not 3x128x128");
}

struct Snapshot {
  std::vector<std::vector<float>> params, buffers;
};

inline Snapshot take_snapshot(nn::StateRefs<float>& st) {
  Snapshot s;
  for (auto& [name, p] : st.params) s.params.push_back(p->val.v);
  for (auto& [name, b] : st.buffers) s.buffers.push_back(b->v);
  return s;
}

inline void restore_snapshot(nn::StateRefs<float>& st, const Snapshot& s) {
  for (std::size_t i = 0; i < st.params.size(); ++i)
    st.params[i].second->val.v = s.params[i];
  for (std::size_t i = 0; i < st.buffers.size(); ++i)
    st.buffers[i].second->v = s.buffers[i];
}

}  // namespace detail

inline double holdout_mean_iou(Network<float>& net,
                               std::span<const dataset::LabeledPatch> patches,
                               int batch_size) {
  if (patches.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0;
  for (std::size_t start = 0; start < patches.size(); start += std::size_t(batch_size)) {
    const long b = long(std::min(patches.size() - start, std::size_t(batch_size)));
    std::vector<float> chans(std::size_t(b) * 3 * kPatchPixels);
    for (long i = 0; i < b; ++i)
      std::copy(patches[start + std::size_t(i)].channels.begin(),
                patches[start + std::size_t(i)].channels.end(),
                chans.begin() + i * 3 * kPatchPixels);
    const auto probs = predict_batch(net, chans, b);
    const auto pred = binarize(probs);
    for (long i = 0; i < b; ++i) {
      const auto score = metrics::score_counts(
          std::span<const std::uint8_t>(pred.data() + i * kPatchPixels,
                                        std::size_t(kPatchPixels)),
          patches[start + std::size_t(i)].label.data);
      sum += score.iou;
    }
  }
  return sum / double(patches.size());
}

inline TrainResult train(Network<float>& net,
                         std::span<const dataset::LabeledPatch> train_patches,
                         std::span<const dataset::LabeledPatch> holdout,
                         const ModelConfig& cfg) {
  if (train_patches.empty())
    throw Error(Errc::invalid_argument, "training requires at least one patch");
  cfg.validate();
  detail::check_patch_shapes(train_patches);
  detail::check_patch_shapes(holdout);
  nn::set_blas_threads(1);

  auto st = net.state();
  std::vector<nn::NodePtr<float>> params;
  for (auto& [name, p] : st.params) params.push_back(p);
  nn::Adam<float> opt(params, cfg.learning_rate);
  Rng shuffle_rng = Rng(cfg.seed).fork(1);
  const auto [w_ce, w_dice] = cfg.loss_weights();

  TrainResult result;
  double best = -1.0;
  detail::Snapshot best_snapshot;
  std::vector<std::size_t> order(train_patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0;
    long seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += std::size_t(cfg.batch_size)) {
      const long b =
          long(std::min(order.size() - start, std::size_t(cfg.batch_size)));
      nn::Tensor<float> x({b, 3, kPatchEdge, kPatchEdge});
      auto labels = std::make_shared<std::vector<std::uint8_t>>(
          std::size_t(b) * kPatchPixels);
      for (long i = 0; i < b; ++i) {
        const auto& p = train_patches[order[start + std::size_t(i)]];
        std::copy(p.channels.begin(), p.channels.end(),
                  x.v.begin() + i * 3 * kPatchPixels);
        std::copy(p.label.data.begin(), p.label.data.end(),
                  labels->begin() + i * kPatchPixels);
      }
      opt.zero_grad();
      nn::Graph<float> g;
      auto logits = net.forward(g, nn::make_input(std::move(x)), true);
      auto loss = nn::segmentation_loss(
          g, logits,
          std::shared_ptr<const std::vector<std::uint8_t>>(labels), w_ce, w_dice);
      const double batch_loss = double(loss->val.v[0]);
      if (!std::isfinite(batch_loss))
        throw Error(Errc::diverged_training,
                    "non-finite loss at epoch " + std::to_string(epoch));
      g.backward(loss);
      opt.step();
      loss_sum += batch_loss * double(b);
      seen += b;
    }

    const double iou = holdout_mean_iou(net, holdout, cfg.batch_size);
    result.history.push_back({epoch, loss_sum / double(seen), iou});
    if (!std::isnan(iou) && iou > best) {
      best = iou;
      result.best_epoch = epoch;
      best_snapshot = detail::take_snapshot(st);
    }
    if (cfg.early_stop_iou > 0.0 && !std::isnan(iou) && iou >= cfg.early_stop_iou)
      break;
  }

  if (result.best_epoch > 0) {
    detail::restore_snapshot(st, best_snapshot);
    result.best_holdout_iou = best;
  } else {
    // no holdout: keep the final weights
    result.best_epoch = int(result.history.size());
    result.best_holdout_iou = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace burnscan::seg
