#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <utility>

#include "burnscan/util/error.hpp"

namespace burnscan::seg {

// Model and training hyperparameters. width_mult scales every channel count
// so a reduced-width variant with the identical topology can run fast tests;
// early_stop_iou, when positive, ends training once the holdout mean IoU
// reaches it.
struct ModelConfig {
  std::string encoder = "resnet18-topology";
  std::string decoder = "pyramid-pooling";
  int in_channels = 3;
  int classes = 2;
  int batch_size = 16;
  double learning_rate = 1e-3;
  int max_epochs = 20;
  std::string loss = "combined";  // cross-entropy | dice | combined
  std::uint64_t seed = 0;
  double width_mult = 1.0;
  double early_stop_iou = 0.0;

  void validate() const {
    if (encoder != "resnet18-topology")
      throw Error(Errc::invalid_config, "unknown encoder \"" + encoder + "\"");
    if (decoder != "pyramid-pooling")
      throw Error(Errc::invalid_config, "unknown decoder \"" + decoder + "\"");
    if (in_channels != 3)
      throw Error(Errc::invalid_config, "in_channels must be 3");
    if (classes != 2) throw Error(Errc::invalid_config, "classes must be 2");
    if (batch_size < 1) throw Error(Errc::invalid_config, "batch_size must be >= 1");
    if (!(learning_rate > 0))
      throw Error(Errc::invalid_config, "learning_rate must be positive");
    if (max_epochs < 1) throw Error(Errc::invalid_config, "max_epochs must be >= 1");
    if (loss != "cross-entropy" && loss != "dice" && loss != "combined")
      throw Error(Errc::invalid_config, "unknown loss \"" + loss + "\"");
    if (!(width_mult > 0.0) || width_mult > 4.0)
      throw Error(Errc::invalid_config, "width_mult must lie in (0, 4]");
    if (early_stop_iou < 0.0 || early_stop_iou > 1.0)
      throw Error(Errc::invalid_config, "early_stop_iou must lie in [0, 1]");
  }

  // (w_ce, w_dice)
  std::pair<double, double> loss_weights() const {
    if (loss == "cross-entropy") return {1.0, 0.0};
    if (loss == "dice") return {0.0, 1.0};
    return {0.5, 0.5};
  }
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"encoder", c.encoder},
          {"decoder", c.decoder},
          {"in_channels", c.in_channels},
          {"classes", c.classes},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"max_epochs", c.max_epochs},
          {"loss", c.loss},
          {"seed", c.seed},
          {"width_mult", c.width_mult},
          {"early_stop_iou", c.early_stop_iou}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.encoder = j.value("encoder", c.encoder);
    c.decoder = j.value("decoder", c.decoder);
    c.in_channels = j.value("in_channels", c.in_channels);
    c.classes = j.value("classes", c.classes);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.loss = j.value("loss", c.loss);
    c.seed = j.value("seed", c.seed);
    c.width_mult = j.value("width_mult", c.width_mult);
    c.early_stop_iou = j.value("early_stop_iou", c.early_stop_iou);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace burnscan::seg
