#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <vector>

#include "burnscan/dataset/synthetic.hpp"
#include "burnscan/metrics/evaluate.hpp"
#include "burnscan/seg/config.hpp"
#include "burnscan/seg/network.hpp"
#include "burnscan/seg/predictor.hpp"
#include "burnscan/seg/train.hpp"
#include "burnscan/seg/weights.hpp"
#include "burnscan/util/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/tempdir.hpp"

using namespace burnscan;
using Catch::Matchers::ContainsSubstring;

namespace {

seg::ModelConfig tiny_config() {
  seg::ModelConfig cfg;
  cfg.width_mult = 0.25;
  cfg.batch_size = 8;
  cfg.seed = 9;
  return cfg;
}

std::vector<float> random_patch_channels(Rng& rng, long n = 1) {
  std::vector<float> v(std::size_t(n) * 3 * seg::kPatchPixels);
  for (auto& x : v) x = float(rng.uniform(0.0, 1.0));
  return v;
}

// Four 128x128 patches per 256x256 synthetic scene.
std::vector<dataset::LabeledPatch> synth_patches(int scenes,
                                                 std::uint64_t seed0) {
  std::vector<dataset::LabeledPatch> all;
  for (int s = 0; s < scenes; ++s) {
    dataset::SyntheticSpec spec;
    spec.size = 256;
    spec.n_burns = 3;
    spec.seed = seed0 + std::uint64_t(s);
    spec.scene_id = "S" + std::to_string(s);
    const auto scene = dataset::generate_synthetic_scene(spec);
    auto ex = dataset::extract_patches(scene.composite, scene.burns);
    for (auto& p : ex.patches) all.push_back(std::move(p));
  }
  return all;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("identical seeds build identical networks") {
  const auto cfg = tiny_config();
  seg::Network<float> a(cfg);
  seg::Network<float> b(cfg);

  auto sa = a.state();
  auto sb = b.state();
  REQUIRE(sa.params.size() == sb.params.size());
  for (std::size_t i = 0; i < sa.params.size(); ++i) {
    CHECK(sa.params[i].first == sb.params[i].first);
    CHECK(sa.params[i].second->val.v == sb.params[i].second->val.v);
  }
  CHECK(a.parameter_count() == b.parameter_count());
  CHECK(a.parameter_count() > 10000);

  auto cfg2 = cfg;
  cfg2.seed = cfg.seed + 1;
  seg::Network<float> c(cfg2);
  auto sc = c.state();
  bool any_differs = false;
  for (std::size_t i = 0; i < sa.params.size() && !any_differs; ++i)
    any_differs = sa.params[i].second->val.v != sc.params[i].second->val.v;
  CHECK(any_differs);
}

TEST_CASE("forward produces two-class logits at input resolution") {
  auto cfg = tiny_config();
  cfg.width_mult = 0.125;
  seg::Network<float> net(cfg);
  Rng rng(3);

  nn::Tensor<float> x({2, 3, 64, 32});
  for (auto& v : x.v) v = float(rng.uniform(0.0, 1.0));
  nn::Graph<float> g;
  auto y = net.forward(g, nn::make_input(std::move(x)), false);
  REQUIRE(y->val.shape == std::vector<long>{2, 2, 64, 32});
  for (float v : y->val.v) CHECK(std::isfinite(v));

  SECTION("dimensions off the 32-pixel lattice are rejected") {
    nn::Graph<float> g2;
    nn::Tensor<float> bad({1, 3, 127, 128});
    REQUIRE_THROWS_WITH(net.forward(g2, nn::make_input(std::move(bad)), false),
                        ContainsSubstring("ShapeError"));
    nn::Tensor<float> chans({1, 5, 32, 32});
    REQUIRE_THROWS_WITH(net.forward(g2, nn::make_input(std::move(chans)), false),
                        ContainsSubstring("ShapeError"));
  }

  SECTION("batched patch prediction guards its span size") {
    std::vector<float> short_span(3 * seg::kPatchPixels - 1);
    REQUIRE_THROWS_WITH(seg::predict_patch(net, short_span),
                        ContainsSubstring("3x128x128"));
    REQUIRE_THROWS_WITH(
        seg::predict_batch(net, random_patch_channels(rng, 2), 3),
        ContainsSubstring("ShapeError"));
  }
}

TEST_CASE("prediction is deterministic and bounded") {
  auto cfg = tiny_config();
  cfg.width_mult = 0.125;
  seg::Network<float> net(cfg);
  Rng rng(5);

  const auto chans = random_patch_channels(rng);
  const auto p1 = seg::predict_patch(net, chans);
  const auto p2 = seg::predict_patch(net, chans);
  REQUIRE(p1.size() == std::size_t(seg::kPatchPixels));
  CHECK(p1 == p2);

  // A constant-zero patch must still produce valid probabilities.
  const std::vector<float> zeros(3 * seg::kPatchPixels, 0.0f);
  for (float v : seg::predict_patch(net, zeros)) {
    REQUIRE(std::isfinite(v));
    REQUIRE(v >= 0.0f);
    REQUIRE(v <= 1.0f);
  }

  for (int trial = 0; trial < 6; ++trial) {
    const auto probs = seg::predict_patch(net, random_patch_channels(rng));
    for (float v : probs) {
      REQUIRE(std::isfinite(v));
      REQUIRE(v >= 0.0f);
      REQUIRE(v <= 1.0f);
    }
  }

  const auto hard = seg::binarize(p1, 0.5);
  for (std::size_t i = 0; i < hard.size(); ++i)
    CHECK(hard[i] == (p1[i] >= 0.5f ? 1 : 0));
}

TEST_CASE("network gradients match finite differences end to end") {
  seg::ModelConfig cfg;
  cfg.width_mult = 0.125;
  cfg.seed = 5;
  seg::Network<double> net(cfg);

  Rng rng(71);
  nn::Tensor<double> x({2, 3, 32, 32});
  for (auto& v : x.v) v = rng.uniform(0.0, 1.0);
  auto xin = nn::make_input(std::move(x));
  std::vector<std::uint8_t> lbl(2 * 32 * 32);
  for (auto& v : lbl) v = std::uint8_t(rng.uniform_int(0, 1));
  auto labels = std::make_shared<const std::vector<std::uint8_t>>(std::move(lbl));

  auto st = net.state();
  std::vector<nn::NodePtr<double>> params;
  for (auto& [name, p] : st.params) params.push_back(p);

  auto run = [&](bool backward) {
    nn::Graph<double> g;
    auto loss =
        nn::segmentation_loss(g, net.forward(g, xin, true), labels, 0.5, 0.5);
    if (backward) g.backward(loss);
    return loss->val.v[0];
  };
  for (auto& p : params) std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0);
  run(true);

  auto r = testsupport::fd_check(params, [&] { return run(false); }, rng, 12);
  CHECK(r.checked == 12);
  CHECK(r.max_rel_err < 1e-3);
}

TEST_CASE("weights round-trip bit-exactly through the container") {
  testsupport::TempDir td;
  auto cfg = tiny_config();
  cfg.width_mult = 0.125;
  seg::Network<float> net(cfg);
  Rng rng(13);

  // One training-mode pass moves the batch norm running statistics away
  // from their initial values, so buffers are exercised too.
  {
    nn::Tensor<float> x({2, 3, 32, 32});
    for (auto& v : x.v) v = float(rng.uniform(0.0, 1.0));
    nn::Graph<float> g;
    net.forward(g, nn::make_input(std::move(x)), true);
  }

  const auto probe = random_patch_channels(rng);
  const auto before = seg::predict_patch(net, probe);

  const auto path = td.file("model.bsw");
  seg::save_weights(net, path);
  auto loaded = seg::load_weights(path);

  CHECK(loaded.config().width_mult == cfg.width_mult);
  CHECK(loaded.config().seed == cfg.seed);

  auto sa = net.state();
  auto sb = loaded.state();
  REQUIRE(sa.params.size() == sb.params.size());
  for (std::size_t i = 0; i < sa.params.size(); ++i)
    REQUIRE(sa.params[i].second->val.v == sb.params[i].second->val.v);
  REQUIRE(sa.buffers.size() == sb.buffers.size());
  for (std::size_t i = 0; i < sa.buffers.size(); ++i)
    REQUIRE(sa.buffers[i].second->v == sb.buffers[i].second->v);

  const auto after = seg::predict_patch(loaded, probe);
  CHECK(before == after);

  // Serialization itself is deterministic.
  const auto path2 = td.file("model2.bsw");
  seg::save_weights(net, path2);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("weight files reject tampering") {
  testsupport::TempDir td;
  auto cfg = tiny_config();
  cfg.width_mult = 0.125;
  seg::Network<float> net(cfg);
  const auto path = td.file("model.bsw");
  seg::save_weights(net, path);
  const std::string good = slurp(path);

  auto write_bytes = [&](const std::string& name, const std::string& bytes) {
    const auto p = td.file(name);
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    return p;
  };

  SECTION("missing file") {
    REQUIRE_THROWS_WITH(seg::load_weights(td.file("nope.bsw")),
                        ContainsSubstring("ReadFailure"));
  }

  SECTION("truncation") {
    REQUIRE_THROWS_WITH(
        seg::load_weights(write_bytes("t.bsw", good.substr(0, good.size() - 5))),
        ContainsSubstring("CorruptFile"));
    REQUIRE_THROWS_WITH(seg::load_weights(write_bytes("t2.bsw", good.substr(0, 6))),
                        ContainsSubstring("CorruptFile"));
  }

  SECTION("a flipped payload byte fails the checksum") {
    std::string bad = good;
    bad[bad.size() / 2] = char(bad[bad.size() / 2] ^ 0x5a);
    REQUIRE_THROWS_WITH(seg::load_weights(write_bytes("flip.bsw", bad)),
                        ContainsSubstring("checksum mismatch"));
  }

  SECTION("unknown container version") {
    std::string bad = good;
    bad[4] = char(9);  // version field sits right after the 4-byte magic
    REQUIRE_THROWS_WITH(seg::load_weights(write_bytes("v9.bsw", bad)),
                        ContainsSubstring("VersionMismatch"));
  }

  SECTION("wrong magic") {
    std::string bad = good;
    bad[0] = 'X';
    REQUIRE_THROWS_WITH(seg::load_weights(write_bytes("magic.bsw", bad)),
                        ContainsSubstring("bad magic"));
  }
}

TEST_CASE("training learns the synthetic burn signature") {
  auto patches = synth_patches(10, 100);
  REQUIRE(patches.size() == 40);
  std::vector<dataset::LabeledPatch> holdout(patches.begin() + 32, patches.end());
  patches.resize(32);

  auto cfg = tiny_config();
  cfg.max_epochs = 8;
  cfg.learning_rate = 2e-3;
  cfg.early_stop_iou = 0.9;
  seg::Network<float> net(cfg);

  const auto result = seg::train(net, patches, holdout, cfg);
  REQUIRE(!result.history.empty());
  REQUIRE(result.history.size() <= 8);
  for (const auto& e : result.history) {
    CHECK(std::isfinite(e.train_loss));
    CHECK(e.train_loss >= 0.0);
    CHECK(std::isfinite(e.holdout_iou));
  }
  CHECK(result.history.back().train_loss < result.history.front().train_loss);
  CHECK(result.best_epoch >= 1);
  CHECK(result.best_epoch <= int(result.history.size()));
  CHECK(result.best_holdout_iou >= 0.8);

  // The kept weights are the checkpoint of the best epoch, so re-scoring the
  // holdout set must reproduce the reported best.
  const double rescored = seg::holdout_mean_iou(net, holdout, cfg.batch_size);
  CHECK(rescored == Catch::Approx(result.best_holdout_iou).margin(1e-9));
}

TEST_CASE("training rejects unusable inputs") {
  auto cfg = tiny_config();
  seg::Network<float> net(cfg);
  std::vector<dataset::LabeledPatch> none;
  REQUIRE_THROWS_WITH(seg::train(net, none, none, cfg),
                      ContainsSubstring("at least one patch"));

  dataset::LabeledPatch bad;
  bad.patch_id = "stub";
  bad.channels.assign(10, 0.0f);
  std::vector<dataset::LabeledPatch> shapeless{bad};
  REQUIRE_THROWS_WITH(seg::train(net, shapeless, none, cfg),
                      ContainsSubstring("not a 3x128x128") ||
                          ContainsSubstring("3x128x128"));
}

TEST_CASE("evaluation scores a predictor against patch labels") {
  const auto patches = synth_patches(2, 400);
  REQUIRE(patches.size() == 8);

  SECTION("a perfect oracle scores 1.0") {
    std::size_t cursor = 0;
    auto oracle = [&patches, &cursor](std::span<const float>) {
      const auto& lbl = patches[cursor++].label.data;
      std::vector<float> probs(lbl.size());
      for (std::size_t i = 0; i < lbl.size(); ++i) probs[i] = lbl[i] ? 1.0f : 0.0f;
      return probs;
    };
    const auto report = metrics::evaluate(oracle, patches);
    CHECK(report.n_patches == 8);
    CHECK(report.mean_iou == 1.0);
    CHECK(report.mean_dice == 1.0);
    CHECK(report.std_iou == 0.0);
  }

  SECTION("a constant-zero predictor scores 0.0 on burned patches") {
    std::vector<dataset::LabeledPatch> burned;
    for (const auto& p : patches)
      if (p.burned_fraction > 0.0) burned.push_back(p);
    REQUIRE(!burned.empty());
    auto never = [](std::span<const float> chans) {
      return std::vector<float>(chans.size() / 3, 0.0f);
    };
    const auto report = metrics::evaluate(never, burned);
    CHECK(report.mean_iou == 0.0);
    CHECK(report.mean_dice == 0.0);
  }

  SECTION("network evaluation is repeatable") {
    auto cfg = tiny_config();
    cfg.width_mult = 0.125;
    seg::Network<float> net(cfg);
    auto predict = [&net](std::span<const float> chans) {
      return seg::predict_patch(net, chans);
    };
    const auto a = metrics::evaluate(predict, patches);
    const auto b = metrics::evaluate(predict, patches);
    CHECK(a.mean_iou == b.mean_iou);
    CHECK(a.mean_dice == b.mean_dice);
  }

  SECTION("shape and emptiness guards") {
    auto stub = [](std::span<const float>) { return std::vector<float>(7, 0.0f); };
    REQUIRE_THROWS_WITH(metrics::evaluate(stub, patches),
                        ContainsSubstring("ShapeMismatch"));
    std::vector<dataset::LabeledPatch> none;
    REQUIRE_THROWS_WITH(metrics::evaluate(stub, none),
                        ContainsSubstring("no patches"));
  }
}

TEST_CASE("model config validates and round-trips through json") {
  seg::ModelConfig cfg;
  cfg.batch_size = 4;
  cfg.learning_rate = 5e-4;
  cfg.max_epochs = 12;
  cfg.loss = "dice";
  cfg.seed = 77;
  cfg.width_mult = 0.5;
  cfg.early_stop_iou = 0.93;

  const auto j = seg::to_json(cfg);
  const auto back = seg::config_from_json(j);
  CHECK(back.batch_size == 4);
  CHECK(back.learning_rate == 5e-4);
  CHECK(back.max_epochs == 12);
  CHECK(back.loss == "dice");
  CHECK(back.seed == 77);
  CHECK(back.width_mult == 0.5);
  CHECK(back.early_stop_iou == 0.93);

  CHECK(seg::ModelConfig{}.loss_weights() == std::pair{0.5, 0.5});
  cfg.loss = "cross-entropy";
  CHECK(cfg.loss_weights() == std::pair{1.0, 0.0});

  auto reject = [](auto&& mutate, const char* why) {
    seg::ModelConfig c;
    mutate(c);
    INFO(why);
    REQUIRE_THROWS_WITH(c.validate(), ContainsSubstring("InvalidConfig"));
  };
  reject([](auto& c) { c.encoder = "vgg"; }, "encoder");
  reject([](auto& c) { c.classes = 3; }, "classes");
  reject([](auto& c) { c.batch_size = 0; }, "batch");
  reject([](auto& c) { c.learning_rate = 0.0; }, "lr");
  reject([](auto& c) { c.loss = "focal"; }, "loss");
  reject([](auto& c) { c.width_mult = 0.0; }, "width");
  reject([](auto& c) { c.width_mult = 8.0; }, "width hi");
  reject([](auto& c) { c.early_stop_iou = 1.5; }, "early stop");

  // Partial json keeps defaults; garbage types surface as config errors.
  const auto partial = seg::config_from_json({{"width_mult", 0.25}});
  CHECK(partial.width_mult == 0.25);
  CHECK(partial.batch_size == 16);
  REQUIRE_THROWS_WITH(seg::config_from_json({{"batch_size", "many"}}),
                      ContainsSubstring("InvalidConfig"));
}
