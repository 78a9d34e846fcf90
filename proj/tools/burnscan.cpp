// burnscan: burned-area mapping pipeline driver.
//
// Subcommands cover the full chain: catalog -> composite -> extract ->
// train -> eval -> infer -> series / compare, plus synth (fixture scenes)
// and plot (inspection PNGs). Every run writes a machine-readable run
// record next to its outputs; identical invocations produce byte-identical
// data artifacts.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "burnscan/dataset/split.hpp"
#include "burnscan/dataset/store.hpp"
#include "burnscan/dataset/synthetic.hpp"
#include "burnscan/ingest/catalog.hpp"
#include "burnscan/ingest/composite.hpp"
#include "burnscan/io/geojson.hpp"
#include "burnscan/io/mask_io.hpp"
#include "burnscan/io/png.hpp"
#include "burnscan/metrics/evaluate.hpp"
#include "burnscan/nn/blas.hpp"
#include "burnscan/seg/predictor.hpp"
#include "burnscan/seg/train.hpp"
#include "burnscan/seg/weights.hpp"
#include "burnscan/transfer/compare.hpp"
#include "burnscan/transfer/districts.hpp"
#include "burnscan/transfer/handlabels.hpp"
#include "burnscan/transfer/mosaic_io.hpp"
#include "burnscan/transfer/series.hpp"
#include "burnscan/util/checksum.hpp"
#include "burnscan/util/toml.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace burnscan;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Ctx {
  std::string config_path;
  toml::Table cfg;
  int jobs = 1;
  std::uint64_t seed = 42;
  bool seed_given = false;
  bool verbose = false;

  void load() {
    if (!config_path.empty()) cfg = toml::parse_file(config_path);
    if (cfg.has("seed") && !seed_given) seed = std::uint64_t(cfg.get_int("seed"));
    nn::set_blas_threads(jobs);
  }

  // config fills in anything the command line left at its default
  std::string str(bool flag_given, const std::string& flag_value,
                  const std::string& key, const std::string& fallback = "") const {
    if (flag_given) return flag_value;
    return cfg.get_string(key, fallback);
  }
  long long num(bool flag_given, long long flag_value, const std::string& key,
                long long fallback) const {
    if (flag_given) return flag_value;
    return cfg.get_int(key, fallback);
  }
  double real(bool flag_given, double flag_value, const std::string& key,
              double fallback) const {
    if (flag_given) return flag_value;
    return cfg.get_double(key, fallback);
  }
};

std::string env_data_root() {
  const char* v = std::getenv("BURNSCAN_DATA_ROOT");
  return v ? v : "";
}

// ---------------------------------------------------------------- run record

// One JSON per run: inputs, outputs, the effective configuration and its
// checksum. Deliberately carries no timestamps so reruns stay byte-identical.
void write_run_record(const fs::path& path, const std::string& command,
                      std::vector<std::string> inputs,
                      std::vector<std::string> outputs, const json& config) {
  json rec;
  rec["command"] = command;
  rec["inputs"] = inputs;
  const std::string cfg_dump = config.dump();
  rec["config"] = config;
  rec["config_crc32"] = dataset::detail::crc_hex(crc32_bytes(cfg_dump));
  rec["run_record"] = path.filename().string();
  outputs.push_back(path.filename().string());
  rec["outputs"] = outputs;
  rec["versions"] = {{"burnscan", kVersion},
                     {"weights_format", 1},
                     {"record_format", 1}};
  std::ofstream out(path, std::ios::binary);
  out << rec.dump(2) << "\n";
  if (!out) throw Error(Errc::write_failure, "cannot write " + path.string());
}

fs::path record_for_dir(const fs::path& dir) { return dir / "run_record.json"; }
fs::path record_for_file(const fs::path& file) {
  return fs::path(file.string() + ".run.json");
}

void ensure_parent(const fs::path& file) {
  const fs::path dir = file.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
}

ingest::CompositeRaster load_composite_checked(const std::string& path) {
  if (!fs::exists(path))
    throw Error(Errc::read_failure, "composite not found: " + path);
  return ingest::read_composite(path);
}

seg::Network<float> load_network(const std::string& path) {
  if (!fs::exists(path))
    throw Error(Errc::read_failure, "weights not found: " + path);
  return seg::load_weights(path);
}

// ------------------------------------------------------------------- catalog

struct CatalogArgs {
  std::string root, min_date, json_out;
};

void cmd_catalog(Ctx& ctx, const CatalogArgs& a, bool root_given) {
  std::string root = ctx.str(root_given, a.root, "data_root", env_data_root());
  if (root.empty())
    throw Error(Errc::invalid_argument,
                "no scene root: pass --root, set data_root in the config, or "
                "export BURNSCAN_DATA_ROOT");
  const Date floor = a.min_date.empty() ? ingest::default_catalog_floor()
                                        : parse_date(a.min_date);
  const auto cat = ingest::build_catalog(root, floor);

  for (const auto& s : cat.scenes) {
    std::cout << s.scene_id << "  " << format_date(s.sensing_date) << "  "
              << s.crs_id << "  " << s.band_paths.size() << " bands\n";
  }
  for (const auto& why : cat.skipped) std::cout << "skipped: " << why << "\n";
  std::cout << cat.scenes.size() << " scene(s), " << cat.skipped.size()
            << " skipped\n";

  if (!a.json_out.empty()) {
    ensure_parent(a.json_out);
    json doc;
    doc["scenes"] = json::array();
    for (const auto& s : cat.scenes) {
      json bands = json::object();
      for (const auto& [band, path] : s.band_paths) bands[band] = path;
      doc["scenes"].push_back({{"scene_id", s.scene_id},
                               {"sensing_date", format_date(s.sensing_date)},
                               {"crs", s.crs_id},
                               {"bands", bands}});
    }
    doc["skipped"] = cat.skipped;
    std::ofstream out(a.json_out, std::ios::binary);
    out << doc.dump(2) << "\n";
    if (!out) throw Error(Errc::write_failure, "cannot write " + a.json_out);
    write_run_record(record_for_file(a.json_out), "catalog", {root},
                     {fs::path(a.json_out).filename().string()},
                     json{{"root", root}, {"min_date", format_date(floor)}});
  }
}

// ----------------------------------------------------------------- composite

struct CompositeArgs {
  std::string root, min_date, out;
  std::vector<std::string> scenes;
};

void cmd_composite(Ctx& ctx, const CompositeArgs& a, bool root_given) {
  std::string root = ctx.str(root_given, a.root, "data_root", env_data_root());
  if (root.empty())
    throw Error(Errc::invalid_argument, "no scene root for composite");
  const Date floor = a.min_date.empty() ? ingest::default_catalog_floor()
                                        : parse_date(a.min_date);
  auto cat = ingest::build_catalog(root, floor);

  if (!a.scenes.empty()) {
    std::vector<ingest::SceneRef> keep;
    for (const auto& want : a.scenes) {
      bool found = false;
      for (const auto& s : cat.scenes)
        if (s.scene_id == want) {
          keep.push_back(s);
          found = true;
        }
      if (!found)
        throw Error(Errc::read_failure, "scene " + want + " is not in the catalog");
    }
    cat.scenes = std::move(keep);
  }

  fs::create_directories(a.out);
  std::vector<std::string> outputs;
  for (const auto& s : cat.scenes) {
    const auto c = ingest::composite_scene(s);
    const fs::path tif = fs::path(a.out) / (s.scene_id + ".tif");
    ingest::write_composite(tif.string(), c);
    outputs.push_back(tif.filename().string());
    outputs.push_back(fs::path(ingest::detail::sidecar_path(tif.string()))
                          .filename().string());
    if (ctx.verbose)
      std::cout << s.scene_id << ": " << c.grid.width << "x" << c.grid.height
                << ", " << c.valid.count() << " valid px\n";
  }
  std::cout << "wrote " << cat.scenes.size() << " composite(s) to " << a.out << "\n";
  write_run_record(record_for_dir(a.out), "composite", {root}, outputs,
                   json{{"root", root},
                        {"min_date", format_date(floor)},
                        {"scenes", a.scenes}});
}

// ------------------------------------------------------------------- extract

struct ExtractArgs {
  std::vector<std::string> composites;
  std::string burns, out, split_mode = "patch";
  long stride = dataset::kPatchSize;
  int window_days = dataset::kDefaultLabelWindowDays;
  double min_burned = -1.0;  // <0: keep everything
  double split_ratio = 0.7;
  std::uint64_t split_seed = 0;
  bool split_seed_given = false;
};

void cmd_extract(Ctx& ctx, ExtractArgs& a, const CLI::App* sub) {
  a.stride = ctx.num(sub->count("--stride") > 0, a.stride, "extract.stride",
                     a.stride);
  a.window_days = int(ctx.num(sub->count("--window-days") > 0, a.window_days,
                              "extract.window_days", a.window_days));
  a.split_ratio = ctx.real(sub->count("--split-ratio") > 0, a.split_ratio,
                           "extract.split_ratio", a.split_ratio);
  a.split_mode = ctx.str(sub->count("--split-mode") > 0, a.split_mode,
                         "extract.split_mode", a.split_mode);
  const std::uint64_t seed = a.split_seed_given ? a.split_seed : ctx.seed;

  const auto polygons = io::read_geojson(a.burns);
  std::vector<dataset::LabeledPatch> patches;
  long windows_total = 0, dropped = 0;
  for (const auto& path : a.composites) {
    const auto comp = load_composite_checked(path);
    auto res = dataset::extract_patches(comp, polygons, a.stride, a.window_days);
    windows_total += res.windows_total;
    dropped += res.dropped_invalid;
    for (auto& p : res.patches) patches.push_back(std::move(p));
  }
  if (a.min_burned >= 0.0)
    patches = dataset::filter_burned(std::move(patches), a.min_burned);

  auto manifest = dataset::make_manifest(patches);
  manifest.stride = a.stride;
  manifest.window_days = a.window_days;
  if (a.split_mode == "patch")
    dataset::split_dataset(manifest, a.split_ratio, seed);
  else if (a.split_mode == "scene")
    dataset::split_dataset_by_scene(manifest, a.split_ratio, seed);
  else
    throw Error(Errc::invalid_argument,
                "split mode must be \"patch\" or \"scene\", got \"" +
                    a.split_mode + "\"");
  dataset::apply_split(manifest, patches);
  dataset::write_store(a.out, {manifest, patches});

  std::cout << "extracted " << patches.size() << " patch(es) from "
            << windows_total << " window(s) (" << dropped << " dropped), "
            << manifest.count(dataset::SplitTag::train) << " train / "
            << manifest.count(dataset::SplitTag::test) << " test\n";
  write_run_record(record_for_dir(a.out), "extract",
                   [&] {
                     auto in = a.composites;
                     in.push_back(a.burns);
                     return in;
                   }(),
                   {"manifest.json"},
                   json{{"stride", a.stride},
                        {"window_days", a.window_days},
                        {"min_burned_fraction", a.min_burned},
                        {"split_ratio", a.split_ratio},
                        {"split_mode", a.split_mode},
                        {"split_seed", seed}});
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string store, model_config, out;
  int epochs = 0, batch = 0;
  double lr = 0.0, width = 0.0, early_stop = -1.0;
};

seg::ModelConfig load_model_config(Ctx& ctx, const std::string& flag_path) {
  const std::string path =
      ctx.str(!flag_path.empty(), flag_path, "model.config", "");
  seg::ModelConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::read_failure, "cannot open " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(Errc::parse_error, path + ": " + e.what());
    }
    cfg = seg::config_from_json(j);
  }
  return cfg;
}

void cmd_train(Ctx& ctx, const TrainArgs& a) {
  auto store = dataset::read_store(a.store);
  seg::ModelConfig cfg = load_model_config(ctx, a.model_config);
  if (a.epochs > 0) cfg.max_epochs = a.epochs;
  if (a.batch > 0) cfg.batch_size = a.batch;
  if (a.lr > 0.0) cfg.learning_rate = a.lr;
  if (a.width > 0.0) cfg.width_mult = a.width;
  if (a.early_stop >= 0.0) cfg.early_stop_iou = a.early_stop;
  if (ctx.seed_given) cfg.seed = ctx.seed;
  cfg.validate();

  std::vector<dataset::LabeledPatch> train_set, holdout;
  for (auto& p : store.patches) {
    if (p.split_tag == dataset::SplitTag::test) holdout.push_back(std::move(p));
    else train_set.push_back(std::move(p));
  }
  std::cout << "training on " << train_set.size() << " patch(es), holdout "
            << holdout.size() << "\n";

  seg::Network<float> net(cfg);
  const auto result = seg::train(net, train_set, holdout, cfg);
  ensure_parent(a.out);
  seg::save_weights(net, a.out);

  json history;
  history["epochs"] = json::array();
  for (const auto& e : result.history) {
    json row = {{"epoch", e.epoch}, {"train_loss", e.train_loss}};
    row["holdout_iou"] =
        std::isnan(e.holdout_iou) ? json() : json(e.holdout_iou);
    history["epochs"].push_back(row);
  }
  history["best_epoch"] = result.best_epoch;
  history["best_holdout_iou"] = result.best_holdout_iou;
  const fs::path hist_path = a.out + ".history.json";
  std::ofstream hist(hist_path, std::ios::binary);
  hist << history.dump(2) << "\n";
  if (!hist) throw Error(Errc::write_failure, "cannot write " + hist_path.string());

  for (const auto& e : result.history)
    if (ctx.verbose)
      std::cout << "epoch " << e.epoch << ": loss " << e.train_loss << ", iou "
                << e.holdout_iou << "\n";
  std::cout << "best epoch " << result.best_epoch << ", holdout iou "
            << result.best_holdout_iou << "\n";
  write_run_record(record_for_file(a.out), "train", {a.store},
                   {fs::path(a.out).filename().string(),
                    hist_path.filename().string()},
                   seg::to_json(cfg));
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
  std::string store, weights, out, csv, split = "test", domain = "source";
  double threshold = 0.5;
};

void cmd_eval(Ctx& ctx, const EvalArgs& a) {
  auto store = dataset::read_store(a.store);
  auto net = load_network(a.weights);

  std::vector<dataset::LabeledPatch> selected;
  for (auto& p : store.patches) {
    const bool want =
        a.split == "all" ||
        (a.split == "test" && p.split_tag == dataset::SplitTag::test) ||
        (a.split == "train" && p.split_tag == dataset::SplitTag::train);
    if (want) selected.push_back(std::move(p));
  }
  if (a.split != "all" && a.split != "test" && a.split != "train")
    throw Error(Errc::invalid_argument,
                "split must be test, train or all, got \"" + a.split + "\"");
  if (a.domain != "source" && a.domain != "transfer")
    throw Error(Errc::invalid_argument,
                "domain must be source or transfer, got \"" + a.domain + "\"");

  auto report = metrics::evaluate(
      [&](std::span<const float> ch) { return seg::predict_patch(net, ch); },
      std::span<const dataset::LabeledPatch>(selected), a.threshold);
  report.domain = a.domain;

  ensure_parent(a.out);
  std::ofstream out(a.out, std::ios::binary);
  out << metrics::to_json(report).dump(2) << "\n";
  if (!out) throw Error(Errc::write_failure, "cannot write " + a.out);
  std::vector<std::string> outputs = {fs::path(a.out).filename().string()};
  if (!a.csv.empty()) {
    ensure_parent(a.csv);
    metrics::write_csv(report, a.csv);
    outputs.push_back(fs::path(a.csv).filename().string());
  }
  std::cout << "evaluated " << report.n_patches << " patch(es): mean iou "
            << report.mean_iou << ", mean dice " << report.mean_dice << "\n";
  write_run_record(record_for_file(a.out), "eval", {a.store, a.weights}, outputs,
                   json{{"split", a.split},
                        {"threshold", a.threshold},
                        {"domain", a.domain}});
}

// --------------------------------------------------------------------- infer

struct InferArgs {
  std::vector<std::string> composites;
  std::string weights, out, combine = "max", period_start, period_end;
  int year = 0;
  double threshold = 0.5;
  int batch = 16;
};

void cmd_infer(Ctx& ctx, const InferArgs& a, const CLI::App* sub) {
  auto net = load_network(a.weights);
  std::vector<ingest::CompositeRaster> comps;
  comps.reserve(a.composites.size());
  for (const auto& path : a.composites) comps.push_back(load_composite_checked(path));

  transfer::Period period;
  if (a.year != 0) {
    period = transfer::calendar_year(a.year);
  } else if (!a.period_start.empty() || !a.period_end.empty()) {
    if (a.period_start.empty() || a.period_end.empty())
      throw Error(Errc::invalid_argument,
                  "--period-start and --period-end must be given together");
    period = {parse_date(a.period_start), parse_date(a.period_end)};
  } else {
    // default: the span of the input sensing dates
    period = {comps.front().sensing_date, comps.front().sensing_date};
    for (const auto& c : comps) {
      period.start = std::min(period.start, c.sensing_date);
      period.end = std::max(period.end, c.sensing_date);
    }
  }

  transfer::InferOptions opt;
  opt.threshold = ctx.real(sub->count("--threshold") > 0, a.threshold,
                           "infer.threshold", a.threshold);
  opt.batch_size = int(ctx.num(sub->count("--batch-size") > 0, a.batch,
                               "infer.batch_size", a.batch));
  const std::string combine = ctx.str(sub->count("--combine") > 0, a.combine,
                                      "infer.combine", a.combine);
  if (combine == "max") opt.combine = transfer::Combine::max;
  else if (combine == "mean") opt.combine = transfer::Combine::mean;
  else
    throw Error(Errc::invalid_argument,
                "combine must be max or mean, got \"" + combine + "\"");

  const auto mosaic = transfer::infer_region(net, comps, period, opt);
  transfer::write_mosaic(mosaic, a.out);
  std::cout << "mosaic " << mosaic.grid.width << "x" << mosaic.grid.height
            << " [" << transfer::period_label(mosaic.period) << "]: "
            << mosaic.burned.count() << " burned / " << mosaic.valid.count()
            << " valid px\n";
  auto inputs = a.composites;
  inputs.push_back(a.weights);
  write_run_record(record_for_dir(a.out), "infer", inputs,
                   {"prob.tif", "burned.tif", "mosaic.json"},
                   json{{"threshold", opt.threshold},
                        {"combine", combine},
                        {"batch_size", opt.batch_size},
                        {"period_start", format_date(period.start)},
                        {"period_end", format_date(period.end)}});
}

// -------------------------------------------------------------------- series

struct SeriesArgs {
  std::vector<std::string> mosaics;
  std::string districts, region, out;
};

void cmd_series(const SeriesArgs& a) {
  std::vector<transfer::RegionMosaic> mosaics;
  mosaics.reserve(a.mosaics.size());
  for (const auto& dir : a.mosaics) mosaics.push_back(transfer::read_mosaic(dir));

  const auto districts = transfer::read_districts(a.districts);
  const auto region_polys = io::read_geojson(a.region);
  if (region_polys.empty())
    throw Error(Errc::parse_error, a.region + ": no region boundary polygon");

  const auto series = transfer::build_series(mosaics, districts, region_polys.front());
  ensure_parent(a.out);
  transfer::write_series_csv(series, a.out);
  std::cout << "wrote " << series.rows.size() << " series row(s) to " << a.out
            << "\n";
  auto inputs = a.mosaics;
  inputs.push_back(a.districts);
  inputs.push_back(a.region);
  write_run_record(record_for_file(a.out), "series", inputs,
                   {fs::path(a.out).filename().string()},
                   json{{"districts", a.districts}, {"region", a.region}});
}

// ------------------------------------------------------------------- compare

struct CompareArgs {
  std::string mosaic, reference, out;
};

void cmd_compare(const CompareArgs& a) {
  const auto mosaic = transfer::read_mosaic(a.mosaic);
  const auto img = io::read_geotiff<float>(a.reference);
  if (img.info.samples != 1)
    throw Error(Errc::read_failure,
                a.reference + ": reference raster must be single-band");
  std::vector<float> values = img.data;
  if (img.info.nodata) {
    const float nd = float(*img.info.nodata);
    for (auto& v : values)
      if (v == nd) v = -1.0f;
  }
  const auto ref = transfer::reference_from_values(img.info.grid, values);
  const auto report = transfer::compare_reference(mosaic, ref);

  ensure_parent(a.out);
  std::ofstream out(a.out, std::ios::binary);
  out << transfer::to_json(report).dump(2) << "\n";
  if (!out) throw Error(Errc::write_failure, "cannot write " + a.out);
  std::cout << "compared " << report.n_compared << " px: agree burned "
            << report.agree_burned << ", ours only " << report.ours_only
            << ", reference only " << report.reference_only << "\n";
  write_run_record(record_for_file(a.out), "compare", {a.mosaic, a.reference},
                   {fs::path(a.out).filename().string()}, json::object());
}

// --------------------------------------------------------------------- synth

struct SynthArgs {
  std::string out, scene_id = "SYNTH", date = "2017-08-15";
  long size = 256;
  int burns = 3, stale = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double noise = 0.05;
  bool full_extent = false;
};

void cmd_synth(Ctx& ctx, const SynthArgs& a) {
  dataset::SyntheticSpec spec;
  spec.size = a.size;
  spec.n_burns = a.burns;
  spec.n_stale_burns = a.stale;
  spec.seed = a.seed_given ? a.seed : ctx.seed;
  spec.scene_id = a.scene_id;
  spec.sensing_date = parse_date(a.date);
  spec.noise_sigma = a.noise;
  spec.full_extent_burn = a.full_extent;

  const auto scene = dataset::generate_synthetic_scene(spec);
  fs::create_directories(a.out);
  const fs::path tif = fs::path(a.out) / (spec.scene_id + ".tif");
  ingest::write_composite(tif.string(), scene.composite);
  const fs::path burns_path = fs::path(a.out) / "burns.geojson";
  {
    std::ofstream out(burns_path, std::ios::binary);
    out << io::to_geojson(scene.burns, scene.composite.grid.crs_id).dump(2)
        << "\n";
    if (!out)
      throw Error(Errc::write_failure, "cannot write " + burns_path.string());
  }
  const fs::path truth_path = fs::path(a.out) / "truth.tif";
  io::write_mask(truth_path.string(), scene.truth, &scene.composite.valid);

  std::cout << "synthetic scene " << spec.scene_id << ": " << spec.size << "x"
            << spec.size << ", " << scene.burns.size() << " burn polygon(s), "
            << scene.truth.count() << " burned px\n";
  write_run_record(
      record_for_dir(a.out), "synth", {},
      {tif.filename().string(),
       fs::path(ingest::detail::sidecar_path(tif.string())).filename().string(),
       burns_path.filename().string(), truth_path.filename().string()},
      json{{"size", spec.size},
           {"n_burns", spec.n_burns},
           {"n_stale_burns", spec.n_stale_burns},
           {"seed", spec.seed},
           {"scene_id", spec.scene_id},
           {"sensing_date", a.date},
           {"noise_sigma", spec.noise_sigma},
           {"full_extent_burn", spec.full_extent_burn}});
}

// ---------------------------------------------------------------------- plot

struct PlotArgs {
  std::string composite, truth, mosaic, out;
};

// panel helpers: 3-byte RGB rows, burned pixels brick red on dark gray
void render_mask_panel(const geo::BinaryMask& mask, const geo::BinaryMask& valid,
                       std::vector<std::uint8_t>& rgb) {
  rgb.resize(mask.data.size() * 3);
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    std::uint8_t r = 0, g = 0, b = 0;
    if (valid.data[i]) {
      if (mask.data[i]) { r = 200; g = 44; b = 30; }
      else { r = 46; g = 46; b = 46; }
    }
    rgb[i * 3] = r;
    rgb[i * 3 + 1] = g;
    rgb[i * 3 + 2] = b;
  }
}

void cmd_plot(const PlotArgs& a) {
  struct Panel {
    long w = 0, h = 0;
    std::vector<std::uint8_t> rgb;
  };
  std::vector<Panel> panels;

  if (!a.composite.empty()) {
    const auto c = load_composite_checked(a.composite);
    Panel p;
    p.w = c.grid.width;
    p.h = c.grid.height;
    p.rgb.resize(std::size_t(p.w) * p.h * 3);
    const std::size_t plane = c.plane_size();
    // false color: shortwave infrared / near infrared / green
    for (std::size_t i = 0; i < plane; ++i) {
      const float chans[3] = {c.channels[2 * plane + i], c.channels[i],
                              c.channels[plane + i]};
      for (int k = 0; k < 3; ++k) {
        const float v = c.valid.data[i]
                            ? std::clamp(chans[k] * 2.5f, 0.0f, 1.0f)
                            : 0.0f;
        p.rgb[i * 3 + k] = std::uint8_t(v * 255.0f + 0.5f);
      }
    }
    panels.push_back(std::move(p));
  }
  if (!a.truth.empty()) {
    const auto m = io::read_mask(a.truth);
    Panel p;
    p.w = m.mask.grid.width;
    p.h = m.mask.grid.height;
    render_mask_panel(m.mask, m.valid, p.rgb);
    panels.push_back(std::move(p));
  }
  if (!a.mosaic.empty()) {
    const auto m = transfer::read_mosaic(a.mosaic);
    Panel p;
    p.w = m.grid.width;
    p.h = m.grid.height;
    render_mask_panel(m.burned, m.valid, p.rgb);
    panels.push_back(std::move(p));
  }
  if (panels.empty())
    throw Error(Errc::invalid_argument,
                "plot needs at least one of --composite, --truth, --mosaic");

  constexpr long kGap = 4;
  long height = 0, width = 0;
  for (const auto& p : panels) {
    height = std::max(height, p.h);
    width += p.w;
  }
  width += kGap * long(panels.size() - 1);

  std::vector<std::uint8_t> canvas(std::size_t(width) * height * 3, 255);
  long x0 = 0;
  for (const auto& p : panels) {
    for (long y = 0; y < p.h; ++y)
      for (long x = 0; x < p.w; ++x)
        for (int k = 0; k < 3; ++k)
          canvas[(std::size_t(y) * width + x0 + x) * 3 + k] =
              p.rgb[(std::size_t(y) * p.w + x) * 3 + k];
    x0 += p.w + kGap;
  }
  ensure_parent(a.out);
  io::write_png_rgb(a.out, int(width), int(height), canvas);
  std::cout << "wrote " << panels.size() << "-panel plot to " << a.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"burned-area mapping pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("burnscan ") + kVersion);

  Ctx ctx;
  app.add_option("--config", ctx.config_path, "run configuration (TOML)");
  app.add_option("--jobs", ctx.jobs, "worker thread budget")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", ctx.seed, "master seed");
  app.add_flag("--verbose", ctx.verbose, "chatty progress output");

  CatalogArgs cat;
  auto* sc_catalog = app.add_subcommand("catalog", "list usable scenes under a root");
  auto* cat_root = sc_catalog->add_option("--root", cat.root, "scene directory root");
  sc_catalog->add_option("--min-date", cat.min_date, "ignore scenes sensed before this date");
  sc_catalog->add_option("--json", cat.json_out, "write the listing as JSON");

  CompositeArgs comp;
  auto* sc_composite = app.add_subcommand("composite", "build reflectance composites");
  auto* comp_root = sc_composite->add_option("--root", comp.root, "scene directory root");
  sc_composite->add_option("--min-date", comp.min_date, "ignore scenes sensed before this date");
  sc_composite->add_option("--scene", comp.scenes, "restrict to these scene ids");
  sc_composite->add_option("--out", comp.out, "output directory")->required();

  ExtractArgs ext;
  auto* sc_extract = app.add_subcommand("extract", "cut labeled patches into a store");
  sc_extract->add_option("--composite", ext.composites, "composite GeoTIFF(s)")->required();
  sc_extract->add_option("--burns", ext.burns, "burn polygons GeoJSON")->required();
  sc_extract->add_option("--out", ext.out, "patch store directory")->required();
  sc_extract->add_option("--stride", ext.stride, "window stride in pixels");
  sc_extract->add_option("--window-days", ext.window_days, "fire date match window");
  sc_extract->add_option("--min-burned-fraction", ext.min_burned,
                         "drop patches at or below this burned fraction");
  sc_extract->add_option("--split-ratio", ext.split_ratio, "train fraction");
  sc_extract->add_option("--split-mode", ext.split_mode, "patch or scene");
  sc_extract->add_option("--split-seed", ext.split_seed, "split shuffle seed")
      ->each([&](const std::string&) { ext.split_seed_given = true; });

  TrainArgs tr;
  auto* sc_train = app.add_subcommand("train", "fit the segmentation network");
  sc_train->add_option("--store", tr.store, "patch store directory")->required();
  sc_train->add_option("--model-config", tr.model_config, "model config JSON");
  sc_train->add_option("--out", tr.out, "weights output path")->required();
  sc_train->add_option("--epochs", tr.epochs, "override max epochs");
  sc_train->add_option("--batch-size", tr.batch, "override batch size");
  sc_train->add_option("--lr", tr.lr, "override learning rate");
  sc_train->add_option("--width-mult", tr.width, "override channel width multiplier");
  sc_train->add_option("--early-stop-iou", tr.early_stop, "stop once holdout iou reaches this");

  EvalArgs ev;
  auto* sc_eval = app.add_subcommand("eval", "score a trained network on a store");
  sc_eval->add_option("--store", ev.store, "patch store directory")->required();
  sc_eval->add_option("--weights", ev.weights, "trained weights")->required();
  sc_eval->add_option("--out", ev.out, "report JSON path")->required();
  sc_eval->add_option("--csv", ev.csv, "also write per-patch scores CSV");
  sc_eval->add_option("--split", ev.split, "test, train or all");
  sc_eval->add_option("--threshold", ev.threshold, "burn probability threshold");
  sc_eval->add_option("--domain", ev.domain, "report domain: source or transfer");

  InferArgs inf;
  auto* sc_infer = app.add_subcommand("infer", "mosaic burn probabilities over a region");
  sc_infer->add_option("--composite", inf.composites, "composite GeoTIFF(s)")->required();
  sc_infer->add_option("--weights", inf.weights, "trained weights")->required();
  sc_infer->add_option("--out", inf.out, "mosaic output directory")->required();
  sc_infer->add_option("--threshold", inf.threshold, "burn probability threshold");
  sc_infer->add_option("--combine", inf.combine, "overlap rule: max or mean");
  sc_infer->add_option("--batch-size", inf.batch, "prediction batch size");
  sc_infer->add_option("--year", inf.year, "label the mosaic with a calendar year");
  sc_infer->add_option("--period-start", inf.period_start, "period start date");
  sc_infer->add_option("--period-end", inf.period_end, "period end date");

  SeriesArgs ser;
  auto* sc_series = app.add_subcommand("series", "zonal burned-area time series");
  sc_series->add_option("--mosaic", ser.mosaics, "mosaic directories")->required();
  sc_series->add_option("--districts", ser.districts, "settlement zones GeoJSON")->required();
  sc_series->add_option("--region", ser.region, "region boundary GeoJSON")->required();
  sc_series->add_option("--out", ser.out, "series CSV path")->required();

  CompareArgs cmp;
  auto* sc_compare = app.add_subcommand("compare", "pixel agreement against a reference product");
  sc_compare->add_option("--mosaic", cmp.mosaic, "mosaic directory")->required();
  sc_compare->add_option("--reference", cmp.reference, "reference burned raster")->required();
  sc_compare->add_option("--out", cmp.out, "comparison JSON path")->required();

  SynthArgs syn;
  auto* sc_synth = app.add_subcommand("synth", "generate a synthetic labeled scene");
  sc_synth->add_option("--out", syn.out, "output directory")->required();
  sc_synth->add_option("--size", syn.size, "scene edge in pixels");
  sc_synth->add_option("--burns", syn.burns, "fresh burn polygon count");
  sc_synth->add_option("--stale", syn.stale, "stale burn polygon count");
  sc_synth->add_option("--seed", syn.seed, "scene seed")
      ->each([&](const std::string&) { syn.seed_given = true; });
  sc_synth->add_option("--noise", syn.noise, "reflectance noise sigma");
  sc_synth->add_option("--scene-id", syn.scene_id, "scene identifier");
  sc_synth->add_option("--date", syn.date, "sensing date");
  sc_synth->add_flag("--full-extent", syn.full_extent, "one burn covering the whole scene");

  PlotArgs plot;
  auto* sc_plot = app.add_subcommand("plot", "render an inspection PNG");
  sc_plot->add_option("--composite", plot.composite, "false-color composite panel");
  sc_plot->add_option("--truth", plot.truth, "truth mask panel");
  sc_plot->add_option("--mosaic", plot.mosaic, "mosaic burned mask panel");
  sc_plot->add_option("--out", plot.out, "PNG output path")->required();

  // subcommand callbacks fire inside parse(), so context setup leads each one
  const auto setup = [&] {
    ctx.seed_given = seed_opt->count() > 0;
    ctx.load();
  };
  sc_catalog->callback([&] { setup(); cmd_catalog(ctx, cat, cat_root->count() > 0); });
  sc_composite->callback([&] { setup(); cmd_composite(ctx, comp, comp_root->count() > 0); });
  sc_extract->callback([&] { setup(); cmd_extract(ctx, ext, sc_extract); });
  sc_train->callback([&] { setup(); cmd_train(ctx, tr); });
  sc_eval->callback([&] { setup(); cmd_eval(ctx, ev); });
  sc_infer->callback([&] { setup(); cmd_infer(ctx, inf, sc_infer); });
  sc_series->callback([&] { setup(); cmd_series(ser); });
  sc_compare->callback([&] { setup(); cmd_compare(cmp); });
  sc_synth->callback([&] { setup(); cmd_synth(ctx, syn); });
  sc_plot->callback([&] { setup(); cmd_plot(plot); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
