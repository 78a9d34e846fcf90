// Drives the installed binary as a subprocess: the pipeline chain, rerun
// determinism, config fallback and the exit-code contract.

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "support/tempdir.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(BURNSCAN_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe))
    r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{}};
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

// zone fixtures on the synthetic grid: 20 m pixels, origin (600000, 4400000)
json rect_feature(double x0, double y0, double x1, double y1, json properties) {
  return {{"type", "Feature"},
          {"properties", std::move(properties)},
          {"geometry",
           {{"type", "Polygon"},
            {"coordinates",
             {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}}}}}};
}

json feature_collection(std::vector<json> features) {
  return {{"type", "FeatureCollection"},
          {"crs",
           {{"type", "name"},
            {"properties", {{"name", "urn:ogc:def:crs:EPSG::32636"}}}}},
          {"features", std::move(features)}};
}

const char* kTinyModel = R"({
  "encoder": "resnet18-topology", "decoder": "pyramid-pooling",
  "in_channels": 3, "classes": 2, "batch_size": 4, "learning_rate": 0.002,
  "max_epochs": 4, "loss": "combined", "seed": 3, "width_mult": 0.125,
  "early_stop_iou": 0.9
})";

// every path a run record declares must exist next to it
void check_record(const fs::path& record_path, const std::string& command) {
  const json rec = load_json(record_path);
  CHECK(rec.at("command") == command);
  CHECK(rec.at("versions").at("burnscan") == "0.1.0");
  REQUIRE(rec.at("config_crc32").get<std::string>().size() == 8);
  for (const auto& name : rec.at("outputs"))
    CHECK(fs::exists(record_path.parent_path() / name.get<std::string>()));
}

}  // namespace

TEST_CASE("cli: full chain writes every declared artifact") {
  testsupport::TempDir td;
  const std::string root = td.path().string();

  auto r = run_cli("synth --out " + root + "/scene --size 256 --burns 3 --seed 7");
  REQUIRE(r.code == 0);
  check_record(td.path() / "scene/run_record.json", "synth");

  r = run_cli("extract --composite " + root + "/scene/SYNTH.tif --burns " + root +
              "/scene/burns.geojson --out " + root +
              "/store --split-ratio 0.75 --split-seed 5");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.output, ContainsSubstring("4 patch(es)"));
  check_record(td.path() / "store/run_record.json", "extract");
  const json manifest = load_json(td.path() / "store/manifest.json");
  CHECK(manifest.at("records").size() == 4);

  write_text(td.path() / "model.json", kTinyModel);
  r = run_cli("train --store " + root + "/store --model-config " + root +
              "/model.json --out " + root + "/run/model.bsw");
  REQUIRE(r.code == 0);
  check_record(td.path() / "run/model.bsw.run.json", "train");
  const json history = load_json(td.path() / "run/model.bsw.history.json");
  CHECK(history.at("epochs").size() >= 1);
  CHECK(history.at("best_epoch").get<int>() >= 1);

  r = run_cli("eval --store " + root + "/store --weights " + root +
              "/run/model.bsw --out " + root + "/run/report.json --csv " + root +
              "/run/scores.csv --split all");
  REQUIRE(r.code == 0);
  check_record(td.path() / "run/report.json.run.json", "eval");
  const json report = load_json(td.path() / "run/report.json");
  CHECK(report.at("n_patches") == 4);
  CHECK(report.at("domain") == "source");
  CHECK_THAT(slurp(td.path() / "run/scores.csv"),
             ContainsSubstring("patch_id,iou,dice"));

  r = run_cli("infer --composite " + root + "/scene/SYNTH.tif --weights " + root +
              "/run/model.bsw --out " + root + "/mosaic --year 2017");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.output, ContainsSubstring("[2017]"));
  check_record(td.path() / "mosaic/run_record.json", "infer");

  // Alpha covers the scene's north-west quarter, region the whole footprint
  write_text(td.path() / "districts.geojson",
             feature_collection(
                 {rect_feature(600000, 4397440, 602560, 4400000,
                               {{"district", "Westdist"},
                                {"settlement", "Alpha"},
                                {"established", "2016"},
                                {"total_refugees", 1000}})})
                 .dump());
  write_text(td.path() / "region.geojson",
             feature_collection(
                 {rect_feature(600000, 4394880, 605120, 4400000, json::object())})
                 .dump());
  r = run_cli("series --mosaic " + root + "/mosaic --districts " + root +
              "/districts.geojson --region " + root + "/region.geojson --out " +
              root + "/series.csv");
  REQUIRE(r.code == 0);
  const std::string csv = slurp(td.path() / "series.csv");
  CHECK_THAT(csv, ContainsSubstring(
                      "zone_name,period,burned_fraction,burned_area_km2,n_valid_pixels"));
  CHECK_THAT(csv, ContainsSubstring("Alpha,2017,"));
  CHECK_THAT(csv, ContainsSubstring("REGION_CONTROL,2017,"));

  r = run_cli("compare --mosaic " + root + "/mosaic --reference " + root +
              "/scene/truth.tif --out " + root + "/cmp.json");
  REQUIRE(r.code == 0);
  const json cmp = load_json(td.path() / "cmp.json");
  const long total = cmp.at("agree_burned").get<long>() +
                     cmp.at("ours_only").get<long>() +
                     cmp.at("reference_only").get<long>() +
                     cmp.at("agree_unburned").get<long>();
  CHECK(total == cmp.at("n_compared").get<long>());
  CHECK(cmp.at("n_compared").get<long>() == 256 * 256);

  r = run_cli("plot --composite " + root + "/scene/SYNTH.tif --truth " + root +
              "/scene/truth.tif --mosaic " + root + "/mosaic --out " + root +
              "/trip.png");
  REQUIRE(r.code == 0);
  const std::string png = slurp(td.path() / "trip.png");
  REQUIRE(png.size() > 8);
  CHECK(png.compare(1, 3, "PNG") == 0);
}

TEST_CASE("cli: identical invocations produce byte-identical data outputs") {
  testsupport::TempDir td;
  const std::string root = td.path().string();
  REQUIRE(run_cli("synth --out " + root + "/scene --size 256 --seed 9").code == 0);

  const auto extract = [&](const std::string& out) {
    REQUIRE(run_cli("extract --composite " + root + "/scene/SYNTH.tif --burns " +
                    root + "/scene/burns.geojson --out " + root + "/" + out +
                    " --split-seed 5")
                .code == 0);
  };
  extract("s1");
  extract("s2");
  CHECK(slurp(td.path() / "s1/manifest.json") == slurp(td.path() / "s2/manifest.json"));
  CHECK(slurp(td.path() / "s1/SYNTH_r0_c0_img.tif") ==
        slurp(td.path() / "s2/SYNTH_r0_c0_img.tif"));
  CHECK(slurp(td.path() / "s1/run_record.json").find("\"split_seed\": 5") !=
        std::string::npos);

  write_text(td.path() / "model.json", kTinyModel);
  const auto train = [&](const std::string& out) {
    REQUIRE(run_cli("train --store " + root + "/s1 --model-config " + root +
                    "/model.json --out " + root + "/" + out + " --epochs 2")
                .code == 0);
  };
  train("m1.bsw");
  train("m2.bsw");
  CHECK(slurp(td.path() / "m1.bsw") == slurp(td.path() / "m2.bsw"));

  const auto infer = [&](const std::string& out) {
    REQUIRE(run_cli("infer --composite " + root + "/scene/SYNTH.tif --weights " +
                    root + "/m1.bsw --out " + root + "/" + out + " --year 2016")
                .code == 0);
  };
  infer("a");
  infer("b");
  CHECK(slurp(td.path() / "a/prob.tif") == slurp(td.path() / "b/prob.tif"));
  CHECK(slurp(td.path() / "a/burned.tif") == slurp(td.path() / "b/burned.tif"));
  CHECK(slurp(td.path() / "a/mosaic.json") == slurp(td.path() / "b/mosaic.json"));
  CHECK(slurp(td.path() / "a/run_record.json") == slurp(td.path() / "b/run_record.json"));
}

TEST_CASE("cli: config file fills defaults, flags win") {
  testsupport::TempDir td;
  const std::string root = td.path().string();
  REQUIRE(run_cli("synth --out " + root + "/scene --size 256 --seed 3").code == 0);

  write_text(td.path() / "run.toml",
             "seed = 11\n[extract]\nsplit_ratio = 0.5\n[infer]\nthreshold = 0.25\n");

  // split_ratio 0.5 comes from the config
  auto r = run_cli("--config " + root + "/run.toml extract --composite " + root +
                   "/scene/SYNTH.tif --burns " + root + "/scene/burns.geojson --out " +
                   root + "/s_cfg");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.output, ContainsSubstring("2 train / 2 test"));

  // the explicit flag beats the config
  r = run_cli("--config " + root + "/run.toml extract --composite " + root +
              "/scene/SYNTH.tif --burns " + root + "/scene/burns.geojson --out " +
              root + "/s_flag --split-ratio 1.0");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.output, ContainsSubstring("4 train / 0 test"));

  // config seed feeds the split when no --split-seed / --seed is given
  const json rec = load_json(td.path() / "s_cfg/run_record.json");
  CHECK(rec.at("config").at("split_seed") == 11);

  r = run_cli("--config " + root + "/absent.toml extract --composite x --burns y --out z");
  CHECK(r.code == 2);
  CHECK_THAT(r.output, ContainsSubstring("absent.toml"));

  r = run_cli("--config " + root + "/run.toml --seed 99 extract --composite " + root +
              "/scene/SYNTH.tif --burns " + root + "/scene/burns.geojson --out " +
              root + "/s_seed");
  REQUIRE(r.code == 0);
  CHECK(load_json(td.path() / "s_seed/run_record.json").at("config").at("split_seed") == 99);
}

TEST_CASE("cli: exit codes separate usage, data and success") {
  testsupport::TempDir td;
  const std::string root = td.path().string();

  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("synth --help").code == 0);

  CHECK(run_cli("frobnicate").code == 1);             // unknown subcommand
  CHECK(run_cli("extract --composite a.tif").code == 1);  // missing required flags
  CHECK(run_cli("train --store s --out w --epochs notanumber").code == 1);
  CHECK(run_cli("").code == 1);                       // a subcommand is required

  auto r = run_cli("catalog --root " + root + "/does_not_exist");
  CHECK(r.code == 2);
  CHECK_THAT(r.output, ContainsSubstring("does_not_exist"));

  r = run_cli("eval --store " + root + "/missing --weights w --out o.json");
  CHECK(r.code == 2);

  // empty stores surface as a data error, not a crash
  REQUIRE(run_cli("synth --out " + root + "/scene --size 128 --seed 1").code == 0);
  REQUIRE(run_cli("extract --composite " + root + "/scene/SYNTH.tif --burns " +
                  root + "/scene/burns.geojson --out " + root +
                  "/empty --min-burned-fraction 1.0")
              .code == 0);
  write_text(td.path() / "model.json", kTinyModel);
  r = run_cli("train --store " + root + "/empty --model-config " + root +
              "/model.json --out " + root + "/w.bsw");
  CHECK(r.code == 2);
  CHECK_THAT(r.output, ContainsSubstring("at least one patch"));

  // infer refuses a threshold outside [0, 1]
  REQUIRE(run_cli("extract --composite " + root + "/scene/SYNTH.tif --burns " +
                  root + "/scene/burns.geojson --out " + root +
                  "/store --split-ratio 1.0")
              .code == 0);
  REQUIRE(run_cli("train --store " + root + "/store --model-config " + root +
                  "/model.json --out " + root + "/w.bsw --epochs 1")
              .code == 0);
  r = run_cli("infer --composite " + root + "/scene/SYNTH.tif --weights " + root +
              "/w.bsw --out " + root + "/m --threshold 1.5");
  CHECK(r.code == 2);
  CHECK_THAT(r.output, ContainsSubstring("threshold"));
}
