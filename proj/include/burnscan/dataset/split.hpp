#pragma once

// Train/test assignment. The default protocol permutes patches uniformly
// under a seed and sends the first floor(ratio*N) to train. Scene-level
// splitting is available because patch-level splits within a scene are
// optimistically biased; it fills train with whole scenes until the target
// count is reached, so achieved counts can deviate from the ratio.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "burnscan/dataset/labels.hpp"
#include "burnscan/util/date.hpp"
#include "burnscan/util/error.hpp"
#include "burnscan/util/rng.hpp"

namespace burnscan::dataset {

struct PatchRecord {
  std::string patch_id;
  std::string scene_id;
  long row_off = 0;
  long col_off = 0;
  Date sensing_date{};
  double burned_fraction = 0.0;
  SplitTag split_tag = SplitTag::unassigned;

  bool operator==(const PatchRecord&) const = default;
};

enum class SplitMode { by_patch, by_scene };

inline const char* split_mode_name(SplitMode m) {
  return m == SplitMode::by_patch ? "patch" : "scene";
}

struct DatasetManifest {
  std::vector<PatchRecord> records;
  std::uint64_t split_seed = 0;
  SplitMode split_mode = SplitMode::by_patch;
  long stride = kPatchSize;
  int window_days = kDefaultLabelWindowDays;

  long count(SplitTag tag) const {
    return long(std::count_if(records.begin(), records.end(),
                              [&](const PatchRecord& r) { return r.split_tag == tag; }));
  }
};

inline PatchRecord to_record(const LabeledPatch& p) {
  return {p.patch_id,        p.window.scene_id, p.window.row_off, p.window.col_off,
          p.sensing_date,    p.burned_fraction, p.split_tag};
}

inline DatasetManifest make_manifest(std::span<const LabeledPatch> patches) {
  DatasetManifest m;
  m.records.reserve(patches.size());
  for (const auto& p : patches) m.records.push_back(to_record(p));
  return m;
}

// Uniform permutation under seed: first floor(ratio*N) records become train,
// the rest test.
inline void split_dataset(DatasetManifest& manifest, double train_ratio,
                          std::uint64_t seed) {
  if (train_ratio < 0.0 || train_ratio > 1.0)
    throw Error(Errc::invalid_argument, "train ratio must lie in [0,1]");
  for (const auto& r : manifest.records)
    if (r.split_tag != SplitTag::unassigned)
      throw Error(Errc::invalid_argument,
                  "split requires all records unassigned, found " +
                      std::string(split_tag_name(r.split_tag)) + " on " + r.patch_id);

  const std::size_t n = manifest.records.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = std::size_t(std::floor(train_ratio * double(n)));
  for (std::size_t i = 0; i < n; ++i)
    manifest.records[order[i]].split_tag =
        i < n_train ? SplitTag::train : SplitTag::test;
  manifest.split_seed = seed;
  manifest.split_mode = SplitMode::by_patch;
}

// Whole scenes go to train (in permuted order) until the train count reaches
// floor(ratio*N); remaining scenes are test.
inline void split_dataset_by_scene(DatasetManifest& manifest, double train_ratio,
                                   std::uint64_t seed) {
  if (train_ratio < 0.0 || train_ratio > 1.0)
    throw Error(Errc::invalid_argument, "train ratio must lie in [0,1]");

  std::vector<std::string> scenes;
  std::map<std::string, long> patches_per_scene;
  for (const auto& r : manifest.records) {
    if (++patches_per_scene[r.scene_id] == 1) scenes.push_back(r.scene_id);
  }
  std::sort(scenes.begin(), scenes.end());
  Rng rng(seed);
  rng.shuffle(scenes);

  const long target = long(std::floor(train_ratio * double(manifest.records.size())));
  std::map<std::string, SplitTag> assignment;
  long assigned = 0;
  for (const auto& s : scenes) {
    if (assigned < target) {
      assignment[s] = SplitTag::train;
      assigned += patches_per_scene[s];
    } else {
      assignment[s] = SplitTag::test;
    }
  }
  for (auto& r : manifest.records) r.split_tag = assignment.at(r.scene_id);
  manifest.split_seed = seed;
  manifest.split_mode = SplitMode::by_scene;
}

// pushes manifest tags back onto the patches by id
inline void apply_split(const DatasetManifest& manifest,
                        std::vector<LabeledPatch>& patches) {
  std::map<std::string, SplitTag> tags;
  for (const auto& r : manifest.records) tags[r.patch_id] = r.split_tag;
  for (auto& p : patches) {
    const auto it = tags.find(p.patch_id);
    if (it == tags.end())
      throw Error(Errc::corrupt_store, "patch " + p.patch_id + " not in manifest");
    p.split_tag = it->second;
  }
}

}  // namespace burnscan::dataset
