#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "burnscan/metrics/scores.hpp"

namespace burnscan::metrics {

struct EvalReport {
  std::vector<PatchScore> scores;
  double mean_iou = 0.0, std_iou = 0.0;
  double mean_dice = 0.0, std_dice = 0.0;
  long n_patches = 0;
  long empty_pair_count = 0;
  std::string domain = "source";  // "source" (training region) or "transfer"
};

// "mean ± std" with the three-decimal presentation used throughout reports.
inline std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", mean, std);
  return buf;
}

// Unweighted per-patch mean and population standard deviation.
inline EvalReport aggregate(std::span<const PatchScore> scores) {
  if (scores.empty()) throw Error(Errc::empty_scores, "no patch scores to aggregate");
  EvalReport r;
  r.scores.assign(scores.begin(), scores.end());
  r.n_patches = long(scores.size());
  double sum_i = 0, sum_d = 0;
  for (const auto& s : scores) {
    sum_i += s.iou;
    sum_d += s.dice;
    r.empty_pair_count += s.empty_pair;
  }
  r.mean_iou = sum_i / double(r.n_patches);
  r.mean_dice = sum_d / double(r.n_patches);
  double ss_i = 0, ss_d = 0;
  for (const auto& s : scores) {
    ss_i += (s.iou - r.mean_iou) * (s.iou - r.mean_iou);
    ss_d += (s.dice - r.mean_dice) * (s.dice - r.mean_dice);
  }
  r.std_iou = std::sqrt(ss_i / double(r.n_patches));
  r.std_dice = std::sqrt(ss_d / double(r.n_patches));
  return r;
}

inline EvalReport aggregate(const std::vector<PatchScore>& scores) {
  return aggregate(std::span<const PatchScore>(scores));
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["domain"] = r.domain;
  j["n_patches"] = r.n_patches;
  j["empty_pair_count"] = r.empty_pair_count;
  j["mean_iou"] = r.mean_iou;
  j["std_iou"] = r.std_iou;
  j["mean_dice"] = r.mean_dice;
  j["std_dice"] = r.std_dice;
  j["iou"] = format_mean_std(r.mean_iou, r.std_iou);
  j["dice"] = format_mean_std(r.mean_dice, r.std_dice);
  j["std_kind"] = "population";
  return j;
}

inline void write_csv(const EvalReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::write_failure, "cannot open " + path);
  out << "patch_id,iou,dice,pred_positive,gt_positive,intersection,empty_pair\n";
  char line[256];
  for (const auto& s : r.scores) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%ld,%ld,%ld,%d", s.iou, s.dice,
                  s.pred_positive, s.gt_positive, s.intersection, int(s.empty_pair));
    out << s.patch_id << ',' << line << '\n';
  }
}

}  // namespace burnscan::metrics
