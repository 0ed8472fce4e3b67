#pragma once

// Brute-force reference evaluator. Shares no code with avakit/evaluation.hpp:
// ranks by explicit comparison, recounts precision at every cut and reads AP
// off the recall levels directly.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "avakit/types.hpp"

namespace avakit::oracle {

inline double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double h = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = w * h;
  if (inter == 0.0) return 0.0;
  return inter / ((a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter);
}

/// Greedy claim simulation over one ranked list of detections.
inline std::vector<bool> claim(const std::vector<DetectionRecord>& ranked,
                               const std::vector<GroundTruthRecord>& gts, double iou_threshold) {
  std::vector<bool> used(gts.size(), false);
  std::vector<bool> tp;
  for (const auto& d : ranked) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].video_id != d.video_id || gts[g].timestamp != d.timestamp ||
          gts[g].action_id != d.action_id) {
        continue;
      }
      const double v = box_iou(d.box, gts[g].box);
      if (v >= iou_threshold && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) used[static_cast<std::size_t>(best)] = true;
    tp.push_back(best >= 0);
  }
  return tp;
}

/// AP as the mean over recall levels m / num_gt of the best precision at any
/// cut reaching that recall.
inline double ap_by_recall_levels(const std::vector<bool>& tp, int num_gt) {
  double sum = 0.0;
  for (int m = 1; m <= num_gt; ++m) {
    double best = 0.0;
    for (std::size_t k = 1; k <= tp.size(); ++k) {
      int hits = 0;
      for (std::size_t q = 0; q < k; ++q) hits += tp[q] ? 1 : 0;
      if (hits >= m) best = std::max(best, static_cast<double>(hits) / static_cast<double>(k));
    }
    sum += best;
  }
  return sum / num_gt;
}

struct Report {
  std::map<ClassId, double> ap;
  double map = 0.0;
};

inline Report frame_map(const std::vector<DetectionRecord>& dets,
                        const std::vector<GroundTruthRecord>& gts, double iou_threshold = 0.5) {
  std::set<ClassId> classes;
  for (const auto& g : gts) classes.insert(g.action_id);
  Report r;
  for (ClassId c : classes) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < dets.size(); ++k) {
      if (dets[k].action_id == c) idx.push_back(k);
    }
    // Insertion sort: score descending, earlier input first on ties.
    for (std::size_t a = 1; a < idx.size(); ++a) {
      for (std::size_t b = a; b > 0; --b) {
        const auto& hi = dets[idx[b - 1]];
        const auto& lo = dets[idx[b]];
        const bool swap = lo.score > hi.score || (lo.score == hi.score && idx[b] < idx[b - 1]);
        if (!swap) break;
        std::swap(idx[b - 1], idx[b]);
      }
    }
    std::vector<DetectionRecord> ranked;
    for (auto k : idx) ranked.push_back(dets[k]);
    int num_gt = 0;
    for (const auto& g : gts) num_gt += g.action_id == c ? 1 : 0;
    r.ap[c] = ap_by_recall_levels(claim(ranked, gts, iou_threshold), num_gt);
  }
  double sum = 0.0;
  for (const auto& [c, v] : r.ap) sum += v;
  r.map = sum / static_cast<double>(r.ap.size());
  return r;
}

}  // namespace avakit::oracle
