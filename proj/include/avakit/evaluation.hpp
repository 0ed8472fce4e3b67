#pragma once

// Frame-level detection evaluation: IoU matching, all-point interpolated AP,
// frame-mAP, detector-confidence sweeps, score ensembling and class-wise
// comparison tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ranges>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "avakit/csv.hpp"
#include "avakit/error.hpp"
#include "avakit/types.hpp"

namespace avakit {

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Detections with score strictly greater than the threshold, order preserved.
inline std::vector<DetectionRecord> filter_by_score(const std::vector<DetectionRecord>& dets,
                                                    double threshold) {
  std::vector<DetectionRecord> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [&](const DetectionRecord& d) { return d.score > threshold; });
  return out;
}

/// Box identity for grouping: frame plus coordinates rounded to 1e-4.
struct BoxKey {
  std::string video_id;
  std::int64_t timestamp = 0;
  std::array<std::int64_t, 4> coords{};

  static BoxKey of(std::string_view video, std::int64_t ts, const BoundingBox& b) {
    auto q = [](double v) { return static_cast<std::int64_t>(std::llround(v * 1e4)); };
    return BoxKey{std::string(video), ts, {q(b.x1), q(b.y1), q(b.x2), q(b.y2)}};
  }

  friend auto operator<=>(const BoxKey&, const BoxKey&) = default;
};

/// Person-detector confidence per actor box.
using BoxScores = std::map<BoxKey, double>;

/// Rows `video_id,timestamp,x1,y1,x2,y2,score`.
inline BoxScores parse_box_scores(std::string_view csv_text) {
  BoxScores out;
  detail::for_each_line(csv_text, [&](std::size_t row, std::string_view line) {
    const auto f = detail::split(line, ',');
    if (f.size() != 7) throw ParseError(row, "expected 7 fields, got " + std::to_string(f.size()));
    const auto ts = detail::field_int(row, f[1], "timestamp");
    const auto box = detail::field_box(row, f);
    const double score = detail::field_double(row, f[6], "score");
    if (!(score >= 0.0 && score <= 1.0)) throw ValidationError(row, "score outside [0,1]");
    out[BoxKey::of(f[0], ts, box)] = score;
  });
  return out;
}

/// Keeps action rows whose actor box scored above the threshold; every row of
/// a rejected box goes with it.
inline std::vector<DetectionRecord> filter_by_box_score(const std::vector<DetectionRecord>& dets,
                                                        const BoxScores& box_scores,
                                                        double threshold) {
  std::vector<DetectionRecord> out;
  for (const auto& d : dets) {
    auto it = box_scores.find(BoxKey::of(d.video_id, d.timestamp, d.box));
    if (it == box_scores.end()) {
      throw InconsistencyError("no person-box score for detection in " + d.video_id + "," +
                               std::to_string(d.timestamp));
    }
    if (it->second > threshold) out.push_back(d);
  }
  return out;
}

struct MatchEntry {
  /// Index into the detections passed to match_detections.
  std::size_t detection = 0;
  double score = 0.0;
  bool true_positive = false;
  std::optional<std::size_t> matched_gt;
};

/// Detections in descending score order (ties: input order).
struct MatchOutcome {
  std::vector<MatchEntry> entries;
};

/// Greedy matching within one (frame, class): each detection, best first,
/// claims the still unmatched ground truth of highest IoU >= iou_threshold.
inline MatchOutcome match_detections(std::span<const DetectionRecord> dets,
                                     std::span<const BoundingBox> gts, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<bool> taken(gts.size(), false);
  MatchOutcome out;
  out.entries.reserve(dets.size());
  for (std::size_t d : order) {
    MatchEntry e{d, dets[d].score, false, std::nullopt};
    double best = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(dets[d].box, gts[g]);
      if (v >= iou_threshold && v > best) {
        best = v;
        e.matched_gt = g;
      }
    }
    if (e.matched_gt) {
      taken[*e.matched_gt] = true;
      e.true_positive = true;
    }
    out.entries.push_back(e);
  }
  return out;
}

/// All-point interpolated AP of a ranked TP/FP sequence.
template <std::ranges::input_range Flags>
double average_precision(const Flags& true_positive, std::int64_t num_gt) {
  if (num_gt < 1) throw Error("average precision needs at least one ground-truth box");
  std::vector<double> precision, recall;
  std::int64_t tp = 0;
  std::int64_t seen = 0;
  for (bool flag : true_positive) {
    ++seen;
    if (flag) ++tp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
  }
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

inline double average_precision(std::initializer_list<bool> true_positive, std::int64_t num_gt) {
  return average_precision(std::vector<bool>(true_positive), num_gt);
}

struct APReport {
  std::map<ClassId, double> per_class_ap;
  std::set<ClassId> evaluated_classes;
  double map = 0.0;
};

inline constexpr double kDefaultIouThreshold = 0.5;

/// Frame-mAP: per class with at least one ground-truth box, matches are made
/// per keyframe and pooled into one ranking for AP; mAP is the unweighted mean.
/// Detections of classes without ground truth are ignored.
inline APReport frame_map(const std::vector<DetectionRecord>& dets,
                          const std::vector<GroundTruthRecord>& gts,
                          double iou_threshold = kDefaultIouThreshold) {
  if (gts.empty()) throw EmptyDatasetError("frame-mAP needs at least one ground-truth box");
  std::map<ClassId, std::map<FrameKey, std::vector<BoundingBox>>> gt_boxes;
  std::map<ClassId, std::int64_t> gt_count;
  for (const auto& g : gts) {
    gt_boxes[g.action_id][FrameKey{g.video_id, g.timestamp}].push_back(g.box);
    ++gt_count[g.action_id];
  }
  std::map<ClassId, std::map<FrameKey, std::vector<std::size_t>>> det_index;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const auto& d = dets[k];
    if (!gt_count.contains(d.action_id)) continue;
    det_index[d.action_id][FrameKey{d.video_id, d.timestamp}].push_back(k);
  }

  APReport report;
  const std::vector<BoundingBox> no_boxes;
  for (const auto& [cls, num_gt] : gt_count) {
    report.evaluated_classes.insert(cls);
    struct Ranked {
      double score;
      std::size_t index;
      bool tp;
    };
    std::vector<Ranked> ranked;
    auto& frames_gt = gt_boxes[cls];
    for (const auto& [frame, indices] : det_index[cls]) {
      std::vector<DetectionRecord> frame_dets;
      frame_dets.reserve(indices.size());
      for (std::size_t k : indices) frame_dets.push_back(dets[k]);
      auto git = frames_gt.find(frame);
      const auto& boxes = git == frames_gt.end() ? no_boxes : git->second;
      for (const auto& e : match_detections(frame_dets, boxes, iou_threshold).entries) {
        ranked.push_back({e.score, indices[e.detection], e.true_positive});
      }
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.index < b.index;
    });
    std::vector<bool> flags;
    flags.reserve(ranked.size());
    for (const auto& r : ranked) flags.push_back(r.tp);
    report.per_class_ap[cls] = average_precision(flags, num_gt);
  }
  double sum = 0.0;
  for (const auto& [cls, ap] : report.per_class_ap) sum += ap;
  report.map = sum / static_cast<double>(report.per_class_ap.size());
  return report;
}

struct SweepRow {
  double score_threshold = 0.0;
  double map = 0.0;
};

/// Table-1 style sweep of the detector confidence threshold.
///
/// With person-box scores the filter acts on the actor box, removing all of
/// its action rows together; without them each row's own score is used.
inline std::vector<SweepRow> threshold_sweep(const std::vector<DetectionRecord>& dets,
                                             const std::vector<GroundTruthRecord>& gts,
                                             const std::vector<double>& thresholds,
                                             double iou_threshold = kDefaultIouThreshold,
                                             const BoxScores* box_scores = nullptr) {
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    if (!(thresholds[k] > thresholds[k - 1])) {
      throw ConfigError("sweep thresholds must be strictly increasing");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto kept =
        box_scores ? filter_by_box_score(dets, *box_scores, t) : filter_by_score(dets, t);
    rows.push_back(SweepRow{t, frame_map(kept, gts, iou_threshold).map});
  }
  return rows;
}

/// Detector-confidence grid used by `eval sweep` when none is given.
inline const std::vector<double> kDefaultSweepThresholds{0.0, 0.2, 0.4, 0.6, 0.8, 0.85, 0.9};

/// Averages scores of detections that share (frame, box rounded to 1e-4,
/// action) across inputs. Keys missing from some inputs are averaged over the
/// inputs that have them. Output follows first appearance; boxes come from the
/// first occurrence.
inline std::vector<DetectionRecord> ensemble_average(
    const std::vector<std::vector<DetectionRecord>>& inputs) {
  using Key = std::pair<BoxKey, ClassId>;
  struct Acc {
    DetectionRecord first;
    std::vector<double> per_input;
  };
  std::map<Key, std::size_t> index;
  std::vector<Acc> groups;
  for (const auto& input : inputs) {
    // Duplicates within one input are averaged before fusing across inputs.
    std::map<std::size_t, std::pair<double, int>> local;
    std::vector<std::size_t> local_order;
    for (const auto& d : input) {
      Key key{BoxKey::of(d.video_id, d.timestamp, d.box), d.action_id};
      auto [it, inserted] = index.try_emplace(key, groups.size());
      if (inserted) groups.push_back(Acc{d, {}});
      auto [lit, fresh] = local.try_emplace(it->second, 0.0, 0);
      if (fresh) local_order.push_back(it->second);
      lit->second.first += d.score;
      lit->second.second += 1;
    }
    for (std::size_t g : local_order) {
      const auto& [sum, n] = local[g];
      groups[g].per_input.push_back(n == 1 ? sum : sum / n);
    }
  }
  std::vector<DetectionRecord> out;
  out.reserve(groups.size());
  for (auto& g : groups) {
    // Shifted mean: exact when all inputs agree.
    const double base = g.per_input.front();
    double shift = 0.0;
    for (double v : g.per_input) shift += v - base;
    DetectionRecord d = g.first;
    d.score = std::clamp(base + shift / static_cast<double>(g.per_input.size()), 0.0, 1.0);
    out.push_back(std::move(d));
  }
  return out;
}

struct DeltaRow {
  ClassId class_id = 0;
  std::optional<double> base_ap;
  std::optional<double> improved_ap;
  /// Set only when both reports evaluated the class.
  std::optional<double> delta;
};

/// Per-class AP comparison, largest improvement first; classes evaluated by
/// only one report follow, by class id.
inline std::vector<DeltaRow> classwise_delta(const APReport& base, const APReport& improved) {
  std::set<ClassId> classes = base.evaluated_classes;
  classes.insert(improved.evaluated_classes.begin(), improved.evaluated_classes.end());
  std::vector<DeltaRow> rows;
  for (ClassId c : classes) {
    DeltaRow r{c, std::nullopt, std::nullopt, std::nullopt};
    if (auto it = base.per_class_ap.find(c); it != base.per_class_ap.end()) r.base_ap = it->second;
    if (auto it = improved.per_class_ap.find(c); it != improved.per_class_ap.end()) {
      r.improved_ap = it->second;
    }
    if (r.base_ap && r.improved_ap) r.delta = *r.improved_ap - *r.base_ap;
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const DeltaRow& a, const DeltaRow& b) {
    if (a.delta.has_value() != b.delta.has_value()) return a.delta.has_value();
    if (a.delta && *a.delta != *b.delta) return *a.delta > *b.delta;
    return a.class_id < b.class_id;
  });
  return rows;
}

// Report files ---------------------------------------------------------------

inline std::string write_ap_report(const APReport& report) {
  std::string out = "class,ap\n";
  for (const auto& [c, ap] : report.per_class_ap) {
    out += std::to_string(c) + "," + format_double(ap) + "\n";
  }
  out += "mAP," + format_double(report.map) + "\n";
  return out;
}

inline APReport parse_ap_report(std::string_view text) {
  APReport report;
  bool have_map = false;
  detail::for_each_line(text, [&](std::size_t row, std::string_view line) {
    const auto f = detail::split(line, ',');
    if (f.size() != 2) throw ParseError(row, "expected 2 fields");
    if (f[0] == "class") return;
    const double v = detail::field_double(row, f[1], "ap");
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(row, "AP outside [0,1]");
    if (f[0] == "mAP") {
      report.map = v;
      have_map = true;
      return;
    }
    const auto c = detail::field_int(row, f[0], "class");
    report.per_class_ap[static_cast<ClassId>(c)] = v;
    report.evaluated_classes.insert(static_cast<ClassId>(c));
  });
  if (!have_map) throw ParseError(0, "AP report lacks an mAP line");
  return report;
}

inline std::string write_sweep(const std::vector<SweepRow>& rows) {
  std::string out = "score_threshold,map\n";
  for (const auto& r : rows) out += format_double(r.score_threshold) + "," + format_double(r.map) + "\n";
  return out;
}

inline std::string write_delta(const std::vector<DeltaRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  std::string out = "class,base_ap,improved_ap,delta\n";
  for (const auto& r : rows) {
    out += std::to_string(r.class_id) + "," + opt(r.base_ap) + "," + opt(r.improved_ap) + "," +
           opt(r.delta) + "\n";
  }
  return out;
}

}  // namespace avakit
