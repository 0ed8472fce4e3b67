#include <gtest/gtest.h>

#include <random>

#include "avakit/evaluation.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

namespace avakit {
namespace {

DetectionRecord det(BoundingBox b, double score, ClassId c = 1, std::int64_t ts = 1, std::string v = "v") {
  return DetectionRecord{std::move(v), ts, b, c, score};
}

GroundTruthRecord gt(BoundingBox b, ClassId c = 1, std::int64_t ts = 1, std::string v = "v") {
  return GroundTruthRecord{std::move(v), ts, b, c, 0};
}

TEST(Iou, Examples) {
  const BoundingBox a{0, 0, 0.5, 0.5};
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, {0.6, 0.6, 0.9, 0.9}), 0.0);
  EXPECT_EQ(iou(a, {0.5, 0.0, 0.9, 0.5}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, {0.25, 0, 0.75, 0.5}), 1.0 / 3.0);
}

TEST(Iou, Properties) {
  std::mt19937_64 gen(2);
  for (int k = 0; k < 10000; ++k) {
    const auto a = testing::random_fine_box(gen);
    const auto b = testing::random_fine_box(gen);
    EXPECT_EQ(iou(a, b), iou(b, a));
    EXPECT_EQ(iou(a, a), 1.0);
    EXPECT_GE(iou(a, b), 0.0);
    EXPECT_LE(iou(a, b), 1.0);
  }
}

TEST(FilterByScore, Boundaries) {
  const std::vector<DetectionRecord> d{det({0, 0, 1, 1}, 0.84), det({0, 0, 1, 1}, 0.85),
                                       det({0, 0, 1, 1}, 0.86), det({0, 0, 1, 1}, 0.0)};
  const auto kept = filter_by_score(d, 0.85);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.86);
  EXPECT_EQ(filter_by_score(d, 0.0).size(), 3u);
  EXPECT_TRUE(filter_by_score(d, 1.0).empty());
}

TEST(FilterByBoxScore, RemovesAllRowsOfABox) {
  const BoundingBox a{0.1, 0.1, 0.4, 0.4}, b{0.5, 0.5, 0.9, 0.9};
  const std::vector<DetectionRecord> d{det(a, 0.9, 1), det(a, 0.1, 2), det(b, 0.95, 1)};
  BoxScores scores{{BoxKey::of("v", 1, a), 0.9}, {BoxKey::of("v", 1, b), 0.5}};
  const auto kept = filter_by_box_score(d, scores, 0.85);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[1].action_id, 2);
  EXPECT_THROW(filter_by_box_score({det({0.2, 0.2, 0.3, 0.3}, 0.5)}, scores, 0.0), InconsistencyError);
  const auto parsed = parse_box_scores("v,1,0.1,0.1,0.4,0.4,0.9\nv,1,0.5,0.5,0.9,0.9,0.5\n");
  EXPECT_EQ(parsed, scores);
  EXPECT_THROW(parse_box_scores("v,1,0.1,0.1,0.4,0.4,1.9\n"), ValidationError);
}

TEST(MatchDetections, SingleAndDuplicate) {
  const std::vector<BoundingBox> g{{0.1, 0.1, 0.5, 0.5}};
  const std::vector<DetectionRecord> one{det(g[0], 0.7)};
  auto m = match_detections(one, g, 0.5);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_TRUE(m.entries[0].true_positive);
  EXPECT_EQ(m.entries[0].matched_gt, 0u);

  const std::vector<DetectionRecord> two{det(g[0], 0.3), det(g[0], 0.8)};
  m = match_detections(two, g, 0.5);
  EXPECT_EQ(m.entries[0].detection, 1u);
  EXPECT_TRUE(m.entries[0].true_positive);
  EXPECT_FALSE(m.entries[1].true_positive);
  EXPECT_FALSE(m.entries[1].matched_gt.has_value());
}

TEST(MatchDetections, TiesKeepInputOrder) {
  const std::vector<BoundingBox> g{{0.1, 0.1, 0.5, 0.5}};
  const std::vector<DetectionRecord> d{det(g[0], 0.5), det(g[0], 0.5)};
  const auto m = match_detections(d, g, 0.5);
  EXPECT_EQ(m.entries[0].detection, 0u);
  EXPECT_TRUE(m.entries[0].true_positive);
}

TEST(MatchDetections, CrossingCase) {
  // D0 (best) overlaps both ground truths and prefers G1; D1 overlaps both
  // but G1 is gone, so it falls back to G0; D2 finds nothing left.
  const std::vector<BoundingBox> g{{0.0, 0.0, 0.4, 0.4}, {0.1, 0.0, 0.5, 0.4}};
  const std::vector<DetectionRecord> d{det({0.1, 0.0, 0.48, 0.4}, 0.9),
                                       det({0.05, 0.0, 0.45, 0.4}, 0.8),
                                       det({0.05, 0.0, 0.45, 0.4}, 0.7)};
  const auto m = match_detections(d, g, 0.5);
  EXPECT_EQ(m.entries[0].matched_gt, 1u);
  EXPECT_EQ(m.entries[1].matched_gt, 0u);
  EXPECT_FALSE(m.entries[2].true_positive);
  // Same result from the reference claim simulation.
  std::vector<GroundTruthRecord> gts{gt(g[0]), gt(g[1])};
  std::vector<bool> flags;
  for (const auto& e : m.entries) flags.push_back(e.true_positive);
  EXPECT_EQ(oracle::claim(d, gts, 0.5), flags);
}

TEST(MatchDetections, AgreesWithOracleOnRandomFrames) {
  std::mt19937_64 gen(44);
  std::uniform_int_distribution<int> score(0, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<BoundingBox> g;
    std::vector<GroundTruthRecord> gts;
    for (int k = 0; k < 3; ++k) {
      g.push_back(testing::random_box(gen));
      gts.push_back(gt(g.back()));
    }
    std::vector<DetectionRecord> d;
    for (int k = 0; k < 4; ++k) {
      auto b = g[static_cast<std::size_t>(k % 3)];
      b.x2 = std::min(1.0, b.x2 + 0.05 * k);
      d.push_back(det(b, score(gen) / 5.0));
    }
    const auto m = match_detections(d, g, 0.5);
    std::vector<DetectionRecord> ranked;
    std::vector<bool> flags;
    for (const auto& e : m.entries) {
      ranked.push_back(d[e.detection]);
      flags.push_back(e.true_positive);
    }
    EXPECT_EQ(oracle::claim(ranked, gts, 0.5), flags);
  }
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(average_precision({true, true, true}, 3), 1.0);
  EXPECT_EQ(average_precision({false, false}, 2), 0.0);
  EXPECT_EQ(average_precision(std::vector<bool>{}, 2), 0.0);
  EXPECT_DOUBLE_EQ(average_precision({true, false, true}, 2), 5.0 / 6.0);
  EXPECT_THROW(average_precision({true}, 0), Error);
}

TEST(FrameMap, PerfectAndEmpty) {
  std::mt19937_64 gen(1);
  std::vector<GroundTruthRecord> gts;
  std::vector<DetectionRecord> dets;
  for (int k = 0; k < 30; ++k) {
    gts.push_back(gt(testing::random_box(gen), 1 + k % 4, 900 + k % 5));
    dets.push_back(det(gts.back().box, 1.0, gts.back().action_id, gts.back().timestamp));
  }
  const auto perfect = frame_map(dets, gts);
  EXPECT_EQ(perfect.map, 1.0);
  EXPECT_EQ(perfect.evaluated_classes, (std::set<ClassId>{1, 2, 3, 4}));
  for (const auto& [c, ap] : perfect.per_class_ap) EXPECT_EQ(ap, 1.0);
  EXPECT_EQ(frame_map({}, gts).map, 0.0);
  EXPECT_THROW(frame_map(dets, {}), EmptyDatasetError);
}

TEST(FrameMap, IgnoresClassesWithoutGroundTruth) {
  const BoundingBox b{0.1, 0.1, 0.5, 0.5};
  const auto r = frame_map({det(b, 0.9, 1), det(b, 0.9, 7)}, {gt(b, 1)});
  EXPECT_EQ(r.evaluated_classes, (std::set<ClassId>{1}));
  EXPECT_EQ(r.map, 1.0);
}

TEST(FrameMap, MatchesBruteForce) {
  std::mt19937_64 gen(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const auto [dets, gts] = testing::random_eval_case(gen, 50, 4);
    const auto fast = frame_map(dets, gts);
    const auto ref = oracle::frame_map(dets, gts);
    ASSERT_EQ(fast.per_class_ap.size(), ref.ap.size());
    for (const auto& [c, ap] : ref.ap) EXPECT_NEAR(fast.per_class_ap.at(c), ap, 1e-9);
    EXPECT_NEAR(fast.map, ref.map, 1e-9);
  }
}

TEST(FrameMap, MonotoneRescalingAndLowFalsePositive) {
  std::mt19937_64 gen(55);
  for (int trial = 0; trial < 200; ++trial) {
    auto [dets, gts] = testing::random_eval_case(gen, 40, 3);
    const auto base = frame_map(dets, gts);
    auto cubed = dets;
    for (auto& d : cubed) d.score = d.score * d.score * d.score;
    const auto rescaled = frame_map(cubed, gts);
    for (const auto& [c, ap] : base.per_class_ap) EXPECT_EQ(rescaled.per_class_ap.at(c), ap);

    double lowest = 1.0;
    for (const auto& d : dets) lowest = std::min(lowest, d.score);
    auto extra = dets;
    extra.push_back(det({0.0, 0.0, 0.01, 0.01}, lowest / 2.0, gts.front().action_id,
                        gts.front().timestamp, gts.front().video_id));
    const auto with_fp = frame_map(extra, gts);
    for (const auto& [c, ap] : base.per_class_ap) EXPECT_LE(with_fp.per_class_ap.at(c), ap);
  }
}

TEST(ThresholdSweep, PublishedGrid) {
  std::mt19937_64 gen(8);
  auto [dets, gts] = testing::random_eval_case(gen, 60, 3);
  const auto rows = threshold_sweep(dets, gts, kDefaultSweepThresholds);
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].score_threshold, kDefaultSweepThresholds[k]);
    EXPECT_EQ(rows[k].map, frame_map(filter_by_score(dets, kDefaultSweepThresholds[k]), gts).map);
  }
}

TEST(ThresholdSweep, Edges) {
  const BoundingBox b{0.1, 0.1, 0.5, 0.5};
  const std::vector<GroundTruthRecord> g{gt(b)};
  const std::vector<DetectionRecord> d{det(b, 0.6)};
  EXPECT_EQ(threshold_sweep(d, g, {0.7})[0].map, 0.0);
  EXPECT_EQ(threshold_sweep({det(b, 1.0)}, g, {0.0})[0].map, 1.0);
  EXPECT_THROW(threshold_sweep(d, g, {0.5, 0.5}), ConfigError);
  EXPECT_THROW(threshold_sweep(d, g, {0.5, 0.2}), ConfigError);
}

TEST(ThresholdSweep, PersonBoxScores) {
  const BoundingBox a{0.1, 0.1, 0.4, 0.4}, b{0.5, 0.5, 0.9, 0.9};
  const std::vector<GroundTruthRecord> g{gt(a, 1), gt(b, 2)};
  const std::vector<DetectionRecord> d{det(a, 0.2, 1), det(b, 0.9, 2)};
  BoxScores scores{{BoxKey::of("v", 1, a), 0.95}, {BoxKey::of("v", 1, b), 0.3}};
  const auto rows = threshold_sweep(d, g, {0.0, 0.5}, 0.5, &scores);
  EXPECT_EQ(rows[0].map, 1.0);
  EXPECT_EQ(rows[1].map, 0.5);  // box b rejected, its action row goes too
}

TEST(EnsembleAverage, Examples) {
  const BoundingBox b{0.1, 0.1, 0.5, 0.5};
  const std::vector<DetectionRecord> one{det(b, 0.4), det(b, 0.7, 2)};
  EXPECT_EQ(ensemble_average({one}), one);
  const auto two = ensemble_average({{det(b, 0.4)}, {det(b, 0.6)}});
  ASSERT_EQ(two.size(), 1u);
  EXPECT_DOUBLE_EQ(two[0].score, 0.5);
  const auto three = ensemble_average({{det(b, 0.3)}, {det(b, 0.5, 2)}, {det(b, 0.9)}});
  ASSERT_EQ(three.size(), 2u);
  EXPECT_DOUBLE_EQ(three[0].score, 0.6);
  EXPECT_DOUBLE_EQ(three[1].score, 0.5);
  // Boxes within rounding distance share a key.
  const BoundingBox near{0.10000001, 0.1, 0.5, 0.5};
  EXPECT_EQ(ensemble_average({{det(b, 0.2)}, {det(near, 0.4)}}).size(), 1u);
}

TEST(EnsembleAverage, CopiesAreIdentity) {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 50; ++trial) {
    auto [dets, gts] = testing::random_eval_case(gen, 40, 4);
    // Distinct keys: make every detection its own frame.
    for (std::size_t k = 0; k < dets.size(); ++k) dets[k].timestamp = static_cast<std::int64_t>(k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& d : dets) d.score = u(gen);
    for (int n = 1; n <= 5; ++n) {
      EXPECT_EQ(ensemble_average(std::vector<std::vector<DetectionRecord>>(n, dets)), dets);
    }
  }
}

TEST(ClasswiseDelta, Rows) {
  APReport base{{{1, 0.5}, {2, 0.2}, {3, 0.9}}, {1, 2, 3}, 0.0};
  APReport improved{{{1, 0.6}, {2, 0.6}, {3, 0.8}}, {1, 2, 3}, 0.0};
  const auto rows = classwise_delta(base, improved);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].class_id, 2);
  EXPECT_DOUBLE_EQ(*rows[0].delta, 0.4);
  EXPECT_EQ(rows[1].class_id, 1);
  EXPECT_DOUBLE_EQ(*rows[1].delta, 0.1);
  EXPECT_EQ(rows[2].class_id, 3);
  EXPECT_DOUBLE_EQ(*rows[2].delta, -0.1);

  for (const auto& r : classwise_delta(base, base)) EXPECT_EQ(*r.delta, 0.0);

  APReport partial{{{1, 0.5}}, {1}, 0.5};
  const auto mixed = classwise_delta(partial, improved);
  ASSERT_EQ(mixed.size(), 3u);
  EXPECT_EQ(mixed[0].class_id, 1);
  EXPECT_FALSE(mixed[1].base_ap.has_value());
  EXPECT_FALSE(mixed[1].delta.has_value());
  EXPECT_EQ(write_delta(mixed).substr(0, 31), "class,base_ap,improved_ap,delta");
  EXPECT_NE(write_delta(mixed).find("2,NA,0.6,NA"), std::string::npos);
}

TEST(ApReportFile, RoundTrip) {
  APReport r{{{3, 0.25}, {12, 1.0 / 3.0}}, {3, 12}, (0.25 + 1.0 / 3.0) / 2};
  const auto parsed = parse_ap_report(write_ap_report(r));
  EXPECT_EQ(parsed.per_class_ap, r.per_class_ap);
  EXPECT_EQ(parsed.evaluated_classes, r.evaluated_classes);
  EXPECT_EQ(parsed.map, r.map);
  EXPECT_THROW(parse_ap_report("class,ap\n1,0.5\n"), ParseError);
}

}  // namespace
}  // namespace avakit
