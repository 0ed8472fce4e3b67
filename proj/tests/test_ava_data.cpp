#include <gtest/gtest.h>

#include <random>

#include "avakit/csv.hpp"
#include "avakit/stats.hpp"
#include "test_util.hpp"

namespace avakit {
namespace {

TEST(ParseGroundTruth, EmptyInput) { EXPECT_TRUE(parse_ground_truth("").empty()); }

TEST(ParseGroundTruth, SingleRow) {
  const auto rows = parse_ground_truth("vidA,902,0.1,0.2,0.5,0.8,12,0");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].video_id, "vidA");
  EXPECT_EQ(rows[0].timestamp, 902);
  EXPECT_EQ(rows[0].box, (BoundingBox{0.1, 0.2, 0.5, 0.8}));
  EXPECT_EQ(rows[0].action_id, 12);
  EXPECT_EQ(rows[0].person_id, 0);
}

TEST(ParseGroundTruth, PreservesRowOrderAndAcceptsCrlf) {
  const auto rows = parse_ground_truth(
      "b,0903,0.1,0.2,0.5,0.8,80,1\r\na,902,0.1,0.2,0.5,0.8,12,0\r\n\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].video_id, "b");
  EXPECT_EQ(rows[0].timestamp, 903);
  EXPECT_EQ(rows[1].video_id, "a");
}

TEST(ParseGroundTruth, InvertedBoxIsValidationError) {
  EXPECT_THROW(parse_ground_truth("vidA,902,0.5,0.2,0.1,0.8,12,0"), ValidationError);
}

TEST(ParseGroundTruth, ErrorsCarryRowNumber) {
  const std::string text =
      "v,1,0.1,0.1,0.2,0.2,1,0\n"
      "v,1,0.1,0.1,0.2,0.2,1\n";
  try {
    parse_ground_truth(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
  try {
    parse_ground_truth("v,1,0.1,0.1,0.2,0.2,1,0\n\nv,1,0.1,0.1,1.2,0.2,1,0\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.row(), 3u);
  }
}

TEST(ParseGroundTruth, RejectsBadFields) {
  EXPECT_THROW(parse_ground_truth("v,abc,0.1,0.1,0.2,0.2,1,0"), ParseError);
  EXPECT_THROW(parse_ground_truth("v,1,0.1,x,0.2,0.2,1,0"), ParseError);
  EXPECT_THROW(parse_ground_truth("v,902.5,0.1,0.1,0.2,0.2,1,0"), ValidationError);
  EXPECT_THROW(parse_ground_truth("v,-1,0.1,0.1,0.2,0.2,1,0"), ValidationError);
  EXPECT_THROW(parse_ground_truth("v,1,0.1,0.1,0.2,0.2,0,0"), ValidationError);
  EXPECT_THROW(parse_ground_truth("v,1,0.1,0.1,0.2,0.2,81,0"), ValidationError);
  EXPECT_THROW(parse_ground_truth("v,1,0.1,0.1,0.2,0.2,1,-3"), ValidationError);
  EXPECT_THROW(parse_ground_truth("v,1,-0.1,0.1,0.2,0.2,1,0"), ValidationError);
  EXPECT_THROW(parse_ground_truth("v,1,0.1,0.3,0.2,0.3,1,0"), ValidationError);
  EXPECT_THROW(parse_ground_truth("v,1,nan,0.1,0.2,0.2,1,0"), ValidationError);
  EXPECT_THROW(parse_ground_truth(",1,0.1,0.1,0.2,0.2,1,0"), ValidationError);
}

TEST(ParseGroundTruth, LabelMapWidensVocabulary) {
  EXPECT_NO_THROW(parse_ground_truth("v,1,0.1,0.1,0.2,0.2,120,0", ParseOptions{120}));
  EXPECT_THROW(parse_ground_truth("v,1,0.1,0.1,0.2,0.2,4,0", ParseOptions{3}), ValidationError);
}

TEST(ParseDetections, Basics) {
  EXPECT_TRUE(parse_detections("").empty());
  const auto rows = parse_detections("vidA,902,0.1,0.2,0.5,0.8,12,0.91");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].score, 0.91);
  EXPECT_THROW(parse_detections("vidA,902,0.1,0.2,0.5,0.8,12,1.5"), ValidationError);
  EXPECT_THROW(parse_detections("vidA,902,0.1,0.2,0.5,0.8,12,-0.1"), ValidationError);
  EXPECT_THROW(parse_detections("vidA,902,0.1,0.2,0.5,0.8,12"), ParseError);
}

TEST(GroupInstances, MergesLabelsOfOneActor) {
  const auto inst = group_instances(parse_ground_truth(
      "vidA,902,0.1,0.2,0.5,0.8,12,0\n"
      "vidA,902,0.1,0.2,0.5,0.8,80,0\n"));
  ASSERT_EQ(inst.size(), 1u);
  EXPECT_EQ(inst[0].labels, (LabelSet{12, 80}));
}

TEST(GroupInstances, DistinctPersonsStaySeparate) {
  const auto inst = group_instances(parse_ground_truth(
      "vidA,902,0.1,0.2,0.5,0.8,12,0\n"
      "vidA,902,0.1,0.2,0.5,0.8,12,1\n"));
  EXPECT_EQ(inst.size(), 2u);
}

TEST(GroupInstances, FiveRowHandEnumeration) {
  const auto inst = group_instances(parse_ground_truth(
      "vidA,902,0.1,0.2,0.5,0.8,12,0\n"
      "vidA,902,0.1,0.2,0.5,0.8,17,0\n"
      "vidA,902,0.1,0.2,0.5,0.8,80,0\n"
      "vidA,902,0.3,0.2,0.6,0.8,12,1\n"
      "vidA,902,0.5,0.2,0.9,0.8,12,2\n"));
  ASSERT_EQ(inst.size(), 3u);
  EXPECT_EQ(inst[0].labels, (LabelSet{12, 17, 80}));
  EXPECT_EQ(inst[1].labels, (LabelSet{12}));
  EXPECT_EQ(inst[2].labels, (LabelSet{12}));
  EXPECT_EQ(inst[1].person_id, 1);
}

TEST(GroupInstances, SortsByKey) {
  const auto inst = group_instances(parse_ground_truth(
      "b,1,0.1,0.2,0.5,0.8,1,0\n"
      "a,2,0.1,0.2,0.5,0.8,1,0\n"
      "a,1,0.1,0.2,0.5,0.8,1,5\n"
      "a,1,0.1,0.2,0.5,0.8,1,2\n"));
  ASSERT_EQ(inst.size(), 4u);
  EXPECT_EQ(inst[0].key(), std::make_tuple(std::string("a"), 1, 2));
  EXPECT_EQ(inst[1].key(), std::make_tuple(std::string("a"), 1, 5));
  EXPECT_EQ(inst[2].key(), std::make_tuple(std::string("a"), 2, 0));
  EXPECT_EQ(inst[3].video_id, "b");
}

TEST(GroupInstances, BoxToleranceAndInconsistency) {
  EXPECT_NO_THROW(group_instances(parse_ground_truth(
      "v,1,0.1,0.2,0.5,0.8,1,0\n"
      "v,1,0.1000005,0.2,0.5,0.8,2,0\n")));
  EXPECT_THROW(group_instances(parse_ground_truth(
                   "v,1,0.1,0.2,0.5,0.8,1,0\n"
                   "v,1,0.1001,0.2,0.5,0.8,2,0\n")),
               InconsistencyError);
}

TEST(WriteInstances, RowsPerLabel) {
  EXPECT_EQ(write_instances({}), "");
  const std::vector<Instance> one{testing::make_instance("vidA", 902, 0, {80, 12})};
  EXPECT_EQ(write_instances(one),
            "vidA,902,0.1,0.2,0.5,0.8,12,0\n"
            "vidA,902,0.1,0.2,0.5,0.8,80,0\n");
}

TEST(WriteInstances, RoundTripRandomSets) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Instance> instances;
    for (int k = 0; k < 100; ++k) {
      instances.push_back(testing::make_instance("v" + std::to_string(100 + k / 10), 900 + k % 10,
                                                 0, testing::random_labels(gen, 80, 4),
                                                 testing::random_fine_box(gen)));
    }
    const auto text = write_instances(instances);
    EXPECT_EQ(group_instances(parse_ground_truth(text)), instances);
    EXPECT_EQ(write_instances(group_instances(parse_ground_truth(text))), text);
  }
}

TEST(WriteDetections, RoundTrip) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DetectionRecord> dets;
  for (int k = 0; k < 200; ++k) {
    dets.push_back({"v", k, testing::random_fine_box(gen), 1 + k % 80, u(gen)});
  }
  EXPECT_EQ(parse_detections(write_detections(dets)), dets);
}

TEST(GroupInstances, PreservesLabelPairCount) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto instances = testing::random_instances(gen, 60, 10, 5);
    const auto records = to_records(instances);
    const auto regrouped = group_instances(records);
    std::size_t pairs = 0;
    for (const auto& i : regrouped) pairs += i.labels.size();
    EXPECT_EQ(pairs, records.size());
    EXPECT_EQ(class_stats(regrouped).total, static_cast<std::int64_t>(records.size()));
  }
}

TEST(ClassStats, HandCount) {
  const std::vector<Instance> inst{
      testing::make_instance("v", 1, 0, {12, 80}), testing::make_instance("v", 1, 1, {12}),
      testing::make_instance("v", 2, 0, {12})};
  const auto s = class_stats(inst);
  EXPECT_EQ(s.count(12), 3);
  EXPECT_EQ(s.count(80), 1);
  EXPECT_EQ(s.count(5), 0);
  EXPECT_EQ(s.total, 4);
  EXPECT_EQ(s.percentage(12), 75.0);
  EXPECT_EQ(s.percentage(80), 25.0);
}

TEST(ClassStats, SingleLabelIsHundredPercent) {
  const auto s = class_stats({testing::make_instance("v", 1, 0, {7})});
  EXPECT_EQ(s.percentage(7), 100.0);
}

TEST(ClassStats, EmptyDatasetThrows) {
  EXPECT_THROW(class_stats({}), EmptyDatasetError);
}

TEST(ClassStats, PercentagesSumToHundred) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = class_stats(testing::random_instances(gen, 1 + trial, 80, 6));
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& [c, p] : s.percentages) sum += p;
    for (const auto& [c, k] : s.counts) n += k;
    EXPECT_NEAR(sum, 100.0, 1e-9);
    EXPECT_EQ(n, s.total);
  }
}

TEST(LabelMap, Parse) {
  const auto m = parse_label_map("1\tbend/bow\n2\tcrawl\n3\tcrouch/kneel\n");
  EXPECT_EQ(m.num_classes(), 3);
  EXPECT_EQ(m.names.at(2), "crawl");
  EXPECT_THROW(parse_label_map("1\ta\n3\tc\n"), ValidationError);
  EXPECT_THROW(parse_label_map("1 a\n"), ParseError);
  EXPECT_THROW(parse_label_map("1\ta\n1\tb\n"), ValidationError);
}

}  // namespace
}  // namespace avakit
