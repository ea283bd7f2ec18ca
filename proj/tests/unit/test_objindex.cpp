#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "groundbridge/datasim.hpp"
#include "groundbridge/error.hpp"
#include "groundbridge/objindex.hpp"
#include "helpers.hpp"

using namespace groundbridge;

namespace {

ObjectIndex random_index(std::mt19937_64& rng, std::size_t n) {
  ObjectIndex idx;
  for (std::size_t i = 0; i < n; ++i) idx.add(gbtest::random_unit(rng, 64), all_labels()[rng() % kLabelCount]);
  return idx;
}

const DatasetSplit& split() {
  static const DatasetSplit s = build_split(generate_dataset(GeneratorConfig{}, 2), SplitConfig{}, 2);
  return s;
}

}  // namespace

TEST(Index, EmptySamplesGiveEmptyIndex) {
  EXPECT_TRUE(build_index(init_params(1), std::vector<StackSample>{}).empty());
}

TEST(Index, OneEntryPerSampleEqualToForward) {
  const auto params = init_params(1);
  const std::vector<StackSample> test(split().test.begin(), split().test.begin() + 800);
  const auto idx = build_index(params, test);
  ASSERT_EQ(idx.size(), 800u);
  for (std::size_t i = 0; i < 800; i += 37) {
    EXPECT_EQ(idx.embedding(i), forward(params, encoder_input(test[i])).values);
    EXPECT_EQ(idx.label(i), test[i].label());
    EXPECT_EQ(idx.supercategory(i), supercategory_of(test[i].label()));
  }
}

TEST(Index, RejectsNonUnitEntries) {
  ObjectIndex idx;
  EXPECT_THROW(idx.add(std::vector<double>(64, 1.0), ObjectLabel::cube), Error);
  EXPECT_THROW(idx.add(std::vector<double>(3, 0.5), ObjectLabel::cube), Error);
}

TEST(Query, ExactMatchComesFirst) {
  std::mt19937_64 rng(1);
  const auto idx = random_index(rng, 50);
  const auto nn = knn_query(idx, idx.embedding(17), 1);
  ASSERT_EQ(nn.size(), 1u);
  EXPECT_EQ(nn[0].position, 17u);
  EXPECT_EQ(nn[0].label, idx.label(17));
  EXPECT_NEAR(nn[0].similarity, 1.0, 1e-6);
}

TEST(Query, FullScanIsSortedDescending) {
  std::mt19937_64 rng(2);
  const auto idx = random_index(rng, 30);
  const auto nn = knn_query(idx, gbtest::gaussian(rng, 64), 30);
  ASSERT_EQ(nn.size(), 30u);
  for (std::size_t i = 1; i < nn.size(); ++i) EXPECT_GE(nn[i - 1].similarity, nn[i].similarity);
}

TEST(Query, MatchesExhaustiveScan) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto idx = random_index(rng, 200);
    const auto q = gbtest::gaussian(rng, 64);
    const auto qn = gbtest::unit(q);
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < idx.size(); ++i) all.emplace_back(gbtest::dot(idx.embedding(i), qn), i);
    std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first > b.first; });
    const auto nn = knn_query(idx, q, 10);
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_EQ(nn[j].position, all[j].second);
      EXPECT_NEAR(nn[j].similarity, all[j].first, 1e-12);
    }
  }
}

TEST(Query, TiesGoToInsertionOrder) {
  ObjectIndex idx;
  std::vector<double> e(64, 0.0);
  e[0] = 1.0;
  idx.add(e, ObjectLabel::egg);
  idx.add(e, ObjectLabel::cube);
  const auto nn = knn_query(idx, e, 2);
  EXPECT_EQ(nn[0].label, ObjectLabel::egg);
  EXPECT_EQ(nn[1].label, ObjectLabel::cube);
}

TEST(Query, KOutOfRangeIsArgumentError) {
  std::mt19937_64 rng(4);
  const auto idx = random_index(rng, 5);
  for (std::size_t k : {std::size_t{0}, std::size_t{6}}) {
    try {
      knn_query(idx, idx.embedding(0), k);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::argument);
    }
  }
}

TEST(Query, InvariantUnderIndexPermutation) {
  std::mt19937_64 rng(5);
  std::vector<std::pair<std::vector<double>, ObjectLabel>> items;
  for (int i = 0; i < 100; ++i) items.emplace_back(gbtest::random_unit(rng, 64), all_labels()[rng() % kLabelCount]);
  ObjectIndex a, b;
  for (auto& [v, l] : items) a.add(v, l);
  std::shuffle(items.begin(), items.end(), rng);
  for (auto& [v, l] : items) b.add(v, l);
  const auto q = gbtest::gaussian(rng, 64);
  const auto na = knn_query(a, q, 10), nb = knn_query(b, q, 10);
  for (std::size_t j = 0; j < 10; ++j) {
    EXPECT_EQ(na[j].similarity, nb[j].similarity);
    EXPECT_EQ(na[j].label, nb[j].label);
  }
}

TEST(Vote, MajorityThenMeanSimilarity) {
  EXPECT_EQ(majority_vote(std::vector<int>{3}, std::vector<double>{0.2}), 3);
  EXPECT_EQ(majority_vote(std::vector<int>{1, 2, 2}, std::vector<double>{0.9, 0.1, 0.1}), 2);
  // 2-2 tie: label 1 has the higher mean similarity
  EXPECT_EQ(majority_vote(std::vector<int>{2, 1, 1, 2}, std::vector<double>{0.5, 0.8, 0.7, 0.6}), 1);
  EXPECT_THROW(majority_vote(std::vector<int>{}, std::vector<double>{}), Error);
}

TEST(Confusion, SelfRetrievalIsPerfect) {
  const auto params = init_params(6);
  const auto idx = build_index(params, split().test);
  const auto cm = evaluate_confusion(idx, split().test, params, 1, 100);
  EXPECT_DOUBLE_EQ(cm.accuracy, 1.0);
  EXPECT_EQ(cm.total(), 1100u);
}

TEST(Confusion, RowsNormaliseAndCountsAddUp) {
  const auto params = init_params(7);
  const auto idx = build_index(params, split().index);
  const auto cm = evaluate_confusion(idx, split().test, params, 10, 50);
  EXPECT_EQ(cm.total(), 11u * 50u);
  std::size_t trace = 0;
  for (std::size_t t = 0; t < kLabelCount; ++t) {
    double row = 0.0;
    for (double v : cm.normalized[t]) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      row += v;
    }
    EXPECT_NEAR(row, 1.0, 1e-9);
    trace += cm.counts[t][t];
  }
  EXPECT_DOUBLE_EQ(cm.accuracy, static_cast<double>(trace) / 550.0);
  EXPECT_GE(cm.cross_supercategory_rate(), 0.0);
}

TEST(Confusion, MissingClassIsShortage) {
  const auto params = init_params(8);
  const auto idx = build_index(params, split().index);
  std::vector<StackSample> no_eggs;
  for (const auto& s : split().test) {
    if (s.label() != ObjectLabel::egg) no_eggs.push_back(s);
  }
  try {
    evaluate_confusion(idx, no_eggs, params);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shortage);
    EXPECT_NE(std::string(e.what()).find("egg"), std::string::npos);
  }
}

TEST(Confusion, CrossSupercategoryRateCountsOffBlockMass) {
  ConfusionMatrix cm;
  cm.counts[static_cast<std::size_t>(ObjectLabel::cube)][static_cast<std::size_t>(ObjectLabel::cube)] = 8;
  cm.counts[static_cast<std::size_t>(ObjectLabel::cube)][static_cast<std::size_t>(ObjectLabel::sphere)] = 1;
  cm.counts[static_cast<std::size_t>(ObjectLabel::egg)][static_cast<std::size_t>(ObjectLabel::sphere)] = 1;
  EXPECT_DOUBLE_EQ(cm.cross_supercategory_rate(), 0.1);
}

TEST(Confusion, CsvUsesFixedClassOrder) {
  const auto params = init_params(9);
  const auto idx = build_index(params, split().index);
  const auto cm = evaluate_confusion(idx, split().test, params, 10, 20);
  const auto dir = std::filesystem::temp_directory_path();
  write_confusion_csv(dir / "gb_cm.csv", dir / "gb_cm.full.csv", cm);
  std::ifstream in(dir / "gb_cm.csv");
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "true\\predicted,cube,sphere,cyl-f,cyl-r,cpsl,scube,egg,rect,pyr,cone-f,cone-r");
  std::getline(in, row);
  EXPECT_EQ(row.rfind("cube,", 0), 0u);
  EXPECT_EQ(row.find('.', row.find(',') + 1) - row.find(',') - 1, 1u);  // "0.xx"
  std::size_t lines = 1;
  while (std::getline(in, row)) ++lines;
  EXPECT_EQ(lines, 11u);
  EXPECT_TRUE(std::filesystem::exists(dir / "gb_cm.full.csv"));
}
