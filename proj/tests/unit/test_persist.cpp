#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <random>
#include <regex>

#include "groundbridge/error.hpp"
#include "groundbridge/persist.hpp"
#include "helpers.hpp"

using namespace groundbridge;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::io;
}

std::string bump_major(const std::string& doc) {
  return std::regex_replace(doc, std::regex(R"re("version"\s*:\s*"1\.0")re"), R"("version":"2.0")");
}

std::string minor_version(const std::string& doc) {
  return std::regex_replace(doc, std::regex(R"re("version"\s*:\s*"1\.0")re"), R"("version":"1.7")");
}

AffineMap random_map(std::mt19937_64& rng) {
  std::vector<GroundingPair> pairs;
  for (int i = 0; i < 10; ++i) {
    pairs.push_back(GroundingPair{gbtest::gaussian(rng, 7), gbtest::random_unit(rng, kEmbeddingDim),
                                  i % 2 ? "flat" : "cube", "s" + std::to_string(i), ObjectLabel::cube});
  }
  return fit_ridge(pairs, 0.3);
}

CurriculumRun sample_run() {
  CurriculumRun run;
  run.curriculum = "concepts-first";
  run.model_tag = "synthetic";
  run.lambda = 0.25;
  run.eval_pairs = {
      EvalPairSpec{"flat/round", "flat", "round", LabelRule::supercategories(), std::nullopt},
      EvalPairSpec{"cyl-f/cyl-r", "cylinder", "cylinder",
                   LabelRule::objects(ObjectLabel::cylinder_flat, ObjectLabel::cylinder_round), 1}};
  for (int s = 0; s < 2; ++s) {
    StageResult sr{"stage " + std::to_string(s), s == 1, {}, {}};
    for (const auto& p : run.eval_pairs) {
      PairEval e{p.name, 0.1 * s - 0.3, {}};
      e.knn = KnnReport{p.name, 0.1 / 3.0 + s, {0.25, 1.0 / 7.0}, {3, 4}, s == 1};
      sr.evals.push_back(e);
    }
    run.stages.push_back(sr);
  }
  run.final_points = {TransformedToken{"cylinder", "s12", 2, "cyl-f/cyl-r", std::vector<double>(64, 1.0 / 3.0)}};
  return run;
}

}  // namespace

TEST(Params, RoundTripIsBitExact) {
  const auto p = init_params(17);
  EXPECT_EQ(params_from_json(params_to_json(p)), p);
  const auto path = fs::temp_directory_path() / "gb_params.json";
  save_params(path, p);
  EXPECT_EQ(load_params(path), p);
  fs::remove(path);
  const auto wide = init_params(3, 43);
  EXPECT_EQ(params_from_json(params_to_json(wide)), wide);
}

TEST(Map, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  const auto m = random_map(rng);
  EXPECT_EQ(map_from_json(map_to_json(m)), m);
  const auto path = fs::temp_directory_path() / "gb_map.json";
  save_map(path, m);
  EXPECT_EQ(load_map(path), m);
  fs::remove(path);
}

TEST(Index, RoundTripKeepsOrderAndLabels) {
  std::mt19937_64 rng(2);
  ObjectIndex idx;
  for (auto l : all_labels()) idx.add(gbtest::random_unit(rng, kEmbeddingDim), l);
  const auto back = index_from_json(index_to_json(idx));
  ASSERT_EQ(back.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    EXPECT_EQ(back.embedding(i), idx.embedding(i));
    EXPECT_EQ(back.label(i), idx.label(i));
    EXPECT_EQ(back.supercategory(i), idx.supercategory(i));
  }
}

TEST(Run, RoundTripKeepsEvaluations) {
  const auto run = sample_run();
  const auto back = run_from_json(run_to_json(run));
  EXPECT_EQ(back.curriculum, run.curriculum);
  EXPECT_EQ(back.model_tag, run.model_tag);
  EXPECT_EQ(back.lambda, run.lambda);
  ASSERT_EQ(back.eval_pairs.size(), 2u);
  EXPECT_EQ(back.eval_pairs[1].rule.kind, LabelRule::Kind::object);
  EXPECT_EQ(back.eval_pairs[1].rule.a, run.eval_pairs[1].rule.a);
  EXPECT_EQ(back.eval_pairs[1].hint_stage, 1u);
  EXPECT_FALSE(back.eval_pairs[0].hint_stage.has_value());
  ASSERT_EQ(back.stages.size(), 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_EQ(back.stages[s].label, run.stages[s].label);
    EXPECT_EQ(back.stages[s].hint, run.stages[s].hint);
    for (std::size_t p = 0; p < 2; ++p) {
      const auto &a = back.stages[s].evals[p], &b = run.stages[s].evals[p];
      EXPECT_EQ(a.center_cosine, b.center_cosine);
      EXPECT_EQ(a.knn.macro_f1, b.knn.macro_f1);
      EXPECT_EQ(a.knn.f1, b.knn.f1);
      EXPECT_EQ(a.knn.support, b.knn.support);
      EXPECT_EQ(a.knn.hinted, b.knn.hinted);
    }
  }
  ASSERT_EQ(back.final_points.size(), 1u);
  EXPECT_EQ(back.final_points[0].vector, run.final_points[0].vector);
  EXPECT_EQ(back.final_points[0].gold, 2);
}

TEST(Versions, NewerMinorAcceptedNewerMajorRefused) {
  std::mt19937_64 rng(3);
  const auto m = random_map(rng);
  const auto doc = map_to_json(m);
  ASSERT_NE(bump_major(doc), doc);
  EXPECT_EQ(map_from_json(minor_version(doc)), m);
  EXPECT_EQ(kind_of([&] { map_from_json(bump_major(doc)); }), ErrorKind::format);
  EXPECT_EQ(kind_of([&] { params_from_json(bump_major(params_to_json(init_params(1)))); }), ErrorKind::format);
  EXPECT_EQ(kind_of([&] { run_from_json(bump_major(run_to_json(sample_run()))); }), ErrorKind::format);
}

TEST(Documents, MalformedInputIsFormatError) {
  EXPECT_EQ(kind_of([] { map_from_json("{"); }), ErrorKind::format);
  EXPECT_EQ(kind_of([] { map_from_json("[]"); }), ErrorKind::format);
  EXPECT_EQ(kind_of([] { map_from_json(R"({"format":"groundbridge-map"})"); }), ErrorKind::format);
  // a document of one kind is not accepted as another
  EXPECT_EQ(kind_of([] { params_from_json(index_to_json(ObjectIndex{})); }), ErrorKind::format);
  EXPECT_EQ(kind_of([] { load_map("/nonexistent/map.json"); }), ErrorKind::io);
  std::mt19937_64 rng(4);
  auto m = random_map(rng);
  m.weights[3] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(kind_of([&] { map_to_json(m); }), ErrorKind::numeric);
}
