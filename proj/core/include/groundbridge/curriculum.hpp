#pragma once

// Incremental grounding: words join the bridge fit stage by stage, the map is
// refit on everything introduced so far, and held-out occurrences of the
// evaluated pairs are scored after every stage.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "groundbridge/bridge.hpp"
#include "groundbridge/eval.hpp"
#include "groundbridge/lexicon.hpp"

namespace groundbridge {

struct CurriculumStage {
  std::string label;
  std::vector<std::string> words;
  bool hint = false;
};

struct EvalPairSpec {
  std::string name;  // "flat/round", "cyl-f/cyl-r", ...
  std::string word_a;
  std::string word_b;  // equal to word_a when one word splits by orientation
  LabelRule rule;
  std::optional<std::size_t> hint_stage;  // stage that hints this pair, if any
};

struct Curriculum {
  std::string name;
  std::vector<CurriculumStage> stages;
  std::vector<EvalPairSpec> eval_pairs;

  // Every word introduced at most once (duplicate error); hint stages come
  // after all base stages (configuration error).
  void validate() const;
  std::size_t base_stage_count() const;
};

// Objects first: cube+sphere, pyramid+capsule, rectangular prism+egg, small
// cube, cylinder, cone; then hints for flat/round, stack/roll,
// stable/unstable, stand/fall, and block/ball with `hint_all`.
Curriculum objects_first(bool hint_all = false);
// Concepts first: the four concept pairs; then hints for cube/sphere,
// pyramid/capsule, cylinder, cone, and block/ball with `hint_all`.
Curriculum concepts_first(bool hint_all = false);
// "objects-first" or "concepts-first"; configuration error otherwise.
Curriculum curriculum_preset(const std::string& name, bool hint_all = false);

struct GroundingContext {
  std::span<const TokenEmbedding> tokens;
  const ObjectIndex& index;
  const CorpusMap& corpus_map;
};

struct PairAccumulator {
  std::vector<GroundingPair> pairs;
  std::vector<std::string> introduced;  // in order
  std::set<std::string> hinted;
  std::set<OccurrenceKey> used;
};

// Appends n pairs for each word. Re-introducing a word is a duplicate error.
PairAccumulator add_words(const PairAccumulator& acc, std::span<const std::string> words,
                          const GroundingContext& ctx, std::size_t n, std::uint64_t seed, bool hint = false);
PairAccumulator add_hint(const PairAccumulator& acc, const std::string& word, const GroundingContext& ctx,
                         std::size_t n, std::uint64_t seed);

struct PairEval {
  std::string pair;
  double center_cosine = 0.0;
  KnnReport knn;
};

struct StageResult {
  std::string label;
  bool hint = false;
  AffineMap map;
  std::vector<PairEval> evals;  // in curriculum eval-pair order
};

struct TransformedToken {
  std::string word;
  std::string sentence_id;
  int gold = 0;  // gold label in the pair's rule space
  std::string pair;
  std::vector<double> vector;
};

struct CurriculumRun {
  std::string curriculum;
  std::string model_tag;
  double lambda = 1.0;
  std::vector<EvalPairSpec> eval_pairs;
  std::vector<StageResult> stages;
  std::vector<TransformedToken> final_points;  // held-out tokens under the last map

  const StageResult& unhinted_stage() const;  // last base stage
  // Snapshot for the pair under its own hint, when the curriculum hints it.
  std::optional<PairEval> hinted_eval(std::size_t pair) const;
  const PairEval& unhinted_eval(std::size_t pair) const;
};

struct CurriculumOptions {
  double lambda = 1.0;
  std::size_t n_per_word = 5;
  std::size_t k = 5;
  std::uint64_t seed = 0;
};

// The pairing occurrences of every curriculum word are drawn up front and
// never appear in any evaluation set; the evaluation set stays the same at
// every stage.
CurriculumRun run_curriculum(const GroundingContext& ctx, const Curriculum& curriculum,
                             const CurriculumOptions& options);

}  // namespace groundbridge
