#include "groundbridge/curriculum.hpp"

#include <algorithm>

#include "groundbridge/error.hpp"

namespace groundbridge {

void Curriculum::validate() const {
  require(!stages.empty(), ErrorKind::config, "curriculum '" + name + "' has no stages");
  std::set<std::string> seen;
  bool in_hints = false;
  for (const auto& st : stages) {
    require(!st.words.empty(), ErrorKind::config, "stage '" + st.label + "' introduces no words");
    if (st.hint) in_hints = true;
    require(st.hint || !in_hints, ErrorKind::config, "base stage '" + st.label + "' follows a hint stage");
    for (const auto& w : st.words) {
      Vocabulary::standard().at(w);
      require(seen.insert(w).second, ErrorKind::duplicate, "'" + w + "' is introduced twice");
    }
  }
  require(!stages.front().hint, ErrorKind::config, "curriculum must start with a base stage");
}

std::size_t Curriculum::base_stage_count() const {
  return static_cast<std::size_t>(
      std::count_if(stages.begin(), stages.end(), [](const CurriculumStage& s) { return !s.hint; }));
}

namespace {

void link_hints(Curriculum& c) {
  for (auto& p : c.eval_pairs) {
    for (std::size_t i = 0; i < c.stages.size(); ++i) {
      const auto& ws = c.stages[i].words;
      if (c.stages[i].hint && std::find(ws.begin(), ws.end(), p.word_a) != ws.end()) p.hint_stage = i;
    }
  }
}

EvalPairSpec concept_pair(const std::string& a, const std::string& b) {
  return EvalPairSpec{a + "/" + b, a, b, LabelRule::supercategories(), std::nullopt};
}

EvalPairSpec object_pair(std::string name, std::string a, std::string b, ObjectLabel la, ObjectLabel lb) {
  return EvalPairSpec{std::move(name), std::move(a), std::move(b), LabelRule::objects(la, lb), std::nullopt};
}

}  // namespace

Curriculum objects_first(bool hint_all) {
  Curriculum c;
  c.name = "objects-first";
  c.stages = {
      {"cube+sphere", {"cube", "sphere"}, false},
      {"pyramid+capsule", {"pyramid", "capsule"}, false},
      {"rectangular prism+egg", {"rectangular prism", "egg"}, false},
      {"small cube", {"small cube"}, false},
      {"cylinder", {"cylinder"}, false},
      {"cone", {"cone"}, false},
  };
  for (const auto& [a, b] : Vocabulary::standard().concept_pairs()) {
    c.stages.push_back({"hint " + a + "/" + b, {a, b}, true});
    c.eval_pairs.push_back(concept_pair(a, b));
  }
  if (hint_all) c.stages.push_back({"hint block/ball", {"block", "ball"}, true});
  c.eval_pairs.push_back(object_pair("block/ball", "block", "ball", ObjectLabel::cube, ObjectLabel::sphere));
  link_hints(c);
  c.validate();
  return c;
}

Curriculum concepts_first(bool hint_all) {
  Curriculum c;
  c.name = "concepts-first";
  for (const auto& [a, b] : Vocabulary::standard().concept_pairs()) {
    c.stages.push_back({a + "/" + b, {a, b}, false});
  }
  c.stages.push_back({"hint cube/sphere", {"cube", "sphere"}, true});
  c.stages.push_back({"hint pyramid/capsule", {"pyramid", "capsule"}, true});
  c.stages.push_back({"hint cylinder", {"cylinder"}, true});
  c.stages.push_back({"hint cone", {"cone"}, true});
  if (hint_all) c.stages.push_back({"hint block/ball", {"block", "ball"}, true});
  c.eval_pairs = {
      object_pair("cube/sphere", "cube", "sphere", ObjectLabel::cube, ObjectLabel::sphere),
      object_pair("pyr/cpsl", "pyramid", "capsule", ObjectLabel::pyramid, ObjectLabel::capsule),
      object_pair("cyl-f/cyl-r", "cylinder", "cylinder", ObjectLabel::cylinder_flat, ObjectLabel::cylinder_round),
      object_pair("cone-f/cone-r", "cone", "cone", ObjectLabel::cone_flat, ObjectLabel::cone_round),
      object_pair("block/ball", "block", "ball", ObjectLabel::cube, ObjectLabel::sphere),
  };
  link_hints(c);
  c.validate();
  return c;
}

Curriculum curriculum_preset(const std::string& name, bool hint_all) {
  if (name == "objects-first") return objects_first(hint_all);
  if (name == "concepts-first") return concepts_first(hint_all);
  fail(ErrorKind::config, "unknown curriculum preset '" + name + "' (objects-first | concepts-first)");
}

PairAccumulator add_words(const PairAccumulator& acc, std::span<const std::string> words,
                          const GroundingContext& ctx, std::size_t n, std::uint64_t seed, bool hint) {
  PairAccumulator out = acc;
  for (const auto& w : words) {
    require(std::find(out.introduced.begin(), out.introduced.end(), w) == out.introduced.end(),
            ErrorKind::duplicate, "'" + w + "' was already introduced");
    out.introduced.push_back(w);
    if (hint) out.hinted.insert(w);
  }
  if (n == 0) return out;
  PairDraw draw = make_pairs(ctx.tokens, ctx.index, ctx.corpus_map, words, n, seed, acc.used);
  out.pairs.insert(out.pairs.end(), std::make_move_iterator(draw.pairs.begin()),
                   std::make_move_iterator(draw.pairs.end()));
  out.used.insert(draw.used.begin(), draw.used.end());
  return out;
}

PairAccumulator add_hint(const PairAccumulator& acc, const std::string& word, const GroundingContext& ctx,
                         std::size_t n, std::uint64_t seed) {
  const std::array<std::string, 1> words{word};
  return add_words(acc, words, ctx, n, seed, true);
}

const StageResult& CurriculumRun::unhinted_stage() const {
  std::size_t last = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (!stages[i].hint) last = i;
  }
  return stages.at(last);
}

const PairEval& CurriculumRun::unhinted_eval(std::size_t pair) const { return unhinted_stage().evals.at(pair); }

std::optional<PairEval> CurriculumRun::hinted_eval(std::size_t pair) const {
  const auto& spec = eval_pairs.at(pair);
  if (!spec.hint_stage || *spec.hint_stage >= stages.size()) return std::nullopt;
  return stages[*spec.hint_stage].evals.at(pair);
}

namespace {

struct EvalTokens {
  std::vector<const TokenEmbedding*> tokens;
  std::vector<int> gold;
};

EvalTokens eval_tokens(const GroundingContext& ctx, const EvalPairSpec& spec, const std::set<OccurrenceKey>& used) {
  const auto& vocab = Vocabulary::standard();
  EvalTokens out;
  for (const auto& t : ctx.tokens) {
    if (t.word != spec.word_a && t.word != spec.word_b) continue;
    if (used.count(OccurrenceKey{t.word, t.sentence_id})) continue;
    int gold = 0;
    if (spec.rule.kind == LabelRule::Kind::supercategory) {
      gold = t.word == spec.word_a ? spec.rule.a : spec.rule.b;
    } else {
      const Term& term = vocab.at(t.word);
      const ObjectLabel cls =
          term.kind == TermKind::oriented ? ctx.corpus_map.resolve(t.word, t.sentence_id) : term.object;
      gold = static_cast<int>(cls);
      if (gold != spec.rule.a && gold != spec.rule.b) continue;
    }
    out.tokens.push_back(&t);
    out.gold.push_back(gold);
  }
  require(std::count(out.gold.begin(), out.gold.end(), spec.rule.a) > 0 &&
              std::count(out.gold.begin(), out.gold.end(), spec.rule.b) > 0,
          ErrorKind::shortage, "no held-out occurrences on one side of '" + spec.name + "'");
  return out;
}

}  // namespace

CurriculumRun run_curriculum(const GroundingContext& ctx, const Curriculum& curriculum,
                             const CurriculumOptions& options) {
  curriculum.validate();
  require(!ctx.tokens.empty(), ErrorKind::argument, "no token embeddings");
  CurriculumRun run;
  run.curriculum = curriculum.name;
  run.lambda = options.lambda;
  run.eval_pairs = curriculum.eval_pairs;
  run.model_tag = ctx.tokens.front().source_model;
  for (const auto& t : ctx.tokens) {
    require(t.source_model == run.model_tag, ErrorKind::config,
            "tokens mix models '" + run.model_tag + "' and '" + t.source_model + "'; ground one model at a time");
  }

  // All pairing occurrences are fixed before any fitting.
  std::vector<std::string> all_words;
  for (const auto& st : curriculum.stages) all_words.insert(all_words.end(), st.words.begin(), st.words.end());
  const std::set<OccurrenceKey> reserved =
      make_pairs(ctx.tokens, ctx.index, ctx.corpus_map, all_words, options.n_per_word, options.seed).used;

  std::vector<EvalTokens> held_out;
  for (const auto& spec : curriculum.eval_pairs) held_out.push_back(eval_tokens(ctx, spec, reserved));

  PairAccumulator acc;
  for (const auto& st : curriculum.stages) {
    acc = add_words(acc, st.words, ctx, options.n_per_word, options.seed, st.hint);
    StageResult sr{st.label, st.hint, fit_ridge(acc.pairs, options.lambda), {}};
    for (std::size_t p = 0; p < curriculum.eval_pairs.size(); ++p) {
      const auto& spec = curriculum.eval_pairs[p];
      const auto& ho = held_out[p];
      std::vector<std::vector<double>> side_a, side_b;
      std::vector<LabeledPoint> points;
      for (std::size_t i = 0; i < ho.tokens.size(); ++i) {
        auto v = apply_map(sr.map, ho.tokens[i]->vector);
        (ho.gold[i] == spec.rule.a ? side_a : side_b).push_back(v);
        points.push_back(LabeledPoint{std::move(v), ho.gold[i]});
      }
      PairEval pe{spec.name, center_similarity(side_a, side_b), knn_f1(ctx.index, points, spec.rule, options.k)};
      pe.knn.pair = spec.name;
      pe.knn.hinted = acc.hinted.count(spec.word_a) > 0;
      sr.evals.push_back(std::move(pe));
    }
    run.stages.push_back(std::move(sr));
  }

  const AffineMap& last = run.stages.back().map;
  for (std::size_t p = 0; p < curriculum.eval_pairs.size(); ++p) {
    const auto& ho = held_out[p];
    for (std::size_t i = 0; i < ho.tokens.size(); ++i) {
      run.final_points.push_back(TransformedToken{ho.tokens[i]->word, ho.tokens[i]->sentence_id, ho.gold[i],
                                                  curriculum.eval_pairs[p].name, apply_map(last, ho.tokens[i]->vector)});
    }
  }
  return run;
}

}  // namespace groundbridge
