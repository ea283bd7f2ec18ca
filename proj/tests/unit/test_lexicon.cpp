#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "groundbridge/error.hpp"
#include "groundbridge/lexicon.hpp"
#include "helpers.hpp"

using namespace groundbridge;

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

std::vector<TokenEmbedding> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_tokens_jsonl(in);
}

RawHiddenStates raw_of(std::size_t t, std::size_t d, std::mt19937_64& rng) {
  RawHiddenStates r{"cube", "s1", "bert-base", {}};
  r.layers.assign(4, std::vector<std::vector<double>>(t));
  for (auto& layer : r.layers) {
    for (auto& piece : layer) piece = gbtest::gaussian(rng, d);
  }
  return r;
}

std::vector<Sentence> mini_corpus() {
  std::istringstream in(
      "c1\tThe cube is flat.\nc2\tA small cube is flat.\nc3\tThe rectangular prism is flat.\n"
      "c4\tThe pyramid is flat.\nc5\tThe sphere is round.\nc6\tThe egg is round.\nc7\tThe capsule is round.\n");
  return parse_corpus(in);
}

const TokenEmbedding& find(const std::vector<TokenEmbedding>& toks, const std::string& w, const std::string& sid) {
  for (const auto& t : toks) {
    if (t.word == w && t.sentence_id == sid) return t;
  }
  throw std::runtime_error("missing token " + w + "@" + sid);
}

ObjectIndex labelled_index(std::mt19937_64& rng, std::size_t per_class) {
  ObjectIndex idx;
  for (auto l : all_labels()) {
    for (std::size_t i = 0; i < per_class; ++i) idx.add(gbtest::random_unit(rng, 64), l);
  }
  return idx;
}

}  // namespace

TEST(Compose, SingleNonZeroLayer) {
  RawHiddenStates r{"cube", "s", "m", {}};
  const std::vector<double> v{1.0, -2.0, 3.5};
  r.layers = {{v}, {{0, 0, 0}}, {{0, 0, 0}}, {{0, 0, 0}}};
  EXPECT_EQ(compose_token_vector(r).vector, v);
}

TEST(Compose, AveragesComposedPieces) {
  RawHiddenStates r{"cube", "s", "m", {}};
  // piece 0 sums to u = (4, 0), piece 1 sums to w = (0, 8)
  r.layers = {{{1, 0}, {0, 2}}, {{1, 0}, {0, 2}}, {{1, 0}, {0, 2}}, {{1, 0}, {0, 2}}};
  EXPECT_EQ(compose_token_vector(r).vector, (std::vector<double>{2.0, 4.0}));
}

TEST(Compose, MatchesSumThenMeanOracle) {
  std::mt19937_64 rng(1);
  const auto r = raw_of(3, 8, rng);
  const auto got = compose_token_vector(r);
  for (std::size_t j = 0; j < 8; ++j) {
    double want = 0.0;
    for (std::size_t t = 0; t < 3; ++t) {
      double piece = 0.0;
      for (std::size_t l = 0; l < 4; ++l) piece += r.layers[l][t][j];
      want += piece;
    }
    EXPECT_NEAR(got.vector[j], want / 3.0, 1e-14);
  }
  EXPECT_EQ(got.word, "cube");
  EXPECT_EQ(got.source_model, "bert-base");
}

TEST(Compose, LinearInHiddenStates) {
  std::mt19937_64 rng(2);
  const auto a = raw_of(2, 5, rng), b = raw_of(2, 5, rng);
  auto sum = a;
  for (std::size_t l = 0; l < 4; ++l) {
    for (std::size_t t = 0; t < 2; ++t) {
      for (std::size_t j = 0; j < 5; ++j) sum.layers[l][t][j] = 2.0 * a.layers[l][t][j] - b.layers[l][t][j];
    }
  }
  const auto va = compose_token_vector(a).vector, vb = compose_token_vector(b).vector;
  const auto vs = compose_token_vector(sum).vector;
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(vs[j], 2.0 * va[j] - vb[j], 1e-12);
}

TEST(Compose, MalformedRecordsAreFormatErrors) {
  std::mt19937_64 rng(3);
  auto r = raw_of(2, 4, rng);
  r.layers.pop_back();
  EXPECT_EQ(kind_of([&] { compose_token_vector(r); }), ErrorKind::format);
  r = raw_of(2, 4, rng);
  r.layers[2][1].push_back(0.0);
  EXPECT_EQ(kind_of([&] { compose_token_vector(r); }), ErrorKind::format);
  r = raw_of(0, 4, rng);
  EXPECT_EQ(kind_of([&] { compose_token_vector(r); }), ErrorKind::format);
}

TEST(Jsonl, ComposedAndRawRecords) {
  const auto toks = parse(
      R"({"word":"cube","sentence_id":"s1","model":"m","vector":[1,2]})"
      "\n\n"
      R"({"word":"flat","sentence_id":"s1","model":"m","layers":[[[1,0]],[[1,0]],[[0,1]],[[0,1]]],"version":"1.2"})"
      "\n");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].vector, (std::vector<double>{1, 2}));
  EXPECT_EQ(toks[1].vector, (std::vector<double>{2, 2}));
  EXPECT_EQ(toks[1].source_model, "m");
}

TEST(Jsonl, RejectsBadRecords) {
  EXPECT_EQ(kind_of([] { parse("{not json\n"); }), ErrorKind::format);
  EXPECT_EQ(kind_of([] { parse(R"({"word":"cube","sentence_id":"s","vector":[1]})"); }), ErrorKind::format);
  EXPECT_EQ(kind_of([] { parse(R"({"word":"cube","sentence_id":"s","model":"m"})"); }), ErrorKind::format);
  EXPECT_EQ(kind_of([] {
              parse(R"({"word":"cube","sentence_id":"s","model":"m","vector":[1],"layers":[[[1]],[[1]],[[1]],[[1]]]})");
            }),
            ErrorKind::format);
  EXPECT_EQ(kind_of([] { parse(R"({"word":"cube","sentence_id":"s","model":"m","vector":[1],"version":"2.0"})"); }),
            ErrorKind::format);
  EXPECT_EQ(kind_of([] { parse(R"({"word":"cube","sentence_id":"s","model":"m","layers":[[[1]],[[1]],[[1]]]})"); }),
            ErrorKind::format);
  EXPECT_EQ(kind_of([] {
              parse(R"({"word":"cube","sentence_id":"s","model":"m","vector":[1,2]})"
                    "\n"
                    R"({"word":"flat","sentence_id":"s","model":"m","vector":[1]})");
            }),
            ErrorKind::format);
  EXPECT_EQ(kind_of([] {
              parse(R"({"word":"cube","sentence_id":"s","model":"m","vector":[1]})"
                    "\n"
                    R"({"word":"cube","sentence_id":"s","model":"m","vector":[2]})");
            }),
            ErrorKind::duplicate);
}

TEST(Jsonl, DimensionsMayDifferAcrossModels) {
  const auto toks = parse(
      R"({"word":"cube","sentence_id":"s","model":"bert","vector":[1,2]})"
      "\n"
      R"({"word":"cube","sentence_id":"s","model":"xlm","vector":[1,2,3]})");
  EXPECT_EQ(toks.size(), 2u);
}

TEST(Jsonl, WriteReadRoundTripIsExact) {
  const auto toks = synth_embeddings(SynthSpec{16, 0.3, 1.0, 0.5, "synthetic"}, mini_corpus(), 4);
  const auto path = std::filesystem::temp_directory_path() / "gb_tokens.jsonl";
  write_tokens_jsonl(path, toks);
  EXPECT_EQ(read_tokens_jsonl(path), toks);
  std::filesystem::remove(path);
}

TEST(Synth, FullEntanglementWithoutNoiseHitsTheObjectMean) {
  SynthSpec spec{32, 1.0, 0.0, 0.5, "synthetic"};
  const auto toks = synth_embeddings(spec, mini_corpus(), 9);
  const auto& flat = find(toks, "flat", "c1").vector;
  for (std::size_t j = 0; j < 32; ++j) {
    const double mean = (find(toks, "cube", "c1").vector[j] + find(toks, "small cube", "c2").vector[j] +
                         find(toks, "rectangular prism", "c3").vector[j] + find(toks, "pyramid", "c4").vector[j]) /
                        4.0;
    EXPECT_NEAR(flat[j], mean, 1e-12);
  }
  // without noise every occurrence of a word is identical
  EXPECT_EQ(find(toks, "flat", "c1").vector, find(toks, "flat", "c4").vector);
}

TEST(Synth, NoEntanglementKeepsAnchorsApart) {
  const auto toks = synth_embeddings(SynthSpec{32, 0.0, 0.0, 0.5, "synthetic"}, mini_corpus(), 9);
  EXPECT_NE(find(toks, "flat", "c1").vector, find(toks, "cube", "c1").vector);
}

TEST(Synth, DeterministicAndOneTokenPerMention) {
  const SynthSpec spec{24, 0.5, 0.1, 0.5, "tag"};
  const auto a = synth_embeddings(spec, mini_corpus(), 5);
  EXPECT_EQ(a, synth_embeddings(spec, mini_corpus(), 5));
  EXPECT_NE(a, synth_embeddings(spec, mini_corpus(), 6));
  EXPECT_EQ(a.size(), 14u);
  for (const auto& t : a) {
    EXPECT_EQ(t.vector.size(), 24u);
    EXPECT_EQ(t.source_model, "tag");
  }
}

TEST(Synth, InvalidSpecIsConfigError) {
  EXPECT_EQ(kind_of([] { synth_embeddings(SynthSpec{8, 1.5, 0.1, 0.5, "x"}, mini_corpus(), 1); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { synth_embeddings(SynthSpec{8, 0.5, -1.0, 0.5, "x"}, mini_corpus(), 1); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { synth_embeddings(SynthSpec{0, 0.5, 0.1, 0.5, "x"}, mini_corpus(), 1); }), ErrorKind::config);
}

// Monte Carlo: higher eta pulls concept means towards their objects.
TEST(Synth, EntanglementShrinksConceptToObjectDistance) {
  const auto corpus = read_corpus(GB_CORPUS_FILE);
  auto distance = [&](double eta, std::uint64_t seed) {
    const auto toks = synth_embeddings(SynthSpec{64, eta, 1.0, 0.5, "synthetic"}, corpus, seed);
    std::vector<double> concept_mean(64, 0.0), object_mean(64, 0.0);
    double nc = 0, no = 0;
    for (const auto& t : toks) {
      if (t.word == "flat") {
        for (std::size_t j = 0; j < 64; ++j) concept_mean[j] += t.vector[j];
        ++nc;
      } else if (t.word == "cube" || t.word == "small cube" || t.word == "rectangular prism" || t.word == "pyramid") {
        for (std::size_t j = 0; j < 64; ++j) object_mean[j] += t.vector[j];
        ++no;
      }
    }
    double d = 0.0;
    for (std::size_t j = 0; j < 64; ++j) d += std::pow(concept_mean[j] / nc - object_mean[j] / no, 2);
    return std::sqrt(d);
  };
  int ok = 0;
  for (std::uint64_t s = 0; s < 40; ++s) ok += distance(0.2, s) > distance(0.8, s);
  EXPECT_GE(ok, 38);
}

TEST(Pairs, TargetsComeFromTheCollocatedClass) {
  std::mt19937_64 rng(7);
  const auto idx = labelled_index(rng, 10);
  const auto corpus = mini_corpus();
  const CorpusMap map(corpus);
  const auto toks = synth_embeddings(SynthSpec{8, 0.2, 0.5, 0.5, "s"}, corpus, 1);
  // only c1 pairs "flat" with a cube
  const std::vector<std::string> words{"cube"};
  const auto draw = make_pairs(toks, idx, map, words, 1, 3);
  ASSERT_EQ(draw.pairs.size(), 1u);
  EXPECT_EQ(draw.pairs[0].object, ObjectLabel::cube);
  bool found = false;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx.embedding(i) == draw.pairs[0].target) {
      found = true;
      EXPECT_EQ(idx.label(i), ObjectLabel::cube);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Pairs, FlatOnCubeSentencesDrawsCubeTargets) {
  std::mt19937_64 rng(8);
  const auto idx = labelled_index(rng, 10);
  std::string text;
  for (int i = 0; i < 8; ++i) text += "q" + std::to_string(i) + "\tThe cube is flat.\n";
  std::istringstream in(text);
  const auto corpus = parse_corpus(in);
  const CorpusMap map(corpus);
  const auto toks = synth_embeddings(SynthSpec{8, 0.2, 0.5, 0.5, "s"}, corpus, 1);
  const std::vector<std::string> words{"flat"};
  const auto draw = make_pairs(toks, idx, map, words, 5, 11);
  ASSERT_EQ(draw.pairs.size(), 5u);
  std::set<std::vector<double>> cubes;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx.label(i) == ObjectLabel::cube) cubes.insert(idx.embedding(i));
  }
  for (const auto& p : draw.pairs) {
    EXPECT_TRUE(cubes.count(p.target));
    EXPECT_EQ(p.term, "flat");
  }
  EXPECT_EQ(draw.used.size(), 5u);
}

TEST(Pairs, CountsDeterminismAndExclusion) {
  std::mt19937_64 rng(9);
  const auto idx = labelled_index(rng, 5);
  const auto corpus = read_corpus(GB_CORPUS_FILE);
  const CorpusMap map(corpus);
  const auto toks = synth_embeddings(SynthSpec{8, 0.2, 0.5, 0.5, "s"}, corpus, 1);
  const std::vector<std::string> words{"flat", "round", "stack"};
  const auto a = make_pairs(toks, idx, map, words, 5, 42);
  EXPECT_EQ(a.pairs.size(), 15u);
  const auto b = make_pairs(toks, idx, map, words, 5, 42);
  ASSERT_EQ(b.pairs.size(), 15u);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(a.pairs[i].sentence_id, b.pairs[i].sentence_id);
    EXPECT_EQ(a.pairs[i].target, b.pairs[i].target);
  }
  const auto c = make_pairs(toks, idx, map, words, 5, 42, a.used);
  for (const auto& p : c.pairs) EXPECT_FALSE(a.used.count(OccurrenceKey{p.term, p.sentence_id}));
  // each word has its own stream: adding a word does not move the others
  const std::vector<std::string> one{"round"};
  const auto d = make_pairs(toks, idx, map, one, 5, 42);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(d.pairs[i].sentence_id, a.pairs[5 + i].sentence_id);
}

TEST(Pairs, ShortageAndUnresolvedOccurrences) {
  std::mt19937_64 rng(10);
  const auto idx = labelled_index(rng, 5);
  const auto corpus = mini_corpus();
  const CorpusMap map(corpus);
  const auto toks = synth_embeddings(SynthSpec{8, 0.2, 0.5, 0.5, "s"}, corpus, 1);
  const std::vector<std::string> flat{"flat"};
  EXPECT_EQ(kind_of([&] { make_pairs(toks, idx, map, flat, 5, 1); }), ErrorKind::shortage);
  auto extra = toks;
  extra.push_back(TokenEmbedding{"flat", "zz9", "s", std::vector<double>(8, 0.0)});
  const CorpusMap empty;
  try {
    make_pairs(extra, idx, empty, flat, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mapping);
  }
  // the unresolved token alone, requested via a one-token draw, names its sentence
  const std::vector<TokenEmbedding> lone{extra.back()};
  try {
    make_pairs(lone, idx, map, flat, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mapping);
    EXPECT_NE(std::string(e.what()).find("zz9"), std::string::npos);
  }
}
