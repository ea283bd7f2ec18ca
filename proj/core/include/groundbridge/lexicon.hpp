#pragma once

// Contextual token vectors: ingestion, composition from raw hidden states, a
// synthetic generator, and pairing of word occurrences with object embeddings.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "groundbridge/corpus.hpp"
#include "groundbridge/objindex.hpp"

namespace groundbridge {

struct TokenEmbedding {
  std::string word;
  std::string sentence_id;
  std::string source_model;
  std::vector<double> vector;

  friend bool operator==(const TokenEmbedding&, const TokenEmbedding&) = default;
};

// Hidden states of one word occurrence: layers[l][t] is the d-vector of
// subword piece t in layer l, layers ordered last to fourth-from-last.
struct RawHiddenStates {
  std::string word;
  std::string sentence_id;
  std::string source_model;
  std::vector<std::vector<std::vector<double>>> layers;
};

// Sum over the four layers per piece, then mean over pieces.
TokenEmbedding compose_token_vector(const RawHiddenStates& raw);

// JSON Lines. Composed records carry "vector", raw records carry "layers";
// both carry "word", "sentence_id" and "model". Raw records are composed on
// read. Vector length must agree per model.
std::vector<TokenEmbedding> parse_tokens_jsonl(std::istream& in, const std::string& source = "tokens");
std::vector<TokenEmbedding> read_tokens_jsonl(const std::filesystem::path& path);
void write_tokens_jsonl(const std::filesystem::path& path, std::span<const TokenEmbedding> tokens);
std::string token_record_json(const TokenEmbedding& t);

struct SynthSpec {
  std::size_t dim = 768;
  double eta = 0.2;             // object/concept entanglement in [0, 1]
  double sigma = 2.5;           // per-coordinate noise relative to unit-variance anchors
  double context_weight = 0.5;  // how much of the sentence's concept words leaks into cylinder/cone tokens
  std::string model_tag = "synthetic";

  void validate() const;
};

// One token per vocabulary mention in the corpus. Anchors a_w ~ N(0, I);
// concept words centre on (1-eta) a_w + eta * mean(anchors of their
// associated object terms), synonyms on (1-eta) a_w + eta a_assoc, object
// terms on a_w. Cylinder and cone tokens additionally pick up
// context_weight * mean(anchors of the concept words in their sentence).
// Every token adds N(0, sigma^2 I) noise.
std::vector<TokenEmbedding> synth_embeddings(const SynthSpec& spec, std::span<const Sentence> sentences,
                                             std::uint64_t seed,
                                             const Vocabulary& vocab = Vocabulary::standard());

struct GroundingPair {
  std::vector<double> source;  // token vector
  std::vector<double> target;  // unit-norm object embedding
  std::string term;  // vocabulary word of the source
  std::string sentence_id;
  ObjectLabel object = ObjectLabel::cube;  // collocated class of the target
};

struct PairDraw {
  std::vector<GroundingPair> pairs;
  std::set<OccurrenceKey> used;
};

// For each word: `n_per_word` of its occurrences (not in `exclude`) in a
// seeded order, each paired with a random index embedding of the collocated
// object class. Each word draws from its own seed stream.
PairDraw make_pairs(std::span<const TokenEmbedding> tokens, const ObjectIndex& index, const CorpusMap& corpus_map,
                    std::span<const std::string> words, std::size_t n_per_word, std::uint64_t seed,
                    const std::set<OccurrenceKey>& exclude = {});

}  // namespace groundbridge
