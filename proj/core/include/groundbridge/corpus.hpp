#pragma once

// Sentence corpus and the grounding vocabulary. Each sentence mentions one
// object term plus a few property/behaviour words; every word occurrence is
// resolved to the object class it is collocated with.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "groundbridge/datasim.hpp"

namespace groundbridge {

enum class TermKind : std::uint8_t {
  object,      // names one object class
  oriented,    // cylinder / cone: class depends on the sentence's orientation words
  synonym,     // block / ball
  attribute,   // property or behaviour word tied to a supercategory
};

struct Term {
  std::string word;
  TermKind kind = TermKind::object;
  ObjectLabel object = ObjectLabel::cube;  // object and synonym terms
  std::optional<Supercategory> supercategory;  // empty for cylinder / cone
  std::vector<std::string> associated;  // object terms a concept or synonym leans towards
};

// 11 object terms (9 shapes + block, ball) and the 4 concept pairs.
class Vocabulary {
 public:
  static const Vocabulary& standard();

  const std::vector<Term>& terms() const { return terms_; }
  const Term* find(std::string_view word) const;
  const Term& at(std::string_view word) const;  // mapping error when unknown
  bool contains(std::string_view word) const { return find(word) != nullptr; }

  // flat/round, stack/roll, stable/unstable, stand/fall
  const std::vector<std::pair<std::string, std::string>>& concept_pairs() const { return concept_pairs_; }

 private:
  std::vector<Term> terms_;
  std::vector<std::pair<std::string, std::string>> concept_pairs_;
};

struct Sentence {
  std::string id;
  std::string text;
};

// `id<TAB>sentence` per line. Blank lines are skipped; a missing tab, an empty
// id or a repeated id is a format error.
std::vector<Sentence> parse_corpus(std::istream& in, const std::string& source = "corpus");
std::vector<Sentence> read_corpus(const std::filesystem::path& path);

// Lower-case alphabetic tokens.
std::vector<std::string> tokenize(std::string_view text);

struct Mention {
  std::string word;      // vocabulary form, e.g. "small cube"
  std::size_t position;  // token index of the first match
};

// Vocabulary mentions in order of first appearance; two-word terms win over
// their single-word tails, and a trailing plural "s" is ignored. A word that
// recurs in a sentence is reported once.
std::vector<Mention> find_mentions(std::string_view text, const Vocabulary& vocab = Vocabulary::standard());

struct OccurrenceKey {
  std::string word;
  std::string sentence_id;
  auto operator<=>(const OccurrenceKey&) const = default;
};

// Occurrence -> collocated object class. The collocated object is the first
// object term of the sentence; cylinder and cone take their orientation from
// the majority family of concept words in the same sentence.
class CorpusMap {
 public:
  CorpusMap() = default;
  explicit CorpusMap(std::span<const Sentence> sentences, const Vocabulary& vocab = Vocabulary::standard());

  // Mapping error naming the sentence when the occurrence cannot be resolved.
  ObjectLabel resolve(const std::string& word, const std::string& sentence_id) const;
  bool contains(const std::string& word, const std::string& sentence_id) const;

  // All resolvable occurrences, ordered by word then sentence id.
  const std::map<OccurrenceKey, ObjectLabel>& entries() const { return entries_; }
  // Occurrences found in the text that could not be resolved, with the reason.
  const std::map<OccurrenceKey, std::string>& unresolved() const { return unresolved_; }

  void set(const std::string& word, const std::string& sentence_id, ObjectLabel label);

 private:
  std::map<OccurrenceKey, ObjectLabel> entries_;
  std::map<OccurrenceKey, std::string> unresolved_;
};

}  // namespace groundbridge
