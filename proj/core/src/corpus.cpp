#include "groundbridge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"

namespace groundbridge {

namespace {

Term object_term(std::string word, ObjectLabel label) {
  return Term{std::move(word), TermKind::object, label, supercategory_of(label), {}};
}

Term attribute_term(std::string word, Supercategory s) {
  std::vector<std::string> assoc = s == Supercategory::flat_sided
                                       ? std::vector<std::string>{"cube", "small cube", "rectangular prism", "pyramid"}
                                       : std::vector<std::string>{"sphere", "capsule", "egg"};
  return Term{std::move(word), TermKind::attribute, ObjectLabel::cube, s, std::move(assoc)};
}

}  // namespace

const Vocabulary& Vocabulary::standard() {
  static const Vocabulary v = [] {
    Vocabulary out;
    out.terms_ = {
        object_term("cube", ObjectLabel::cube),
        object_term("sphere", ObjectLabel::sphere),
        Term{"cylinder", TermKind::oriented, ObjectLabel::cylinder_flat, std::nullopt, {}},
        object_term("capsule", ObjectLabel::capsule),
        object_term("small cube", ObjectLabel::small_cube),
        object_term("egg", ObjectLabel::egg),
        object_term("rectangular prism", ObjectLabel::rectangular_prism),
        object_term("pyramid", ObjectLabel::pyramid),
        Term{"cone", TermKind::oriented, ObjectLabel::cone_flat, std::nullopt, {}},
        Term{"block", TermKind::synonym, ObjectLabel::cube, Supercategory::flat_sided, {"cube"}},
        Term{"ball", TermKind::synonym, ObjectLabel::sphere, Supercategory::round, {"sphere"}},
        attribute_term("flat", Supercategory::flat_sided),
        attribute_term("round", Supercategory::round),
        attribute_term("stack", Supercategory::flat_sided),
        attribute_term("roll", Supercategory::round),
        attribute_term("stable", Supercategory::flat_sided),
        attribute_term("unstable", Supercategory::round),
        attribute_term("stand", Supercategory::flat_sided),
        attribute_term("fall", Supercategory::round),
    };
    out.concept_pairs_ = {{"flat", "round"}, {"stack", "roll"}, {"stable", "unstable"}, {"stand", "fall"}};
    return out;
  }();
  return v;
}

const Term* Vocabulary::find(std::string_view word) const {
  for (const auto& t : terms_) {
    if (t.word == word) return &t;
  }
  return nullptr;
}

const Term& Vocabulary::at(std::string_view word) const {
  const Term* t = find(word);
  if (!t) fail(ErrorKind::mapping, "'" + std::string(word) + "' is not in the grounding vocabulary");
  return *t;
}

std::vector<Sentence> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<Sentence> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    const std::string where = source + ":" + std::to_string(line_no);
    require(tab != std::string::npos, ErrorKind::format, where + ": expected 'sentence_id<TAB>sentence'");
    Sentence s{line.substr(0, tab), line.substr(tab + 1)};
    require(!s.id.empty(), ErrorKind::format, where + ": empty sentence id");
    require(seen.insert(s.id).second, ErrorKind::format, where + ": repeated sentence id '" + s.id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sentence> read_corpus(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  return parse_corpus(in, path.string());
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

bool token_matches(const std::string& token, std::string_view word) {
  if (token == word) return true;
  return token.size() == word.size() + 1 && token.back() == 's' && token.compare(0, word.size(), word) == 0;
}

}  // namespace

std::vector<Mention> find_mentions(std::string_view text, const Vocabulary& vocab) {
  const auto tokens = tokenize(text);
  std::vector<Mention> out;
  std::set<std::string> seen;
  auto emit = [&](const std::string& word, std::size_t pos) {
    if (seen.insert(word).second) out.push_back(Mention{word, pos});
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bool matched = false;
    // two-word terms first
    for (const auto& t : vocab.terms()) {
      const auto space = t.word.find(' ');
      if (space == std::string::npos || i + 1 >= tokens.size()) continue;
      if (tokens[i] == t.word.substr(0, space) && token_matches(tokens[i + 1], t.word.substr(space + 1))) {
        emit(t.word, i);
        ++i;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (const auto& t : vocab.terms()) {
      if (t.word.find(' ') == std::string::npos && token_matches(tokens[i], t.word)) {
        emit(t.word, i);
        break;
      }
    }
  }
  return out;
}

CorpusMap::CorpusMap(std::span<const Sentence> sentences, const Vocabulary& vocab) {
  for (const auto& s : sentences) {
    const auto mentions = find_mentions(s.text, vocab);
    const Term* object = nullptr;
    int flat_votes = 0;
    int round_votes = 0;
    for (const auto& m : mentions) {
      const Term& t = vocab.at(m.word);
      if (t.kind == TermKind::attribute) {
        (*t.supercategory == Supercategory::flat_sided ? flat_votes : round_votes) += 1;
      } else if (!object) {
        object = &t;
      }
    }
    std::optional<ObjectLabel> label;
    std::string reason;
    if (!object) {
      reason = "sentence '" + s.id + "' names no object term";
    } else if (object->kind == TermKind::oriented) {
      const bool is_cyl = object->word == "cylinder";
      if (flat_votes > round_votes) {
        label = is_cyl ? ObjectLabel::cylinder_flat : ObjectLabel::cone_flat;
      } else if (round_votes > flat_votes) {
        label = is_cyl ? ObjectLabel::cylinder_round : ObjectLabel::cone_round;
      } else {
        reason = "sentence '" + s.id + "' does not settle the orientation of the " + object->word;
      }
    } else {
      label = object->object;
    }
    for (const auto& m : mentions) {
      OccurrenceKey key{m.word, s.id};
      if (label) {
        entries_[key] = *label;
      } else {
        unresolved_[key] = reason;
      }
    }
  }
}

ObjectLabel CorpusMap::resolve(const std::string& word, const std::string& sentence_id) const {
  const OccurrenceKey key{word, sentence_id};
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  if (auto it = unresolved_.find(key); it != unresolved_.end()) fail(ErrorKind::mapping, it->second);
  fail(ErrorKind::mapping, "no occurrence of '" + word + "' in sentence '" + sentence_id + "'");
}

bool CorpusMap::contains(const std::string& word, const std::string& sentence_id) const {
  return entries_.count(OccurrenceKey{word, sentence_id}) > 0;
}

void CorpusMap::set(const std::string& word, const std::string& sentence_id, ObjectLabel label) {
  OccurrenceKey key{word, sentence_id};
  unresolved_.erase(key);
  entries_[std::move(key)] = label;
}

}  // namespace groundbridge
