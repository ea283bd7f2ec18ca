#include "groundbridge/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"
#include "groundbridge/seeding.hpp"

namespace groundbridge {

using nlohmann::json;

TokenEmbedding compose_token_vector(const RawHiddenStates& raw) {
  const std::string who = "'" + raw.word + "' in '" + raw.sentence_id + "'";
  require(raw.layers.size() == 4, ErrorKind::format,
          who + ": expected 4 layers, got " + std::to_string(raw.layers.size()));
  const std::size_t pieces = raw.layers[0].size();
  require(pieces >= 1, ErrorKind::format, who + ": no subword pieces");
  const std::size_t d = raw.layers[0][0].size();
  require(d >= 1, ErrorKind::format, who + ": empty hidden state");

  TokenEmbedding out{raw.word, raw.sentence_id, raw.source_model, std::vector<double>(d, 0.0)};
  for (const auto& layer : raw.layers) {
    require(layer.size() == pieces, ErrorKind::format, who + ": layers disagree on the number of pieces");
    for (const auto& piece : layer) {
      require(piece.size() == d, ErrorKind::format, who + ": hidden states disagree on dimension");
      for (std::size_t j = 0; j < d; ++j) {
        require(std::isfinite(piece[j]), ErrorKind::format, who + ": non-finite hidden state");
        out.vector[j] += piece[j];
      }
    }
  }
  for (double& v : out.vector) v /= static_cast<double>(pieces);
  return out;
}

namespace {

std::string string_field(const json& rec, const char* key, const std::string& where) {
  const auto it = rec.find(key);
  require(it != rec.end() && it->is_string(), ErrorKind::format, where + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

std::vector<double> number_array(const json& arr, const std::string& where) {
  require(arr.is_array(), ErrorKind::format, where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    require(v.is_number(), ErrorKind::format, where + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void check_version(const json& rec, const std::string& where) {
  const auto it = rec.find("version");
  if (it == rec.end()) return;
  require(it->is_string(), ErrorKind::format, where + ": version must be a string");
  const auto v = it->get<std::string>();
  const auto major = csv::parse_int(v.substr(0, v.find('.')));
  require(major <= 1, ErrorKind::format, where + ": token format version " + v + " is newer than supported 1.x");
}

}  // namespace

std::vector<TokenEmbedding> parse_tokens_jsonl(std::istream& in, const std::string& source) {
  std::vector<TokenEmbedding> out;
  std::map<std::string, std::size_t> dims;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::format, where + ": " + e.what());
    }
    require(rec.is_object(), ErrorKind::format, where + ": record must be a JSON object");
    check_version(rec, where);

    TokenEmbedding tok;
    const std::string word = string_field(rec, "word", where);
    const std::string sid = string_field(rec, "sentence_id", where);
    const std::string model = string_field(rec, "model", where);
    const bool has_vec = rec.contains("vector");
    const bool has_layers = rec.contains("layers");
    require(has_vec != has_layers, ErrorKind::format, where + ": record needs exactly one of 'vector' or 'layers'");
    if (has_vec) {
      tok = TokenEmbedding{word, sid, model, number_array(rec["vector"], where)};
      for (double v : tok.vector) require(std::isfinite(v), ErrorKind::format, where + ": non-finite vector entry");
    } else {
      RawHiddenStates raw{word, sid, model, {}};
      const auto& layers = rec["layers"];
      require(layers.is_array(), ErrorKind::format, where + ": 'layers' must be a 3-level array");
      for (const auto& layer : layers) {
        require(layer.is_array(), ErrorKind::format, where + ": 'layers' must be a 3-level array");
        auto& dst = raw.layers.emplace_back();
        for (const auto& piece : layer) dst.push_back(number_array(piece, where));
      }
      try {
        tok = compose_token_vector(raw);
      } catch (const Error& e) {
        fail(ErrorKind::format, where + ": " + e.what());
      }
    }
    require(!tok.vector.empty(), ErrorKind::format, where + ": empty vector");
    auto [it, inserted] = dims.emplace(model, tok.vector.size());
    require(inserted || it->second == tok.vector.size(), ErrorKind::format,
            where + ": model '" + model + "' vectors have " + std::to_string(it->second) + " entries, this one " +
                std::to_string(tok.vector.size()));
    require(seen.emplace(model, word, sid).second, ErrorKind::duplicate,
            where + ": repeated record for '" + word + "' in '" + sid + "'");
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<TokenEmbedding> read_tokens_jsonl(const std::filesystem::path& path) {
  auto in = csv::open_in(path);
  return parse_tokens_jsonl(in, path.string());
}

std::string token_record_json(const TokenEmbedding& t) {
  json rec;
  rec["word"] = t.word;
  rec["sentence_id"] = t.sentence_id;
  rec["model"] = t.source_model;
  rec["vector"] = t.vector;
  return rec.dump();
}

void write_tokens_jsonl(const std::filesystem::path& path, std::span<const TokenEmbedding> tokens) {
  auto out = csv::open_out(path);
  for (const auto& t : tokens) out << token_record_json(t) << '\n';
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

void SynthSpec::validate() const {
  require(dim >= 1, ErrorKind::config, "synthetic dimension must be >= 1");
  require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, ErrorKind::config, "eta must lie in [0, 1]");
  require(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::config, "sigma must be finite and >= 0");
  require(std::isfinite(context_weight) && context_weight >= 0.0, ErrorKind::config,
          "context_weight must be finite and >= 0");
  require(!model_tag.empty(), ErrorKind::config, "model tag must not be empty");
}

std::vector<TokenEmbedding> synth_embeddings(const SynthSpec& spec, std::span<const Sentence> sentences,
                                             std::uint64_t seed, const Vocabulary& vocab) {
  spec.validate();
  const std::size_t d = spec.dim;
  std::map<std::string, std::vector<double>> anchors;
  for (const auto& t : vocab.terms()) {
    Rng rng(derive_seed(seed, "anchor:" + t.word));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto& a = anchors[t.word];
    a.resize(d);
    for (double& v : a) v = normal(rng);
  }

  std::map<std::string, std::vector<double>> centres;
  for (const auto& t : vocab.terms()) {
    std::vector<double> mu = anchors.at(t.word);
    if (!t.associated.empty()) {
      for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (const auto& w : t.associated) m += anchors.at(w)[j];
        m /= static_cast<double>(t.associated.size());
        mu[j] = (1.0 - spec.eta) * mu[j] + spec.eta * m;
      }
    }
    centres[t.word] = std::move(mu);
  }

  std::vector<TokenEmbedding> out;
  for (const auto& s : sentences) {
    const auto mentions = find_mentions(s.text, vocab);
    std::vector<const std::vector<double>*> context;
    for (const auto& m : mentions) {
      if (vocab.at(m.word).kind == TermKind::attribute) context.push_back(&anchors.at(m.word));
    }
    for (const auto& m : mentions) {
      const Term& t = vocab.at(m.word);
      std::vector<double> v = centres.at(t.word);
      if (t.kind == TermKind::oriented && !context.empty()) {
        const double w = spec.context_weight / static_cast<double>(context.size());
        for (const auto* c : context) {
          for (std::size_t j = 0; j < d; ++j) v[j] += w * (*c)[j];
        }
      }
      Rng rng(derive_seed(seed, "noise:" + t.word + "@" + s.id));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& x : v) x += spec.sigma * normal(rng);
      out.push_back(TokenEmbedding{t.word, s.id, spec.model_tag, std::move(v)});
    }
  }
  return out;
}

PairDraw make_pairs(std::span<const TokenEmbedding> tokens, const ObjectIndex& index, const CorpusMap& corpus_map,
                    std::span<const std::string> words, std::size_t n_per_word, std::uint64_t seed,
                    const std::set<OccurrenceKey>& exclude) {
  std::array<std::vector<std::size_t>, kLabelCount> by_label;
  for (std::size_t i = 0; i < index.size(); ++i) by_label[static_cast<std::size_t>(index.label(i))].push_back(i);

  PairDraw out;
  for (const auto& word : words) {
    std::vector<const TokenEmbedding*> candidates;
    for (const auto& t : tokens) {
      if (t.word == word && !exclude.count(OccurrenceKey{t.word, t.sentence_id})) candidates.push_back(&t);
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const TokenEmbedding* a, const TokenEmbedding* b) { return a->sentence_id < b->sentence_id; });
    require(candidates.size() >= n_per_word, ErrorKind::shortage,
            "'" + word + "' has " + std::to_string(candidates.size()) + " usable occurrences, needs " +
                std::to_string(n_per_word));
    Rng rng(derive_seed(seed, "pairs:" + word));
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (std::size_t i = 0; i < n_per_word; ++i) {
      const TokenEmbedding& tok = *candidates[i];
      const ObjectLabel cls = corpus_map.resolve(tok.word, tok.sentence_id);
      const auto& pool = by_label[static_cast<std::size_t>(cls)];
      require(!pool.empty(), ErrorKind::shortage,
              "index holds no '" + std::string(label_key(cls)) + "' embeddings to pair with '" + word + "'");
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const std::size_t pos = pool[pick(rng)];
      out.pairs.push_back(GroundingPair{tok.vector, index.embedding(pos), word, tok.sentence_id, cls});
      out.used.insert(OccurrenceKey{tok.word, tok.sentence_id});
    }
  }
  return out;
}

}  // namespace groundbridge
