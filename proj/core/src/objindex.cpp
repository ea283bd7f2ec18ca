#include "groundbridge/objindex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"

namespace groundbridge {

void ObjectIndex::add(std::vector<double> embedding, ObjectLabel label) {
  require(embedding.size() == kEmbeddingDim, ErrorKind::shape, "index embeddings must have 64 entries");
  double sq = 0.0;
  for (double v : embedding) sq += v * v;
  require(std::abs(std::sqrt(sq) - 1.0) <= 1e-6, ErrorKind::contract, "index embedding is not unit norm");
  embeddings_.push_back(std::move(embedding));
  labels_.push_back(label);
  supercategories_.push_back(supercategory_of(label));
}

ObjectIndex ObjectIndex::restricted_to(std::span<const ObjectLabel> keep) const {
  ObjectIndex out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::find(keep.begin(), keep.end(), labels_[i]) != keep.end()) {
      out.embeddings_.push_back(embeddings_[i]);
      out.labels_.push_back(labels_[i]);
      out.supercategories_.push_back(supercategories_[i]);
    }
  }
  return out;
}

ObjectIndex build_index(const EncoderParams& params, std::span<const StackSample> samples, bool include_type_id) {
  ObjectIndex index;
  for (const auto& s : samples) {
    index.add(forward(params, encoder_input(s, include_type_id)).values, s.label());
  }
  return index;
}

std::vector<Neighbor> knn_query(const ObjectIndex& index, std::span<const double> query, std::size_t k) {
  require(k >= 1 && k <= index.size(), ErrorKind::argument,
          "k = " + std::to_string(k) + " outside [1, " + std::to_string(index.size()) + "]");
  require(query.size() == kEmbeddingDim, ErrorKind::shape, "query must have 64 entries");
  double sq = 0.0;
  for (double v : query) {
    require(std::isfinite(v), ErrorKind::numeric, "non-finite query");
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  require(norm > 0.0, ErrorKind::degenerate, "zero query vector");

  std::vector<Neighbor> all(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& e = index.embedding(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < kEmbeddingDim; ++j) dot += e[j] * query[j];
    all[i] = Neighbor{i, index.label(i), dot / norm};
  }
  auto before = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.position < b.position;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), before);
  all.resize(k);
  return all;
}

int majority_vote(std::span<const int> labels, std::span<const double> similarities) {
  require(!labels.empty() && labels.size() == similarities.size(), ErrorKind::argument,
          "majority vote needs matching, nonempty inputs");
  std::map<int, std::pair<std::size_t, double>> tally;  // label -> (votes, similarity sum)
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& t = tally[labels[i]];
    ++t.first;
    t.second += similarities[i];
  }
  int best = tally.begin()->first;
  std::size_t best_votes = 0;
  double best_mean = -2.0;
  for (const auto& [label, t] : tally) {
    const double mean = t.second / static_cast<double>(t.first);
    if (t.first > best_votes || (t.first == best_votes && mean > best_mean)) {
      best = label;
      best_votes = t.first;
      best_mean = mean;
    }
  }
  return best;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return n;
}

double ConfusionMatrix::cross_supercategory_rate() const {
  const std::size_t n = total();
  if (n == 0) return 0.0;
  std::size_t cross = 0;
  for (std::size_t t = 0; t < kLabelCount; ++t) {
    for (std::size_t p = 0; p < kLabelCount; ++p) {
      if (supercategory_of(static_cast<ObjectLabel>(t)) != supercategory_of(static_cast<ObjectLabel>(p))) {
        cross += counts[t][p];
      }
    }
  }
  return static_cast<double>(cross) / static_cast<double>(n);
}

ConfusionMatrix evaluate_confusion(const ObjectIndex& index, std::span<const StackSample> test,
                                   const EncoderParams& params, std::size_t k, std::size_t per_class,
                                   bool include_type_id) {
  std::array<std::vector<const StackSample*>, kLabelCount> by_label;
  for (const auto& s : test) {
    auto& bucket = by_label[static_cast<std::size_t>(s.label())];
    if (bucket.size() < per_class) bucket.push_back(&s);
  }
  for (ObjectLabel l : all_labels()) {
    const auto have = by_label[static_cast<std::size_t>(l)].size();
    require(have == per_class, ErrorKind::shortage,
            "test set has " + std::to_string(have) + " samples of '" + std::string(label_key(l)) + "', needs " +
                std::to_string(per_class));
  }

  ConfusionMatrix cm;
  std::vector<int> votes;
  std::vector<double> sims;
  for (ObjectLabel truth : all_labels()) {
    for (const StackSample* s : by_label[static_cast<std::size_t>(truth)]) {
      const Embedding e = forward(params, encoder_input(*s, include_type_id));
      const auto nn = knn_query(index, e.values, k);
      votes.clear();
      sims.clear();
      for (const auto& n : nn) {
        votes.push_back(static_cast<int>(n.label));
        sims.push_back(n.similarity);
      }
      const int predicted = majority_vote(votes, sims);
      ++cm.counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
    }
  }
  std::size_t correct = 0;
  for (std::size_t t = 0; t < kLabelCount; ++t) {
    const std::size_t row = std::accumulate(cm.counts[t].begin(), cm.counts[t].end(), std::size_t{0});
    correct += cm.counts[t][t];
    for (std::size_t p = 0; p < kLabelCount; ++p) {
      cm.normalized[t][p] = row ? static_cast<double>(cm.counts[t][p]) / static_cast<double>(row) : 0.0;
    }
  }
  const std::size_t n = cm.total();
  cm.accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
  return cm;
}

void write_confusion_csv(const std::filesystem::path& path, const std::filesystem::path& full_path,
                         const ConfusionMatrix& cm) {
  auto write = [&](const std::filesystem::path& p, bool rounded) {
    auto out = csv::open_out(p);
    out << "true\\predicted";
    for (ObjectLabel l : all_labels()) out << ',' << label_display_name(l);
    out << '\n';
    for (ObjectLabel t : all_labels()) {
      out << label_display_name(t);
      for (ObjectLabel pr : all_labels()) {
        const double v = cm.normalized[static_cast<std::size_t>(t)][static_cast<std::size_t>(pr)];
        out << ',' << (rounded ? csv::format_fixed(v, 2) : csv::format_double(v));
      }
      out << '\n';
    }
    if (!out) fail(ErrorKind::io, "failed writing '" + p.string() + "'");
  };
  write(path, true);
  if (!full_path.empty()) write(full_path, false);
}

}  // namespace groundbridge
