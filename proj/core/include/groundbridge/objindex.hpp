#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "groundbridge/datasim.hpp"
#include "groundbridge/encoder.hpp"

namespace groundbridge {

// Labelled store of unit-norm object embeddings with exact cosine search.
class ObjectIndex {
 public:
  ObjectIndex() = default;

  // Throws a contract error when `embedding` is not unit norm within 1e-6.
  void add(std::vector<double> embedding, ObjectLabel label);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::vector<double>& embedding(std::size_t i) const { return embeddings_[i]; }
  ObjectLabel label(std::size_t i) const { return labels_[i]; }
  Supercategory supercategory(std::size_t i) const { return supercategories_[i]; }
  const std::vector<ObjectLabel>& labels() const { return labels_; }

  // Entries whose label is in `keep`, in insertion order.
  ObjectIndex restricted_to(std::span<const ObjectLabel> keep) const;

 private:
  std::vector<std::vector<double>> embeddings_;
  std::vector<ObjectLabel> labels_;
  std::vector<Supercategory> supercategories_;
};

ObjectIndex build_index(const EncoderParams& params, std::span<const StackSample> samples,
                        bool include_type_id = false);

struct Neighbor {
  std::size_t position = 0;  // insertion position in the index
  ObjectLabel label = ObjectLabel::cube;
  double similarity = 0.0;
};

// Top-k entries by cosine similarity, descending; ties keep insertion order.
// The query is normalised here; a zero query is a degenerate error.
std::vector<Neighbor> knn_query(const ObjectIndex& index, std::span<const double> query, std::size_t k);

// Majority label among neighbours; ties go to the highest mean similarity, then
// the smallest label value.
int majority_vote(std::span<const int> labels, std::span<const double> similarities);

struct ConfusionMatrix {
  std::array<std::array<std::size_t, kLabelCount>, kLabelCount> counts{};  // [true][predicted]
  std::array<std::array<double, kLabelCount>, kLabelCount> normalized{};   // row-normalised
  double accuracy = 0.0;

  std::size_t total() const;
  // Share of predictions that land in the other flat/round supercategory.
  double cross_supercategory_rate() const;
};

ConfusionMatrix evaluate_confusion(const ObjectIndex& index, std::span<const StackSample> test,
                                   const EncoderParams& params, std::size_t k = 10, std::size_t per_class = 100,
                                   bool include_type_id = false);

// `path` gets values rounded to 2 decimals; `full_path` (when non-empty) gets
// full precision. Both use the fixed 11-label display order.
void write_confusion_csv(const std::filesystem::path& path, const std::filesystem::path& full_path,
                         const ConfusionMatrix& cm);

}  // namespace groundbridge
