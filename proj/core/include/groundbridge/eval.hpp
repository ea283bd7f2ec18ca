#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groundbridge/objindex.hpp"

namespace groundbridge {

// Cosine between the mean vectors of two clusters. Degenerate error when
// either mean is the zero vector.
double center_similarity(std::span<const std::vector<double>> a, std::span<const std::vector<double>> b);

// How the index is labelled for a two-way evaluation: by flat/round
// supercategory (property and behaviour words) or by object class, keeping
// only index entries of the two classes (object words).
struct LabelRule {
  enum class Kind { supercategory, object } kind = Kind::supercategory;
  int a = 0;  // Supercategory or ObjectLabel value
  int b = 1;

  static LabelRule supercategories();
  static LabelRule objects(ObjectLabel a, ObjectLabel b);
  std::string label_name(int label) const;
};

struct LabeledPoint {
  std::vector<double> vector;
  int gold = 0;  // in the value space of the rule
};

struct KnnReport {
  std::string pair;
  double macro_f1 = 0.0;
  std::array<double, 2> f1{};            // per label, in rule order (a, b)
  std::array<std::size_t, 2> support{};  // gold counts
  bool hinted = false;
};

// Each point is classified by majority vote of its k nearest index entries
// (labels per `rule`); macro F1 is the unweighted mean over the two labels,
// with F1 = 0 for a label that is never predicted nor present.
KnnReport knn_f1(const ObjectIndex& index, std::span<const LabeledPoint> points, const LabelRule& rule,
                 std::size_t k = 5);

struct PcaProjection {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> components;  // unit, orthogonal
  std::array<double, 2> explained_variance{};     // descending
  double total_variance = 0.0;
  std::vector<std::array<double, 2>> coordinates;
};

// Top-2 principal directions of the sample covariance by power iteration with
// deflation. Each component is signed so its largest-magnitude entry is
// positive. Needs >= 3 points; all-identical points are a degenerate error.
PcaProjection pca_2d(std::span<const std::vector<double>> points);

}  // namespace groundbridge
