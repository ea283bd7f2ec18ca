#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groundbridge/curriculum.hpp"
#include "groundbridge/eval.hpp"

namespace groundbridge {

struct F1Row {
  std::string pair;
  std::string model_tag;
  double unhinted = 0.0;
  std::optional<double> hinted;

  double f1() const { return hinted ? *hinted : unhinted; }
  std::optional<double> delta() const;
};

// One row per evaluated pair in curriculum order.
std::vector<F1Row> f1_rows(const CurriculumRun& run);

// "separation_flat_round.csv" for "flat/round".
std::string separation_file_name(const std::string& pair);

void write_separation_csv(const std::filesystem::path& path, const CurriculumRun& run, std::size_t pair);
void write_f1_csv(const std::filesystem::path& path, const std::vector<F1Row>& rows);
// Pairs as rows, one model column, hinted gains in parentheses: "0.93 (+0.15)".
std::string f1_markdown(const std::vector<F1Row>& rows);

struct PcaRow {
  std::string point_id;
  std::string word_or_class;
  double pc1 = 0.0;
  double pc2 = 0.0;
  std::string nearest_supercategory;
};
void write_pca_csv(const std::filesystem::path& path, const std::vector<PcaRow>& rows);

// Supercategory of the nearest index entry by cosine; empty for an empty index.
std::string nearest_supercategory(const ObjectIndex& index, const std::vector<double>& v);

// PCA of the index embeddings, tagged with class names.
std::vector<PcaRow> object_pca_rows(const ObjectIndex& index);
// PCA of the held-out tokens under the final map.
std::vector<PcaRow> token_pca_rows(const CurriculumRun& run, const ObjectIndex& index);

// Writes one separation CSV per pair, f1_table.csv, f1_table.md and
// pca_transformed.csv into `dir` (created if missing). A run without stages
// yields header-only files.
void emit_report(const CurriculumRun& run, const ObjectIndex& index, const std::filesystem::path& dir);

}  // namespace groundbridge
