#include "groundbridge/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "groundbridge/csv.hpp"
#include "groundbridge/error.hpp"

namespace groundbridge {

std::optional<double> F1Row::delta() const {
  if (!hinted) return std::nullopt;
  return *hinted - unhinted;
}

std::vector<F1Row> f1_rows(const CurriculumRun& run) {
  std::vector<F1Row> rows;
  if (run.stages.empty()) return rows;
  for (std::size_t p = 0; p < run.eval_pairs.size(); ++p) {
    F1Row r{run.eval_pairs[p].name, run.model_tag, run.unhinted_eval(p).knn.macro_f1, std::nullopt};
    if (auto h = run.hinted_eval(p)) r.hinted = h->knn.macro_f1;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string separation_file_name(const std::string& pair) {
  std::string s = pair;
  std::replace(s.begin(), s.end(), '/', '_');
  return "separation_" + s + ".csv";
}

namespace {

std::string cosine_column(const std::string& pair) {
  std::string s = pair;
  const auto slash = s.find('/');
  if (slash != std::string::npos) s.replace(slash, 1, "_vs_");
  return s + "_cosine";
}

void check(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

}  // namespace

void write_separation_csv(const std::filesystem::path& path, const CurriculumRun& run, std::size_t pair) {
  const auto& spec = run.eval_pairs.at(pair);
  auto out = csv::open_out(path);
  out << "stage," << cosine_column(spec.name) << ",hinted\n";
  for (std::size_t i = 0; i < run.stages.size(); ++i) {
    const bool hinted = spec.hint_stage && i >= *spec.hint_stage;
    out << run.stages[i].label << ',' << csv::format_double(run.stages[i].evals.at(pair).center_cosine) << ','
        << (hinted ? 1 : 0) << '\n';
  }
  check(out, path);
}

void write_f1_csv(const std::filesystem::path& path, const std::vector<F1Row>& rows) {
  auto out = csv::open_out(path);
  out << "pair,model_tag,f1,hinted,delta\n";
  for (const auto& r : rows) {
    const auto d = r.delta();
    out << r.pair << ',' << r.model_tag << ',' << csv::format_double(r.f1()) << ',' << (r.hinted ? 1 : 0) << ','
        << (d ? csv::format_double(*d) : "") << '\n';
  }
  check(out, path);
}

std::string f1_markdown(const std::vector<F1Row>& rows) {
  const std::string model = rows.empty() ? "model" : rows.front().model_tag;
  std::ostringstream md;
  md << "| pair | " << model << " |\n|---|---|\n";
  for (const auto& r : rows) {
    md << "| " << r.pair << " | " << csv::format_fixed(r.f1(), 2);
    if (const auto d = r.delta()) md << " (" << (*d >= 0 ? "+" : "") << csv::format_fixed(*d, 2) << ")";
    md << " |\n";
  }
  return md.str();
}

void write_pca_csv(const std::filesystem::path& path, const std::vector<PcaRow>& rows) {
  auto out = csv::open_out(path);
  out << "point_id,word_or_class,pc1,pc2,nearest_supercategory\n";
  for (const auto& r : rows) {
    out << r.point_id << ',' << r.word_or_class << ',' << csv::format_double(r.pc1) << ','
        << csv::format_double(r.pc2) << ',' << r.nearest_supercategory << '\n';
  }
  check(out, path);
}

std::string nearest_supercategory(const ObjectIndex& index, const std::vector<double>& v) {
  if (index.empty()) return "";
  const auto nn = knn_query(index, v, 1);
  return std::string(supercategory_name(supercategory_of(nn.front().label)));
}

std::vector<PcaRow> object_pca_rows(const ObjectIndex& index) {
  std::vector<PcaRow> rows;
  if (index.size() < 3) return rows;
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < index.size(); ++i) pts.push_back(index.embedding(i));
  const auto pca = pca_2d(pts);
  for (std::size_t i = 0; i < index.size(); ++i) {
    rows.push_back(PcaRow{std::to_string(i), std::string(label_display_name(index.label(i))),
                          pca.coordinates[i][0], pca.coordinates[i][1],
                          std::string(supercategory_name(index.supercategory(i)))});
  }
  return rows;
}

std::vector<PcaRow> token_pca_rows(const CurriculumRun& run, const ObjectIndex& index) {
  std::vector<PcaRow> rows;
  if (run.final_points.size() < 3) return rows;
  std::vector<std::vector<double>> pts;
  for (const auto& t : run.final_points) pts.push_back(t.vector);
  const auto pca = pca_2d(pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& t = run.final_points[i];
    rows.push_back(PcaRow{t.sentence_id + ":" + t.word, t.word, pca.coordinates[i][0], pca.coordinates[i][1],
                          nearest_supercategory(index, t.vector)});
  }
  return rows;
}

void emit_report(const CurriculumRun& run, const ObjectIndex& index, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create '" + dir.string() + "': " + ec.message());
  for (std::size_t p = 0; p < run.eval_pairs.size(); ++p) {
    write_separation_csv(dir / separation_file_name(run.eval_pairs[p].name), run, p);
  }
  const auto rows = f1_rows(run);
  write_f1_csv(dir / "f1_table.csv", rows);
  {
    auto out = csv::open_out(dir / "f1_table.md");
    out << f1_markdown(rows);
    check(out, dir / "f1_table.md");
  }
  write_pca_csv(dir / "pca_transformed.csv", token_pca_rows(run, index));
}

}  // namespace groundbridge
