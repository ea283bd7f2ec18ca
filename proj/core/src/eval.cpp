#include "groundbridge/eval.hpp"

#include <algorithm>
#include <cmath>

#include "groundbridge/error.hpp"

namespace groundbridge {

namespace {

std::vector<double> mean_of(std::span<const std::vector<double>> xs, const char* which) {
  require(!xs.empty(), ErrorKind::argument, std::string(which) + " cluster is empty");
  std::vector<double> m(xs[0].size(), 0.0);
  for (const auto& x : xs) {
    require(x.size() == m.size(), ErrorKind::shape, "cluster vectors differ in length");
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += x[j];
  }
  for (double& v : m) v /= static_cast<double>(xs.size());
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double center_similarity(std::span<const std::vector<double>> a, std::span<const std::vector<double>> b) {
  const auto ma = mean_of(a, "first");
  const auto mb = mean_of(b, "second");
  require(ma.size() == mb.size(), ErrorKind::shape, "clusters live in different dimensions");
  const double na = std::sqrt(dot(ma, ma));
  const double nb = std::sqrt(dot(mb, mb));
  require(na > 0.0 && nb > 0.0, ErrorKind::degenerate, "cluster mean is the zero vector");
  return std::clamp(dot(ma, mb) / (na * nb), -1.0, 1.0);
}

LabelRule LabelRule::supercategories() {
  return LabelRule{Kind::supercategory, static_cast<int>(Supercategory::flat_sided),
                   static_cast<int>(Supercategory::round)};
}

LabelRule LabelRule::objects(ObjectLabel a, ObjectLabel b) {
  require(a != b, ErrorKind::argument, "object rule needs two different classes");
  return LabelRule{Kind::object, static_cast<int>(a), static_cast<int>(b)};
}

std::string LabelRule::label_name(int label) const {
  if (kind == Kind::supercategory) return std::string(supercategory_name(static_cast<Supercategory>(label)));
  return std::string(label_display_name(static_cast<ObjectLabel>(label)));
}

KnnReport knn_f1(const ObjectIndex& index, std::span<const LabeledPoint> points, const LabelRule& rule,
                 std::size_t k) {
  require(!points.empty(), ErrorKind::argument, "no points to classify");
  ObjectIndex restricted;
  const ObjectIndex* idx = &index;
  if (rule.kind == LabelRule::Kind::object) {
    const std::array<ObjectLabel, 2> keep{static_cast<ObjectLabel>(rule.a), static_cast<ObjectLabel>(rule.b)};
    restricted = index.restricted_to(keep);
    idx = &restricted;
  }
  require(idx->size() >= k, ErrorKind::argument,
          "index holds " + std::to_string(idx->size()) + " usable entries, k = " + std::to_string(k));

  auto label_of_entry = [&](const Neighbor& n) {
    return rule.kind == LabelRule::Kind::supercategory ? static_cast<int>(supercategory_of(n.label))
                                                       : static_cast<int>(n.label);
  };

  std::array<std::size_t, 2> tp{}, fp{}, fn{};
  KnnReport report;
  std::vector<int> votes;
  std::vector<double> sims;
  for (const auto& p : points) {
    require(p.gold == rule.a || p.gold == rule.b, ErrorKind::argument, "gold label outside the evaluated pair");
    const auto nn = knn_query(*idx, p.vector, k);
    votes.clear();
    sims.clear();
    for (const auto& n : nn) {
      votes.push_back(label_of_entry(n));
      sims.push_back(n.similarity);
    }
    const int pred = majority_vote(votes, sims);
    const std::size_t g = p.gold == rule.a ? 0 : 1;
    ++report.support[g];
    if (pred == p.gold) {
      ++tp[g];
    } else {
      ++fn[g];
      if (pred == rule.a || pred == rule.b) ++fp[pred == rule.a ? 0 : 1];
    }
  }
  for (std::size_t l = 0; l < 2; ++l) {
    const std::size_t denom = 2 * tp[l] + fp[l] + fn[l];
    report.f1[l] = denom ? 2.0 * static_cast<double>(tp[l]) / static_cast<double>(denom) : 0.0;
  }
  report.macro_f1 = 0.5 * (report.f1[0] + report.f1[1]);
  return report;
}

namespace {

using Mat = std::vector<std::vector<double>>;

std::vector<double> matvec(const Mat& m, const std::vector<double>& v) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(m[i], v);
  return out;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

void orthogonalize(std::vector<double>& v, const std::vector<double>& against) {
  const double p = dot(v, against);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * against[i];
}

void fix_sign(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Dominant eigenvector of a symmetric PSD matrix; `against` (if non-empty) is
// projected out every step.
std::vector<double> power_iterate(const Mat& m, const std::vector<double>& against) {
  const std::size_t d = m.size();
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i);  // deterministic start
  if (!against.empty()) orthogonalize(v, against);
  normalize(v);
  for (int it = 0; it < 100000; ++it) {
    auto w = matvec(m, v);
    if (!against.empty()) orthogonalize(w, against);
    const double n = std::sqrt(dot(w, w));
    if (n == 0.0) break;
    for (double& x : w) x /= n;
    double change = 0.0;
    for (std::size_t i = 0; i < d; ++i) change = std::max(change, std::abs(w[i] - v[i]));
    v = std::move(w);
    if (change < 1e-14) break;
  }
  return v;
}

}  // namespace

PcaProjection pca_2d(std::span<const std::vector<double>> points) {
  require(points.size() >= 3, ErrorKind::argument, "PCA needs at least 3 points");
  const std::size_t d = points[0].size();
  require(d >= 2, ErrorKind::shape, "PCA needs at least 2 dimensions");
  PcaProjection out;
  out.mean = mean_of(points, "point");

  Mat cov(d, std::vector<double>(d, 0.0));
  std::vector<double> c(d);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < d; ++i) c[i] = p[i] - out.mean[i];
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) cov[i][j] += c[i] * c[j];
    }
  }
  const double scale = 1.0 / static_cast<double>(points.size() - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i][j] *= scale;
      cov[j][i] = cov[i][j];
    }
    out.total_variance += cov[i][i];
  }
  require(out.total_variance > 0.0, ErrorKind::degenerate, "all points are identical");

  auto v1 = power_iterate(cov, {});
  const double l1 = dot(v1, matvec(cov, v1));
  // deflate
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) cov[i][j] -= l1 * v1[i] * v1[j];
  }
  std::vector<double> v2;
  double residual = 0.0;
  for (std::size_t i = 0; i < d; ++i) residual += std::abs(cov[i][i]);
  if (residual <= 1e-14 * out.total_variance) {
    // rank one: any direction orthogonal to v1 will do; take the axis v1 leans on least
    std::size_t axis = 0;
    for (std::size_t i = 1; i < d; ++i) {
      if (std::abs(v1[i]) < std::abs(v1[axis])) axis = i;
    }
    v2.assign(d, 0.0);
    v2[axis] = 1.0;
  } else {
    v2 = power_iterate(cov, v1);
  }
  orthogonalize(v2, v1);
  normalize(v2);
  const double l2 = std::max(0.0, dot(v2, matvec(cov, v2)));

  fix_sign(v1);
  fix_sign(v2);
  out.components = {v1, v2};
  out.explained_variance = {l1, l2};
  out.coordinates.reserve(points.size());
  for (const auto& p : points) {
    for (std::size_t i = 0; i < d; ++i) c[i] = p[i] - out.mean[i];
    out.coordinates.push_back({dot(c, v1), dot(c, v2)});
  }
  return out;
}

}  // namespace groundbridge
