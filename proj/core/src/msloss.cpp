#include "groundbridge/msloss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "groundbridge/error.hpp"

namespace groundbridge {

namespace {

// log(1 + sum_k exp(z_k)) and the softmax weights exp(z_k) / (1 + sum exp(z)).
double log1p_sum_exp(std::span<const double> z, std::vector<double>& weights) {
  weights.assign(z.size(), 0.0);
  if (z.empty()) return 0.0;
  double mx = 0.0;  // the implicit "1" is exp(0)
  for (double v : z) mx = std::max(mx, v);
  double denom = std::exp(-mx);
  for (std::size_t k = 0; k < z.size(); ++k) {
    weights[k] = std::exp(z[k] - mx);
    denom += weights[k];
  }
  for (auto& w : weights) w /= denom;
  return mx + std::log(denom);
}

}  // namespace

void MsLossConfig::validate() const {
  require(alpha > 0, ErrorKind::config, "alpha must be > 0");
  require(beta > 0, ErrorKind::config, "beta must be > 0");
  require(lambda_thr >= 0 && lambda_thr <= 1, ErrorKind::config, "lambda must lie in [0, 1]");
  require(epsilon_margin >= 0, ErrorKind::config, "epsilon margin must be >= 0");
}

SimilarityMatrix similarity_matrix(std::span<const std::vector<double>> embeddings, std::span<const int> labels) {
  require(!embeddings.empty(), ErrorKind::contract, "similarity matrix of an empty batch");
  require(embeddings.size() == labels.size(), ErrorKind::shape, "embeddings and labels differ in length");
  const std::size_t m = embeddings.size();
  const std::size_t d = embeddings[0].size();
  for (const auto& e : embeddings) {
    require(e.size() == d, ErrorKind::shape, "embeddings differ in dimension");
    double sq = 0.0;
    for (double v : e) sq += v * v;
    require(std::abs(std::sqrt(sq) - 1.0) <= 1e-3, ErrorKind::contract, "embedding is not unit norm");
  }
  SimilarityMatrix s;
  s.size = m;
  s.values.assign(m * m, 0.0);
  s.labels.assign(labels.begin(), labels.end());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i; k < m; ++k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += embeddings[i][j] * embeddings[k][j];
      s.values[i * m + k] = dot;
      s.values[k * m + i] = dot;
    }
  }
  return s;
}

std::size_t MinedPairs::positive_count() const {
  std::size_t n = 0;
  for (const auto& p : positives) n += p.size();
  return n;
}

std::size_t MinedPairs::negative_count() const {
  std::size_t n = 0;
  for (const auto& p : negatives) n += p.size();
  return n;
}

MinedPairs mine_pairs(const SimilarityMatrix& sim, const MsLossConfig& config) {
  const std::size_t m = sim.size;
  MinedPairs out;
  out.positives.resize(m);
  out.negatives.resize(m);
  out.single_class = std::all_of(sim.labels.begin(), sim.labels.end(),
                                 [&](int y) { return y == sim.labels.front(); });
  const double eps = config.epsilon_margin;
  for (std::size_t i = 0; i < m; ++i) {
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      if (sim.labels[k] == sim.labels[i]) {
        min_pos = std::min(min_pos, sim(i, k));
      } else {
        max_neg = std::max(max_neg, sim(i, k));
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      const double s = sim(i, k);
      if (sim.labels[k] == sim.labels[i]) {
        if (s < max_neg + eps) out.positives[i].push_back(k);
      } else {
        if (s > min_pos - eps) out.negatives[i].push_back(k);
      }
    }
  }
  return out;
}

MsLossResult ms_loss(const SimilarityMatrix& sim, const MinedPairs& pairs, const MsLossConfig& config) {
  const std::size_t m = sim.size;
  require(pairs.positives.size() == m && pairs.negatives.size() == m, ErrorKind::shape,
          "mined pairs do not match the similarity matrix");
  MsLossResult r;
  r.grad.assign(m * m, 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<double> z, w;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& pos = pairs.positives[i];
    if (!pos.empty()) {
      z.clear();
      for (auto k : pos) z.push_back(-config.alpha * (sim(i, k) - config.lambda_thr));
      r.loss += inv_m * log1p_sum_exp(z, w) / config.alpha;
      // d/dS_ik [1/alpha log(1 + sum exp(-alpha(S - l)))] = -softmax weight
      for (std::size_t j = 0; j < pos.size(); ++j) r.grad[i * m + pos[j]] -= inv_m * w[j];
    }
    const auto& neg = pairs.negatives[i];
    if (!neg.empty()) {
      z.clear();
      for (auto k : neg) z.push_back(config.beta * (sim(i, k) - config.lambda_thr));
      r.loss += inv_m * log1p_sum_exp(z, w) / config.beta;
      for (std::size_t j = 0; j < neg.size(); ++j) r.grad[i * m + neg[j]] += inv_m * w[j];
    }
  }
  return r;
}

std::vector<std::vector<double>> embedding_grads(std::span<const std::vector<double>> embeddings,
                                                 std::span<const double> sim_grad) {
  const std::size_t m = embeddings.size();
  require(sim_grad.size() == m * m, ErrorKind::shape, "similarity gradient has the wrong size");
  const std::size_t d = m ? embeddings[0].size() : 0;
  std::vector<std::vector<double>> out(m, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const double g = sim_grad[i * m + k];
      if (g == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        out[i][j] += g * embeddings[k][j];
        out[k][j] += g * embeddings[i][j];
      }
    }
  }
  return out;
}

}  // namespace groundbridge
