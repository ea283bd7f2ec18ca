#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace groundbridge {

struct MsLossConfig {
  double alpha = 2.0;           // positive-pair weight
  double beta = 40.0;           // negative-pair weight
  double lambda_thr = 0.5;      // similarity offset
  double epsilon_margin = 0.1;  // mining margin

  void validate() const;
};

// Row-major m x m matrix of pairwise dot products plus the batch labels.
struct SimilarityMatrix {
  std::size_t size = 0;
  std::vector<double> values;
  std::vector<int> labels;

  double operator()(std::size_t i, std::size_t k) const { return values[i * size + k]; }
};

// Rejects embeddings whose norm deviates from 1 by more than 1e-3.
SimilarityMatrix similarity_matrix(std::span<const std::vector<double>> embeddings, std::span<const int> labels);

struct MinedPairs {
  std::vector<std::vector<std::size_t>> positives;  // per anchor, ascending
  std::vector<std::vector<std::size_t>> negatives;  // per anchor, ascending
  bool single_class = false;                        // batch had one label only

  std::size_t positive_count() const;
  std::size_t negative_count() const;
  friend bool operator==(const MinedPairs&, const MinedPairs&) = default;
};

// Hard-pair mining. For anchor i with same-label similarities P and
// different-label similarities N:
//   negative k kept iff S_ik > min(P) - epsilon
//   positive k kept iff S_ik < max(N) + epsilon
MinedPairs mine_pairs(const SimilarityMatrix& sim, const MsLossConfig& config);

struct MsLossResult {
  double loss = 0.0;
  std::vector<double> grad;  // dloss/dS, row-major m x m (row = anchor)
};

// loss = 1/m sum_i { 1/alpha log[1 + sum_{k in P_i} exp(-alpha (S_ik - lambda))]
//                  + 1/beta  log[1 + sum_{k in N_i} exp( beta (S_ik - lambda))] }
MsLossResult ms_loss(const SimilarityMatrix& sim, const MinedPairs& pairs, const MsLossConfig& config);

// Chain rule from dloss/dS to dloss/dembedding for S_ik = e_i . e_k.
std::vector<std::vector<double>> embedding_grads(std::span<const std::vector<double>> embeddings,
                                                 std::span<const double> sim_grad);

}  // namespace groundbridge
