#pragma once

#include <span>
#include <string>
#include <vector>

#include "groundbridge/lexicon.hpp"

namespace groundbridge {

// x (d) -> W^T x + b (64). Weights are stored row-major as d x 64.
struct AffineMap {
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<double> offset;
  double lambda = 1.0;
  std::vector<std::string> fitted_on;  // concepts in the fit, in introduction order
  double residual_mse = 0.0;           // mean squared distance over the fitted pairs

  double weight(std::size_t row, std::size_t col) const { return weights[row * kEmbeddingDim + col]; }
  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

// Ridge regression on augmented inputs [x; 1], penalising the weights but not
// the offset:  min sum_i |W^T x_i + b - y_i|^2 + lambda |W|_F^2.
// Solved through the centred normal equations with a Cholesky factorisation;
// when pairs are fewer than dimensions the equivalent n x n dual system is
// factorised instead. lambda = 0 is allowed only for full-rank inputs.
AffineMap fit_ridge(std::span<const GroundingPair> pairs, double lambda);

std::vector<double> apply_map(const AffineMap& map, std::span<const double> x);

}  // namespace groundbridge
