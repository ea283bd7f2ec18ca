#include "groundbridge/bridge.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "groundbridge/error.hpp"

namespace groundbridge {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Smallest pivot ratio of an LLT factor; a tiny value means the system is
// numerically singular even though the factorisation ran.
double pivot_ratio(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto diag = llt.matrixLLT().diagonal();
  const double hi = diag.maxCoeff();
  return hi > 0.0 ? diag.minCoeff() / hi : 0.0;
}

}  // namespace

AffineMap fit_ridge(std::span<const GroundingPair> pairs, double lambda) {
  require(!pairs.empty(), ErrorKind::argument, "fit_ridge needs at least one pair");
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::config, "ridge lambda must be finite and >= 0");
  const std::size_t n = pairs.size();
  const std::size_t d = pairs[0].source.size();
  require(d >= 1, ErrorKind::shape, "empty source vectors");

  Matrix X(n, d);
  Matrix Y(n, kEmbeddingDim);
  for (std::size_t i = 0; i < n; ++i) {
    require(pairs[i].source.size() == d, ErrorKind::shape,
            "pair " + std::to_string(i) + " has source dimension " + std::to_string(pairs[i].source.size()) +
                ", expected " + std::to_string(d));
    require(pairs[i].target.size() == kEmbeddingDim, ErrorKind::shape, "targets must have 64 entries");
    for (std::size_t j = 0; j < d; ++j) {
      require(std::isfinite(pairs[i].source[j]), ErrorKind::numeric, "non-finite source vector");
      X(i, j) = pairs[i].source[j];
    }
    for (std::size_t j = 0; j < kEmbeddingDim; ++j) Y(i, j) = pairs[i].target[j];
  }

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  const Matrix Xc = X.rowwise() - x_mean;
  const Matrix Yc = Y.rowwise() - y_mean;

  Eigen::MatrixXd W;
  const bool dual = lambda > 0.0 && n < d;
  if (dual) {
    Eigen::MatrixXd K = Xc * Xc.transpose();
    K.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    require(llt.info() == Eigen::Success, ErrorKind::solver, "ridge system is not positive definite");
    W = Xc.transpose() * llt.solve(Eigen::MatrixXd(Yc));
  } else {
    Eigen::MatrixXd G = Xc.transpose() * Xc;
    G.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    require(llt.info() == Eigen::Success && pivot_ratio(llt) > 1e-7, ErrorKind::solver,
            "normal equations are singular; use lambda > 0");
    W = llt.solve(Eigen::MatrixXd(Xc.transpose() * Yc));
  }
  const Eigen::RowVectorXd b = y_mean - x_mean * W;
  require(W.allFinite() && b.allFinite(), ErrorKind::solver, "ridge solution is not finite");

  AffineMap map;
  map.dim = d;
  map.lambda = lambda;
  map.weights.resize(d * kEmbeddingDim);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < kEmbeddingDim; ++c) map.weights[r * kEmbeddingDim + c] = W(r, c);
  }
  map.offset.assign(b.data(), b.data() + kEmbeddingDim);
  for (const auto& p : pairs) {
    if (std::find(map.fitted_on.begin(), map.fitted_on.end(), p.term) == map.fitted_on.end()) {
      map.fitted_on.push_back(p.term);
    }
  }
  const Matrix residual = (X * W).rowwise() + b - Y;
  map.residual_mse = residual.squaredNorm() / static_cast<double>(n);
  return map;
}

std::vector<double> apply_map(const AffineMap& map, std::span<const double> x) {
  require(x.size() == map.dim, ErrorKind::shape,
          "map expects " + std::to_string(map.dim) + "-dimensional input, got " + std::to_string(x.size()));
  std::vector<double> out(map.offset);
  for (std::size_t r = 0; r < map.dim; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* row = map.weights.data() + r * kEmbeddingDim;
    for (std::size_t c = 0; c < kEmbeddingDim; ++c) out[c] += xr * row[c];
  }
  return out;
}

}  // namespace groundbridge
