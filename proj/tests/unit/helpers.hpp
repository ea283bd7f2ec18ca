#pragma once

#include <cmath>
#include <random>
#include <vector>

namespace gbtest {

inline std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> unit(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (auto& x : v) x /= s;
  return v;
}

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t n) { return unit(gaussian(rng, n)); }

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace gbtest
