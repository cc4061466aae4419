#pragma once

// Brute-force references used across the unit tests. Everything here works on
// fully expanded weight vectors, independent of the run-length machinery.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "embz/spectrum.hpp"

namespace ref {

inline std::vector<double> random_simplex(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  for (double& x : w) x = e(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

inline std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

inline std::vector<double> kron(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  for (double x : a) {
    for (double y : b) out.push_back(x * y);
  }
  return sorted_desc(out);
}

inline double l1(std::vector<double> a, std::vector<double> b) {
  a = sorted_desc(a);
  b = sorted_desc(b);
  const std::size_t n = std::max(a.size(), b.size());
  a.resize(n, 0.0);
  b.resize(n, 0.0);
  long double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(static_cast<long double>(a[i]) - b[i]);
  return static_cast<double>(s);
}

inline double fidelity(std::vector<double> a, std::vector<double> b) {
  a = sorted_desc(a);
  b = sorted_desc(b);
  long double s = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) s += std::sqrt(static_cast<long double>(a[i]) * b[i]);
  return static_cast<double>(s);
}

inline double max_abs_diff(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  a.resize(n, 0.0);
  b.resize(n, 0.0);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double mass(const embz::Spectrum& s) {
  long double t = s.tail_mass();
  for (const auto& l : s.levels()) t += static_cast<long double>(l.weight) * static_cast<long double>(l.count);
  return static_cast<double>(t);
}

}  // namespace ref
