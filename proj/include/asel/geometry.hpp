#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

namespace asel {

template <int N>
using Vec = std::array<double, N>;

namespace detail {

inline void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace detail

template <int N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <int N>
constexpr double norm2(const Vec<N>& a) {
  return dot<N>(a, a);
}

template <int N>
inline double norm(const Vec<N>& a) {
  return std::sqrt(norm2<N>(a));
}

template <int N>
constexpr Vec<N> sub(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (int i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <int N>
constexpr Vec<N> scaled(const Vec<N>& a, double s) {
  Vec<N> r{};
  for (int i = 0; i < N; ++i) r[i] = a[i] * s;
  return r;
}

/// Last-axis unit vector (the distinguished symmetry axis).
template <int N>
constexpr Vec<N> axis_unit() {
  Vec<N> e{};
  e[N - 1] = 1.0;
  return e;
}

/// Surface area of the unit sphere S^{N-1} in R^N.
inline double sphere_area(int dim) {
  detail::require(dim >= 2, "sphere_area: dimension must be >= 2");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

}  // namespace asel
