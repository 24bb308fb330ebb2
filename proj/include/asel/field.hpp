#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "asel/grid.hpp"

namespace asel {

/// One real value per non-exterior grid node (compact node order).
template <int N>
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid<N>& grid) : grid_(&grid), v_(grid.size(), 0.0) {}

  const Grid<N>& grid() const { return *grid_; }
  std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }

  double& operator[](std::int64_t c) { return v_[c]; }
  double operator[](std::int64_t c) const { return v_[c]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  /// Fill from a pointwise function of the node coordinates.
  template <class F>
  void assign(F&& f) {
    for (std::int64_t c = 0; c < size(); ++c) v_[c] = f(grid_->coords_compact(c));
  }

  double l2_norm() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return std::sqrt(s);
  }

  double l1_norm_scaled() const {  // L^1(B) quadrature: h^N sum |u|
    double s = 0.0;
    for (double x : v_) s += std::abs(x);
    return s * grid_->cell_volume();
  }

  double max_abs() const {
    double s = 0.0;
    for (double x : v_) s = std::max(s, std::abs(x));
    return s;
  }

  /// h^N-weighted sum of u (the discrete integral over the ball).
  double integral() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s * grid_->cell_volume();
  }

  /// Multilinear interpolation at a point inside the ball; exterior corner
  /// values are taken as 0 (the Dirichlet extension).
  double interpolate(const Vec<N>& p) const {
    const Grid<N>& g = *grid_;
    const double h = g.h();
    typename Grid<N>::Multi base{};
    Vec<N> w{};
    for (int a = 0; a < N; ++a) {
      const double fpos = (p[a] + 1.0) / h;
      double fl = std::floor(fpos);
      int i0 = static_cast<int>(fl);
      if (i0 < 0 || i0 >= g.nodes_per_axis() - 1)
        throw std::invalid_argument("interpolate: point outside grid box");
      base[a] = i0;
      w[a] = fpos - fl;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << N); ++corner) {
      typename Grid<N>::Multi mi = base;
      double weight = 1.0;
      for (int a = 0; a < N; ++a) {
        const bool hi = corner & (1 << a);
        if (hi) mi[a] += 1;
        weight *= hi ? w[a] : (1.0 - w[a]);
      }
      const std::int64_t c = g.compact_index(g.pack(mi));
      if (c >= 0) acc += weight * v_[c];
    }
    return acc;
  }

  ScalarField reflected_xn() const {
    ScalarField out(*grid_);
    for (std::int64_t c = 0; c < size(); ++c) out.v_[c] = v_[grid_->reflected(c)];
    return out;
  }

 private:
  const Grid<N>* grid_ = nullptr;
  std::vector<double> v_;
};

template <int N>
ScalarField<N> operator-(const ScalarField<N>& a, const ScalarField<N>& b) {
  ScalarField<N> out(a.grid());
  for (std::int64_t c = 0; c < a.size(); ++c) out[c] = a[c] - b[c];
  return out;
}

template <int N>
ScalarField<N> operator+(const ScalarField<N>& a, const ScalarField<N>& b) {
  ScalarField<N> out(a.grid());
  for (std::int64_t c = 0; c < a.size(); ++c) out[c] = a[c] + b[c];
  return out;
}

template <int N>
ScalarField<N> operator*(double s, const ScalarField<N>& a) {
  ScalarField<N> out(a.grid());
  for (std::int64_t c = 0; c < a.size(); ++c) out[c] = s * a[c];
  return out;
}

}  // namespace asel
