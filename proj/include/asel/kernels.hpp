#pragma once

#include <cmath>

#include "asel/geometry.hpp"

namespace asel {

/// Normalization constants for the fundamental solutions on R^N.
///
/// gamma_norm is fixed so that -Lap Gamma_N = delta_0 in the distribution
/// sense; dipole_norm so that -Lap P_N = d(delta_0)/dx_N with the pairing
/// <d(delta_0)/dx_N, xi> = dxi(0)/dx_N.  With these choices dipole_norm
/// equals 1/|S^{N-1}| in every dimension; both values are emitted in run
/// metadata so fitted coefficients are reproducible.
struct KernelConfig {
  int dim = 2;
  double gamma_norm = 0.0;   // c_N   (log kernel constant when dim == 2)
  double dipole_norm = 0.0;  // c~_N

  static KernelConfig standard(int dim) {
    detail::require(dim >= 2, "KernelConfig: dimension must be >= 2");
    KernelConfig cfg;
    cfg.dim = dim;
    const double area = sphere_area(dim);
    cfg.gamma_norm = (dim == 2) ? -1.0 / area : 1.0 / ((dim - 2) * area);
    cfg.dipole_norm = 1.0 / area;
    return cfg;
  }
};

/// Fundamental solution of -Lap u = delta_0:  c_N |x|^{2-N}, or c_2 log|x|.
template <int N>
double gamma_kernel(const Vec<N>& x, const KernelConfig& cfg) {
  const double r = norm<N>(x);
  detail::require(r > 0.0, "gamma_kernel: singular at the origin");
  if constexpr (N == 2) return cfg.gamma_norm * std::log(r);
  return cfg.gamma_norm * std::pow(r, 2.0 - N);
}

/// Fundamental solution of -Lap u = d(delta_0)/dx_N:  c~_N x_N / |x|^N.
template <int N>
double dipole_kernel(const Vec<N>& x, const KernelConfig& cfg) {
  const double r2 = norm2<N>(x);
  detail::require(r2 > 0.0, "dipole_kernel: singular at the origin");
  return cfg.dipole_norm * x[N - 1] / std::pow(r2, 0.5 * N);
}

/// Dirichlet Green function of the unit ball via the Kelvin image point
/// y* = y/|y|^2.  Writing rho(x,y)^2 = |x|^2 |y|^2 - 2 x.y + 1 (= the
/// image distance |y| |x - y*|, symmetric in x and y):
///   N >= 3:  G = c_N (|x-y|^{2-N} - rho^{2-N})
///   N == 2:  G = c_2 (log|x-y| - log rho)
/// G is symmetric, positive inside, and vanishes when |x| = 1 or |y| = 1.
template <int N>
double green_ball(const Vec<N>& x, const Vec<N>& y, const KernelConfig& cfg) {
  const Vec<N> d = sub<N>(x, y);
  const double dist2 = norm2<N>(d);
  detail::require(dist2 > 0.0, "green_ball: singular pair x == y");
  const double rho2 = norm2<N>(x) * norm2<N>(y) - 2.0 * dot<N>(x, y) + 1.0;
  if constexpr (N == 2) return 0.5 * cfg.gamma_norm * (std::log(dist2) - std::log(rho2));
  const double e = 0.5 * (2.0 - N);
  return cfg.gamma_norm * (std::pow(dist2, e) - std::pow(rho2, e));
}

/// Green potential of the Dirac mass at the origin, G(x, 0).
template <int N>
double dirac_green(const Vec<N>& x, const KernelConfig& cfg) {
  const double r = norm<N>(x);
  detail::require(r > 0.0, "dirac_green: singular at the origin");
  if constexpr (N == 2) return cfg.gamma_norm * std::log(r);
  return cfg.gamma_norm * (std::pow(r, 2.0 - N) - 1.0);
}

/// Green potential of the dipole source, d/dy_N G(x, y) at y = 0.
/// Differentiating the image form gives the closed expression
///   c~_N x_N (|x|^{-N} - 1),
/// which vanishes on |x| = 1, is x_N-odd, and has leading singularity P_N.
template <int N>
double dipole_green(const Vec<N>& x, const KernelConfig& cfg) {
  const double r2 = norm2<N>(x);
  detail::require(r2 > 0.0, "dipole_green: singular at the origin");
  return cfg.dipole_norm * x[N - 1] * (std::pow(r2, -0.5 * N) - 1.0);
}

}  // namespace asel
