#pragma once

#include <cmath>

#include "asel/field.hpp"

namespace asel {

/// Parameters of the measure right-hand side k mu_{t,m} + j sigma_m.
struct MeasureSource {
  double k = 0.0;      // dipole strength
  double j = 0.0;      // Dirac strength
  double t = 0.25;     // dipole half-separation along e_N
  long m = 1;          // mollifier index, radius eps_m = 1/(4m)

  double eps() const { return 1.0 / (4.0 * static_cast<double>(m)); }
};

/// Mollifier index coupled to the separation: targets eps = t/ratio but
/// never lets the bump fall under 4 grid cells.
inline long coupled_mollifier_index(double t, double h, double ratio = 4.0) {
  detail::require(t > 0.0 && h > 0.0, "coupled_mollifier_index: bad arguments");
  const long m_resolution = static_cast<long>(std::floor(1.0 / (16.0 * h)));
  detail::require(m_resolution >= 1, "coupled_mollifier_index: grid too coarse for any mollifier");
  long m = static_cast<long>(std::llround(ratio / (4.0 * t)));
  if (m < 1) m = 1;
  if (m > m_resolution) m = m_resolution;
  return m;
}

/// Standard bump exp(-1/(1 - |x/eps|^2)) of radius eps_m = 1/(4m), rescaled
/// so its discrete integral over the masked grid is exactly 1.
template <int N>
ScalarField<N> mollifier(const Grid<N>& grid, long m, const Vec<N>& center) {
  detail::require(m >= 1, "mollifier: index must be >= 1");
  const double eps = 1.0 / (4.0 * static_cast<double>(m));
  detail::require(grid.h() <= eps / 4.0 + 1e-14,
                  "mollifier: under-resolved (need h <= eps/4)");
  ScalarField<N> out(grid);
  double mass = 0.0;
  for (std::int64_t c = 0; c < grid.size(); ++c) {
    const Vec<N> x = grid.coords_compact(c);
    const double rho2 = norm2<N>(sub<N>(x, center)) / (eps * eps);
    if (rho2 < 1.0) {
      const double v = std::exp(-1.0 / (1.0 - rho2));
      out[c] = v;
      mass += v;
    }
  }
  mass *= grid.cell_volume();
  detail::require(mass > 0.0, "mollifier: empty support on grid");
  for (std::int64_t c = 0; c < grid.size(); ++c) out[c] /= mass;
  return out;
}

/// Assembles k mu_{t,m} + j sigma_m as one grid field, where
/// mu_{t,m} = (sigma_m(. - t e_N) - sigma_m(. + t e_N)) / t.
/// The field is x_N-odd exactly when j = 0.
template <int N>
ScalarField<N> dipole_field(const Grid<N>& grid, const MeasureSource& src) {
  const double eps = src.eps();
  detail::require(eps < src.t, "dipole_field: mollifier supports overlap (need eps < t)");
  detail::require(src.t + eps < 1.0, "dipole_field: support leaves the ball (need t + eps < 1)");
  ScalarField<N> out(grid);
  if (src.k != 0.0) {
    Vec<N> up{};
    up[N - 1] = src.t;
    Vec<N> down{};
    down[N - 1] = -src.t;
    const ScalarField<N> plus = mollifier<N>(grid, src.m, up);
    const ScalarField<N> minus = mollifier<N>(grid, src.m, down);
    for (std::int64_t c = 0; c < grid.size(); ++c)
      out[c] += src.k * (plus[c] - minus[c]) / src.t;
  }
  if (src.j != 0.0) {
    const ScalarField<N> center = mollifier<N>(grid, src.m, Vec<N>{});
    for (std::int64_t c = 0; c < grid.size(); ++c) out[c] += src.j * center[c];
  }
  return out;
}

}  // namespace asel
