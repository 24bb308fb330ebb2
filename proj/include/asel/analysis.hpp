#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "asel/field.hpp"
#include "asel/kernels.hpp"
#include "asel/nonlinearity.hpp"
#include "asel/sources.hpp"

namespace asel {

/// Samples of a field along the ray r -> u(r e), multilinear interpolation.
template <int N>
struct RayProfile {
  Vec<N> direction{};               // unit vector
  std::vector<double> radii;        // decreasing or increasing, all >= 2h
  std::vector<double> values;
};

template <int N>
RayProfile<N> extract_ray(const ScalarField<N>& u, const Vec<N>& e,
                          const std::vector<double>& radii) {
  const double en = norm<N>(e);
  detail::require(std::abs(en - 1.0) < 1e-12, "extract_ray: direction must be unit");
  const double h = u.grid().h();
  RayProfile<N> prof;
  prof.direction = e;
  prof.radii = radii;
  prof.values.reserve(radii.size());
  for (double r : radii) {
    detail::require(r >= 2.0 * h, "extract_ray: radius below 2h");
    detail::require(r < 1.0, "extract_ray: ray exits the ball");
    prof.values.push_back(u.interpolate(scaled<N>(e, r)));
  }
  return prof;
}

/// Log-spaced radii in [lo, hi].
inline std::vector<double> log_radii(double lo, double hi, int count) {
  detail::require(lo > 0.0 && hi > lo && count >= 2, "log_radii: bad range");
  std::vector<double> r(count);
  for (int i = 0; i < count; ++i) r[i] = lo * std::pow(hi / lo, double(i) / (count - 1));
  return r;
}

enum class FitModel { CoefficientVsKernel, PowerLaw };

struct AsymptoticFit {
  FitModel model = FitModel::CoefficientVsKernel;
  double coefficient = 0.0;
  double exponent = 0.0;      // power-law model only
  double r_squared = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
};

struct FitWindow {
  double lo = 0.0;            // 0 => auto (4h)
  double hi = 0.2;
  int drop_innermost = 2;     // innermost samples are mollifier-contaminated
};

namespace detail {

struct WindowedSamples {
  std::vector<double> r, v;
};

template <int N>
WindowedSamples window_samples(const RayProfile<N>& prof, double h, const FitWindow& win) {
  const double lo = (win.lo > 0.0) ? win.lo : 4.0 * h;
  std::vector<std::pair<double, double>> keep;
  for (std::size_t i = 0; i < prof.radii.size(); ++i)
    if (prof.radii[i] >= lo - 1e-15 && prof.radii[i] <= win.hi + 1e-15)
      keep.emplace_back(prof.radii[i], prof.values[i]);
  std::sort(keep.begin(), keep.end());
  if (static_cast<int>(keep.size()) > win.drop_innermost)
    keep.erase(keep.begin(), keep.begin() + win.drop_innermost);
  require(keep.size() >= 4, "fit: degenerate window (< 4 samples)");
  WindowedSamples out;
  for (auto& [r, v] : keep) {
    out.r.push_back(r);
    out.v.push_back(v);
  }
  return out;
}

inline double r_squared_about(const std::vector<double>& y, const std::vector<double>& fit) {
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - fit[i]) * (y[i] - fit[i]);
    ss_tot += y[i] * y[i];
  }
  if (ss_tot == 0.0) return 1.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

}  // namespace detail

/// Constant fit of u(re)/P_N(re) over the window; the limit is 2k for the
/// dipole problem.  Requires e_N != 0 (P_N vanishes on the equator).
template <int N>
AsymptoticFit fit_dipole_coefficient(const RayProfile<N>& prof, const KernelConfig& cfg,
                                     double h, const FitWindow& win = {}) {
  detail::require(std::abs(prof.direction[N - 1]) > 1e-12,
                  "fit_dipole_coefficient: direction has e_N == 0");
  auto s = detail::window_samples<N>(prof, h, win);
  std::vector<double> ratio(s.r.size()), kernel(s.r.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    kernel[i] = dipole_kernel<N>(scaled<N>(prof.direction, s.r[i]), cfg);
    ratio[i] = s.v[i] / kernel[i];
    mean += ratio[i];
  }
  mean /= ratio.size();
  AsymptoticFit fit;
  fit.model = FitModel::CoefficientVsKernel;
  fit.coefficient = mean;
  std::vector<double> pred(s.r.size());
  for (std::size_t i = 0; i < s.r.size(); ++i) pred[i] = mean * kernel[i];
  fit.r_squared = detail::r_squared_about(s.v, pred);
  fit.window_lo = s.r.front();
  fit.window_hi = s.r.back();
  return fit;
}

/// Constant fit of u(re)/G(re, 0) on an equatorial ray (e_N = 0); the limit
/// is the Dirac strength j.  The ball kernel G(., 0) is used rather than the
/// free-space Gamma_N so the estimate converges on a fixed window (the two
/// agree as r -> 0).
template <int N>
AsymptoticFit fit_dirac_coefficient(const RayProfile<N>& prof, const KernelConfig& cfg,
                                    double h, const FitWindow& win = {}) {
  detail::require(std::abs(prof.direction[N - 1]) < 1e-12,
                  "fit_dirac_coefficient: direction must have e_N == 0");
  auto s = detail::window_samples<N>(prof, h, win);
  std::vector<double> ratio(s.r.size()), kernel(s.r.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    kernel[i] = dirac_green<N>(scaled<N>(prof.direction, s.r[i]), cfg);
    ratio[i] = s.v[i] / kernel[i];
    mean += ratio[i];
  }
  mean /= ratio.size();
  AsymptoticFit fit;
  fit.model = FitModel::CoefficientVsKernel;
  fit.coefficient = mean;
  std::vector<double> pred(s.r.size());
  for (std::size_t i = 0; i < s.r.size(); ++i) pred[i] = mean * kernel[i];
  fit.r_squared = detail::r_squared_about(s.v, pred);
  fit.window_lo = s.r.front();
  fit.window_hi = s.r.back();
  return fit;
}

/// Log-log least squares u ~ A r^{-alpha}; returns alpha as `exponent`.
/// Requires one-signed values on the window.
template <int N>
AsymptoticFit fit_power_law(const RayProfile<N>& prof, double h, const FitWindow& win = {}) {
  auto s = detail::window_samples<N>(prof, h, win);
  const double sign = s.v.front() > 0 ? 1.0 : -1.0;
  for (double v : s.v)
    detail::require(sign * v > 0.0, "fit_power_law: sign change in window");
  const std::size_t n = s.r.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(s.r[i]);
    ly[i] = std::log(sign * s.v[i]);
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  AsymptoticFit fit;
  fit.model = FitModel::PowerLaw;
  fit.exponent = -slope;
  fit.coefficient = sign * std::exp(intercept);
  double ss_res = 0, ss_tot = 0, my = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = intercept + slope * lx[i];
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - my) * (ly[i] - my);
  }
  fit.r_squared = (ss_tot == 0.0) ? 1.0 : std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  fit.window_lo = s.r.front();
  fit.window_hi = s.r.back();
  return fit;
}

/// max over nodes of |u(x', x_N) + u(x', -x_N)|; zero for x_N-odd fields.
template <int N>
double odd_defect(const ScalarField<N>& u) {
  const Grid<N>& g = u.grid();
  double worst = 0.0;
  for (std::int64_t c = 0; c < g.size(); ++c)
    worst = std::max(worst, std::abs(u[c] + u[g.reflected(c)]));
  return worst;
}

enum class WeakNormWeight { Lebesgue, RadialFirstMoment };  // dx and |x| dx

struct WeakNormEstimate {
  double kappa = 2.0;
  WeakNormWeight weight = WeakNormWeight::Lebesgue;
  double value = 0.0;
  std::vector<double> level_grid;
};

/// Marcinkiewicz quasi-norm estimate with superlevel sets E_lambda = {|u| > lambda}
/// as the candidate Borel sets:  max_lambda  int_E |u| dmu / mu(E)^{1/kappa'}.
/// Superlevel sets realize the standard equivalent of the Definition-2.1 inf,
/// not the literal infimum over all Borel sets.
template <int N>
WeakNormEstimate weak_norm(const ScalarField<N>& u, double kappa,
                           WeakNormWeight weight = WeakNormWeight::Lebesgue,
                           int levels = 60) {
  detail::require(kappa > 1.0, "weak_norm: kappa must be > 1");
  const Grid<N>& g = u.grid();
  const double vol = g.cell_volume();
  const double kp = kappa / (kappa - 1.0);

  std::vector<std::pair<double, double>> absw;  // (|u|, mu weight)
  absw.reserve(g.size());
  double umax = 0.0, umin_pos = std::numeric_limits<double>::infinity();
  for (std::int64_t c = 0; c < g.size(); ++c) {
    const double a = std::abs(u[c]);
    const double w =
        (weight == WeakNormWeight::Lebesgue) ? vol : vol * norm<N>(g.coords_compact(c));
    absw.emplace_back(a, w);
    if (a > 0.0) {
      umax = std::max(umax, a);
      umin_pos = std::min(umin_pos, a);
    }
  }
  WeakNormEstimate est;
  est.kappa = kappa;
  est.weight = weight;
  if (umax == 0.0) return est;  // empty superlevel sets at all lambda

  std::sort(absw.begin(), absw.end());  // ascending by |u|
  std::vector<double> suffix_mass(absw.size() + 1, 0.0), suffix_int(absw.size() + 1, 0.0);
  for (std::size_t i = absw.size(); i-- > 0;) {
    suffix_mass[i] = suffix_mass[i + 1] + absw[i].second;
    suffix_int[i] = suffix_int[i + 1] + absw[i].first * absw[i].second;
  }
  const double lo = std::max(umin_pos, umax * 1e-12);
  for (int l = 0; l < levels; ++l) {
    const double lam = lo * std::pow(umax / lo, double(l) / (levels - 1)) * (1.0 - 1e-12);
    est.level_grid.push_back(lam);
    auto it = std::upper_bound(absw.begin(), absw.end(), std::make_pair(lam, 1e300));
    const std::size_t i = static_cast<std::size_t>(it - absw.begin());
    if (i >= absw.size()) continue;
    const double mu = suffix_mass[i];
    if (mu <= 0.0) continue;
    est.value = std::max(est.value, suffix_int[i] / std::pow(mu, 1.0 / kp));
  }
  return est;
}

/// Built-in test functions xi_{a,b,q}(x) = (1-|x|^2)^q (a + b x_N), q in {1,2},
/// with analytic -Lap xi.  All vanish on the sphere and are C^{1,1}.
struct TestFunction {
  double a = 0.0, b = 1.0;
  int q = 1;

  template <int N>
  double value(const Vec<N>& x) const {
    const double w = 1.0 - norm2<N>(x);
    return std::pow(w, q) * (a + b * x[N - 1]);
  }

  template <int N>
  double neg_laplacian(const Vec<N>& x) const {
    const double r2 = norm2<N>(x);
    const double xn = x[N - 1];
    if (q == 1) return a * 2.0 * N + b * (2.0 * N + 4.0) * xn;
    const double w = 1.0 - r2;
    return a * (4.0 * N * w - 8.0 * r2) + b * xn * ((4.0 * N + 8.0) * w - 8.0 * r2);
  }

  /// 2k dxi(0)/dx_N + j xi(0)
  double pairing(double k, double j) const { return 2.0 * k * b + j * a; }
};

inline std::vector<TestFunction> canonical_test_functions() {
  return {{0.0, 1.0, 1}, {1.0, 0.0, 1}, {0.0, 1.0, 2}, {1.0, 1.0, 2}};
}

struct IdentityResidual {
  TestFunction xi;
  double lhs = 0.0;       // int u (-Lap xi) + g(u) xi, principal-value shells for g(u) xi
  double target = 0.0;    // 2k dxi(0)/dx_N + j xi(0)
  double residual = 0.0;  // |lhs - target|
  double shell_tail = 0.0;  // innermost-shell contribution to the g(u) xi sum
};

/// Distributional-identity residuals of a solved field against the built-in
/// test family.  The g(u) xi integral is accumulated on concentric shells of
/// width h from the boundary inward (principal-value style); the recorded
/// tail is the innermost shell's contribution.
template <int N>
std::vector<IdentityResidual> identity_residual(const ScalarField<N>& u, const Nonlinearity& g,
                                                const MeasureSource& src,
                                                const std::vector<TestFunction>& xis =
                                                    canonical_test_functions()) {
  const Grid<N>& grid = u.grid();
  const double vol = grid.cell_volume();
  const double h = grid.h();
  const int shells = static_cast<int>(std::ceil(1.0 / h)) + 1;

  std::vector<IdentityResidual> out;
  for (const TestFunction& xi : xis) {
    std::vector<double> shell_sum(shells, 0.0);
    double linear_part = 0.0;
    for (std::int64_t c = 0; c < grid.size(); ++c) {
      const Vec<N> x = grid.coords_compact(c);
      linear_part += u[c] * xi.neg_laplacian<N>(x);
      const int s = std::min(shells - 1, static_cast<int>(std::floor(norm<N>(x) / h)));
      shell_sum[s] += g(u[c]) * xi.value<N>(x);
    }
    double pv = 0.0;
    for (int s = shells - 1; s >= 0; --s) pv += shell_sum[s];
    IdentityResidual res;
    res.xi = xi;
    res.lhs = vol * (linear_part + pv);
    res.target = xi.pairing(src.k, src.j);
    res.residual = std::abs(res.lhs - res.target);
    res.shell_tail = vol * shell_sum[0];
    out.push_back(res);
  }
  return out;
}

struct AngularProfile {
  std::vector<double> theta;   // [0, pi]
  std::vector<double> omega;   // omega(theta), positive inside
  double shoot_slope = 0.0;    // omega'(0)
  double ode_residual = 0.0;   // collocation residual on the fine grid
};

namespace detail {

/// RK4 for omega'' + a^2 omega = |omega|^{p-1} omega from omega(0)=0,
/// omega'(0)=slope; returns the first zero of omega in (0, theta_max],
/// or theta_max+1 if none.  With stop_at_zero=false it integrates the whole
/// interval regardless (used to store the final profile).
inline double first_zero(double p, double a, double slope, double theta_max, int steps,
                         std::vector<double>* store = nullptr, bool stop_at_zero = true) {
  const double h = theta_max / steps;
  double w = 0.0, wp = slope, th = 0.0;
  if (store) {
    store->clear();
    store->push_back(0.0);
  }
  auto rhs = [&](double w_) { return std::pow(std::abs(w_), p - 1.0) * w_ - a * a * w_; };
  for (int i = 0; i < steps; ++i) {
    const double k1w = wp, k1p = rhs(w);
    const double k2w = wp + 0.5 * h * k1p, k2p = rhs(w + 0.5 * h * k1w);
    const double k3w = wp + 0.5 * h * k2p, k3p = rhs(w + 0.5 * h * k2w);
    const double k4w = wp + h * k3p, k4p = rhs(w + h * k3w);
    const double wn = w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    wp += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    th += h;
    if (store) store->push_back(wn);
    if (stop_at_zero && wn <= 0.0 && th > h)
      return th - h * wn / (wn - w);  // linear zero estimate
    w = wn;
    if (!std::isfinite(w)) return theta_max + 1.0;
  }
  return theta_max + 1.0;
}

}  // namespace detail

/// Separable angular profile for the strongly singular limit at N = 2:
/// solves omega'' + alpha^2 omega = |omega|^{p-1} omega on (0, pi),
/// omega(0) = omega(pi) = 0, omega > 0, alpha = 2/(p-1), shooting on
/// omega'(0) with bisection.  A positive solution exists iff alpha > 1,
/// i.e. p < 3 = (N+1)/(N-1); otherwise throws.
inline AngularProfile angular_profile_oracle(double p, int dim = 2, int steps = 200000) {
  detail::require(dim == 2, "angular_profile_oracle: only N = 2 is supported");
  detail::require(p > 1.0, "angular_profile_oracle: requires p > 1");
  const double pi = std::numbers::pi;
  const double alpha = 2.0 / (p - 1.0);
  // a positive solution vanishing at 0 and pi exists iff alpha > 1: the
  // absorption only delays the first zero of the small-amplitude limit
  // sin(alpha theta), which already sits at pi/alpha >= pi for alpha <= 1
  if (alpha <= 1.0)
    throw std::domain_error(
        "angular_profile_oracle: no positive solution (supercritical exponent)");
  const int probe_steps = 20000;

  double lo = 1e-8, hi = 1.0;
  bool bracketed = false;
  for (int i = 0; i < 60; ++i) {
    if (detail::first_zero(p, alpha, hi, 2.0 * pi, 2 * probe_steps) > pi) {
      bracketed = true;
      break;
    }
    hi *= 2.0;
  }
  if (!bracketed || detail::first_zero(p, alpha, lo, 2.0 * pi, 2 * probe_steps) > pi)
    throw std::domain_error(
        "angular_profile_oracle: shooting bracket not found");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (detail::first_zero(p, alpha, mid, 2.0 * pi, 2 * probe_steps) > pi)
      hi = mid;
    else
      lo = mid;
  }
  const double slope = 0.5 * (lo + hi);

  AngularProfile prof;
  prof.shoot_slope = slope;
  std::vector<double> w;
  detail::first_zero(p, alpha, slope, pi, steps, &w, /*stop_at_zero=*/false);
  prof.omega = w;
  prof.theta.resize(steps + 1);
  const double h = pi / steps;
  for (int i = 0; i <= steps; ++i) prof.theta[i] = i * h;
  prof.omega.front() = 0.0;

  // 4th-order collocation on a strided grid: stride keeps the stencil
  // spacing near the rounding/truncation optimum (~pi/2000), away from the
  // 1/h^2 noise amplification of the raw fine grid
  const int stride = std::max(1, steps / 2000);
  const double hs = stride * h;
  double worst = 0.0;
  for (int i = 2 * stride; i + 2 * stride <= steps; i += stride) {
    const double second = (-w[i - 2 * stride] + 16 * w[i - stride] - 30 * w[i] +
                           16 * w[i + stride] - w[i + 2 * stride]) /
                          (12.0 * hs * hs);
    const double res =
        second + alpha * alpha * w[i] - std::pow(std::abs(w[i]), p - 1.0) * w[i];
    worst = std::max(worst, std::abs(res));
  }
  prof.ode_residual = worst;
  return prof;
}

/// omega(theta) by linear interpolation on the oracle grid.
inline double angular_value(const AngularProfile& prof, double theta) {
  const double pi = std::numbers::pi;
  detail::require(theta >= 0.0 && theta <= pi, "angular_value: theta outside [0, pi]");
  const double h = prof.theta[1] - prof.theta[0];
  const std::size_t i =
      std::min(prof.omega.size() - 2, static_cast<std::size_t>(theta / h));
  const double frac = (theta - prof.theta[i]) / h;
  return prof.omega[i] * (1.0 - frac) + prof.omega[i + 1] * frac;
}

}  // namespace asel
