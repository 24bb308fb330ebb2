#pragma once

#include <cmath>
#include <future>
#include <memory>
#include <map>
#include <string>
#include <vector>

#include "asel/analysis.hpp"
#include "asel/solver.hpp"
#include "asel/sources.hpp"

namespace asel {

enum class LadderMode { Dipole, Combined, KLimit, SupercriticalContrast };

inline const char* to_string(LadderMode m) {
  switch (m) {
    case LadderMode::Dipole: return "dipole";
    case LadderMode::Combined: return "combined";
    case LadderMode::KLimit: return "k_limit";
    case LadderMode::SupercriticalContrast: return "supercritical_contrast";
  }
  return "?";
}

struct LadderSpec {
  LadderMode mode = LadderMode::Dipole;
  int grid_m = 257;
  Nonlinearity g = Nonlinearity::zero();
  Nonlinearity g_contrast = Nonlinearity::power(3.5);  // supercritical arm of contrast mode
  std::vector<double> k_list{1.0};
  double j = 0.0;
  std::vector<double> t_schedule{0.25, 0.125, 0.0625};
  double eps_ratio = 4.0;      // mollifier radius target eps = t/eps_ratio (floored at 4h)
  long n_start = 4;            // first truncation level of each rung
  int fit_samples = 16;
  FitWindow dipole_window{0.0, 0.30, 2};  // lo == 0 -> rung-coupled max(4h, 1.05 (t+eps))
  FitWindow dirac_window{0.0, 0.35, 2};
  double dipole_window_hi_cap = 0.6;
  double exponent_lo = 0.2, exponent_hi = 0.45;
  double angular_radius = 0.25;
  double angular_theta_margin = 0.2;
  int workers = 1;  // caps the number of parallel independent chains
  SolverOptions solver;
};

struct RungRecord {
  double k = 0.0, j = 0.0, t = 0.0;
  long m = 0, n = 0;
  int grid_m = 0;
  double residual = 0.0;
  int newton_iterations = 0;
  bool converged = false;
  double tol_nl = 0.0;
  double l1_gap = -1.0;            // vs previous rung of the same chain
  double coeff_dipole = 0.0, coeff_dirac = 0.0, exponent_fit = 0.0;
  double fit_window_lo = 0.0, fit_window_hi = 0.0;
  double odd_defect_value = 0.0;
  double max_abs = 0.0;
  std::string chain;
};

struct CheckRecord {
  std::string name;
  bool pass = false;
  double value = 0.0;   // measured
  double bound = 0.0;   // threshold it is compared against
  std::string detail;
};

template <int N>
struct LadderResult {
  std::vector<RungRecord> rungs;
  std::vector<CheckRecord> checks;
  std::shared_ptr<const Grid<N>> grid;           // keeps the stored fields' grid alive
  std::map<std::string, ScalarField<N>> fields;  // final field per chain

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

/// Node-wise "a <= b + slack" on the open upper half-grid; returns the worst
/// violation (positive when the ordering fails beyond the slack).
template <int N>
double upper_half_order_violation(const ScalarField<N>& a, const ScalarField<N>& b) {
  const Grid<N>& g = a.grid();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::int64_t c = 0; c < g.size(); ++c) {
    if (g.coords_compact(c)[N - 1] <= 0.0) continue;
    worst = std::max(worst, a[c] - b[c]);
  }
  return worst;
}

template <int N>
double upper_half_min(const ScalarField<N>& u) {
  const Grid<N>& g = u.grid();
  double worst = std::numeric_limits<double>::infinity();
  for (std::int64_t c = 0; c < g.size(); ++c) {
    if (g.coords_compact(c)[N - 1] <= 0.0) continue;
    worst = std::min(worst, u[c]);
  }
  return worst;
}

/// Solves one rung, escalating the truncation level until the cap is
/// inactive on the solution range (g_n == g there), warm-starting on the
/// way up.  Returns the final field; records the level trail in `levels`.
template <int N>
ScalarField<N> solve_rung_to_inactivity(const Grid<N>& grid, const ScalarField<N>& f,
                                        const Nonlinearity& g, long n_start,
                                        const SolverOptions& opt, long& n_final,
                                        SolveReport& last_report,
                                        std::vector<std::pair<long, ScalarField<N>>>* levels) {
  if (g.kind() == Nonlinearity::Kind::Zero) {
    auto [u, rep] = solve_linear<N>(f, opt);
    n_final = 1;
    last_report = rep;
    return u;
  }
  long n = n_start;
  ScalarField<N> u(grid);
  const ScalarField<N>* warm = nullptr;
  for (int tries = 0; tries < 64; ++tries) {
    TruncatedNonlinearity gn = truncate(g, n);
    auto [sol, rep] = solve_semilinear<N>(f, gn, warm, opt);
    if (!rep.converged) throw std::runtime_error("ladder: rung solve did not converge");
    u = sol;
    last_report = rep;
    if (levels) levels->emplace_back(n, u);
    warm = &u;
    const double need = g(u.max_abs());
    if (static_cast<double>(n) - 1.0 >= need + 2.0) {
      n_final = n;
      // confirmation solve with the cap one doubling higher: both levels are
      // inactive on the solution range, so the fields must agree within tol
      TruncatedNonlinearity gn2 = truncate(g, 2 * n);
      auto [sol2, rep2] = solve_semilinear<N>(f, gn2, warm, opt);
      if (!rep2.converged) throw std::runtime_error("ladder: confirmation solve failed");
      u = sol2;
      last_report = rep2;
      if (levels) levels->emplace_back(2 * n, u);
      return u;
    }
    long next = n * 2;
    while (static_cast<double>(next) - 1.0 < need + 8.0) next *= 2;
    n = next;
  }
  throw std::runtime_error("ladder: truncation level escalation did not stabilize");
}

template <int N>
FitWindow rung_window(const LadderSpec& spec, const Grid<N>& grid, double t, double eps) {
  FitWindow win = spec.dipole_window;
  if (win.lo <= 0.0) win.lo = std::max(4.0 * grid.h(), 1.05 * (t + eps));
  if (win.hi < 1.8 * win.lo) win.hi = std::min(spec.dipole_window_hi_cap, 1.8 * win.lo);
  return win;
}

template <int N>
RayProfile<N> polar_profile(const ScalarField<N>& u, const FitWindow& win, int samples) {
  return extract_ray<N>(u, axis_unit<N>(), log_radii(win.lo, win.hi, samples));
}

}  // namespace detail

/// Dipole-only ladder (j = 0): for each k and each t solves
/// -Lap u + g_n(u) = k mu_{t,m} with n escalated to inactivity, and records
/// the orderings the comparison theory predicts:
///   n-monotonicity (larger cap, smaller solution), 0 <= u <= k G_h[mu_{t,m}]
///   on the upper half-grid, k-monotonicity, and t-Cauchy gaps.
template <int N>
LadderResult<N> run_dipole_ladder(const LadderSpec& spec) {
  detail::require(spec.j == 0.0, "run_dipole_ladder: requires j = 0");
  if (spec.g.kind() == Nonlinearity::Kind::Power) {
    detail::require(check_subcritical(spec.g, N).converges,
                    "run_dipole_ladder: nonlinearity is not subcritical");
  }
  LadderResult<N> result;
  result.grid = std::make_shared<Grid<N>>(spec.grid_m);
  const Grid<N>& grid = *result.grid;
  const KernelConfig cfg = KernelConfig::standard(N);

  std::vector<ScalarField<N>> prev_k_rungs;  // per-t fields of the previous k chain
  for (double k : spec.k_list) {
    const std::string chain = "k=" + std::to_string(k);
    const ScalarField<N>* prev_field = nullptr;
    ScalarField<N> prev_store(grid);
    std::vector<ScalarField<N>> this_k_rungs;
    for (std::size_t ti = 0; ti < spec.t_schedule.size(); ++ti) {
      const double t = spec.t_schedule[ti];
      MeasureSource src;
      src.k = k;
      src.t = t;
      src.m = coupled_mollifier_index(t, grid.h(), spec.eps_ratio);
      const ScalarField<N> f = dipole_field<N>(grid, src);
      const double tol_nl = spec.solver.tol_nonlinear_rel * f.l2_norm();
      const double slack = 10.0 * std::max(tol_nl, 1e-14);

      std::vector<std::pair<long, ScalarField<N>>> levels;
      long n_final = 1;
      SolveReport rep;
      ScalarField<N> u = detail::solve_rung_to_inactivity<N>(grid, f, spec.g, spec.n_start,
                                                             spec.solver, n_final, rep, &levels);

      for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
        const double viol =
            detail::upper_half_order_violation<N>(levels[li + 1].second, levels[li].second);
        result.checks.push_back({"n_monotone " + chain + " t=" + std::to_string(t) + " n " +
                                     std::to_string(levels[li].first) + "->" +
                                     std::to_string(levels[li + 1].first),
                                 viol <= slack, viol, slack, "upper-half violation"});
      }
      if (levels.size() >= 2) {
        const auto& a = levels[levels.size() - 2].second;
        const auto& b = levels.back().second;
        const double diff = (a - b).max_abs();
        result.checks.push_back({"n_inactive " + chain + " t=" + std::to_string(t),
                                 diff <= slack, diff, slack,
                                 "final level pair sup-difference"});
      }

      auto [barrier, brep] = solve_linear<N>(f, spec.solver);
      const double lo_viol = -detail::upper_half_min<N>(u);
      const double hi_viol = detail::upper_half_order_violation<N>(u, barrier);
      result.checks.push_back({"positivity " + chain + " t=" + std::to_string(t),
                               lo_viol <= slack, lo_viol, slack, "min u on upper half"});
      result.checks.push_back({"barrier " + chain + " t=" + std::to_string(t),
                               hi_viol <= slack, hi_viol, slack,
                               "u <= k G_h[mu_{t,m}] on upper half"});
      if (ti < prev_k_rungs.size()) {
        const double viol = detail::upper_half_order_violation<N>(prev_k_rungs[ti], u);
        result.checks.push_back({"k_monotone -> " + chain + " t=" + std::to_string(t),
                                 viol <= slack, viol, slack, "upper-half violation"});
      }

      RungRecord rec;
      rec.k = k;
      rec.j = 0.0;
      rec.t = t;
      rec.m = src.m;
      rec.n = n_final;
      rec.grid_m = spec.grid_m;
      rec.residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
      rec.newton_iterations = rep.iterations;
      rec.converged = rep.converged;
      rec.tol_nl = tol_nl;
      rec.chain = chain;
      rec.odd_defect_value = odd_defect<N>(u);
      rec.max_abs = u.max_abs();
      const FitWindow win = detail::rung_window<N>(spec, grid, t, src.eps());
      const AsymptoticFit fit = fit_dipole_coefficient<N>(
          detail::polar_profile<N>(u, win, spec.fit_samples), cfg, grid.h(), win);
      rec.coeff_dipole = fit.coefficient;
      rec.fit_window_lo = fit.window_lo;
      rec.fit_window_hi = fit.window_hi;
      if (prev_field) rec.l1_gap = (u - *prev_field).l1_norm_scaled();
      result.rungs.push_back(rec);

      prev_store = u;
      prev_field = &prev_store;
      this_k_rungs.push_back(u);
      if (ti + 1 == spec.t_schedule.size()) result.fields.emplace(chain, u);
    }
    prev_k_rungs = std::move(this_k_rungs);
  }
  return result;
}

/// Combined-source ladder (j > 0): per rung solves both the combined and the
/// dipole-only problems and verifies the barrier sandwich
///   w <= v <= w + G_h[j sigma_m]   node-wise,
/// then fits the polar dipole coefficient on the x_N-odd part of v and the
/// equatorial Dirac coefficient on v itself.
template <int N>
LadderResult<N> run_combined_ladder(const LadderSpec& spec) {
  detail::require(spec.j > 0.0, "run_combined_ladder: requires j > 0");
  detail::require(spec.k_list.size() == 1, "run_combined_ladder: one k per run");
  const double k = spec.k_list.front();
  LadderResult<N> result;
  result.grid = std::make_shared<Grid<N>>(spec.grid_m);
  const Grid<N>& grid = *result.grid;
  const KernelConfig cfg = KernelConfig::standard(N);

  const ScalarField<N>* prev_field = nullptr;
  ScalarField<N> prev_store(grid);
  for (std::size_t ti = 0; ti < spec.t_schedule.size(); ++ti) {
    const double t = spec.t_schedule[ti];
    MeasureSource src;
    src.k = k;
    src.j = spec.j;
    src.t = t;
    src.m = coupled_mollifier_index(t, grid.h(), spec.eps_ratio);
    const ScalarField<N> f_combined = dipole_field<N>(grid, src);
    MeasureSource src_dip = src;
    src_dip.j = 0.0;
    const ScalarField<N> f_dipole = dipole_field<N>(grid, src_dip);
    MeasureSource src_dirac = src;
    src_dirac.k = 0.0;
    const ScalarField<N> f_dirac = dipole_field<N>(grid, src_dirac);

    const double tol_nl = spec.solver.tol_nonlinear_rel * f_combined.l2_norm();
    const double slack = 10.0 * std::max(tol_nl, 1e-14);

    long n_v = 1, n_w = 1;
    SolveReport rep_v, rep_w;
    ScalarField<N> v = detail::solve_rung_to_inactivity<N>(grid, f_combined, spec.g,
                                                           spec.n_start, spec.solver, n_v,
                                                           rep_v, nullptr);
    ScalarField<N> w = detail::solve_rung_to_inactivity<N>(grid, f_dipole, spec.g,
                                                           spec.n_start, spec.solver, n_w,
                                                           rep_w, nullptr);
    auto [green_dirac_pot, rep_g] = solve_linear<N>(f_dirac, spec.solver);

    double lo_viol = 0.0, hi_viol = 0.0;  // sandwich on the whole grid
    for (std::int64_t c = 0; c < grid.size(); ++c) {
      lo_viol = std::max(lo_viol, w[c] - v[c]);
      hi_viol = std::max(hi_viol, v[c] - (w[c] + green_dirac_pot[c]));
    }
    result.checks.push_back({"sandwich_lower t=" + std::to_string(t), lo_viol <= slack,
                             lo_viol, slack, "w <= v node-wise"});
    result.checks.push_back({"sandwich_upper t=" + std::to_string(t), hi_viol <= slack,
                             hi_viol, slack, "v <= w + G_h[j sigma_m] node-wise"});

    RungRecord rec;
    rec.k = k;
    rec.j = spec.j;
    rec.t = t;
    rec.m = src.m;
    rec.n = n_v;
    rec.grid_m = spec.grid_m;
    rec.residual = rep_v.residual_history.empty() ? 0.0 : rep_v.residual_history.back();
    rec.newton_iterations = rep_v.iterations;
    rec.converged = rep_v.converged;
    rec.tol_nl = tol_nl;
    rec.chain = "combined";
    rec.odd_defect_value = odd_defect<N>(v);
    rec.max_abs = v.max_abs();

    // polar dipole coefficient from the odd part (kills the j G(.,0) even part)
    ScalarField<N> v_odd(grid);
    const ScalarField<N> v_ref = v.reflected_xn();
    for (std::int64_t c = 0; c < grid.size(); ++c) v_odd[c] = 0.5 * (v[c] - v_ref[c]);
    FitWindow pwin = spec.dipole_window;
    if (pwin.lo <= 0.0) pwin.lo = std::max(4.0 * grid.h(), 1.05 * (t + src.eps()));
    if (pwin.hi < 1.8 * pwin.lo) pwin.hi = std::min(spec.dipole_window_hi_cap, 1.8 * pwin.lo);
    const AsymptoticFit dip = fit_dipole_coefficient<N>(
        detail::polar_profile<N>(v_odd, pwin, spec.fit_samples), cfg, grid.h(), pwin);
    rec.coeff_dipole = dip.coefficient;
    rec.fit_window_lo = dip.window_lo;
    rec.fit_window_hi = dip.window_hi;

    FitWindow dwin = spec.dirac_window;
    if (dwin.lo <= 0.0) dwin.lo = std::max(4.0 * grid.h(), src.eps() + 2.0 * grid.h());
    Vec<N> equator{};
    equator[0] = 1.0;
    const AsymptoticFit dir = fit_dirac_coefficient<N>(
        extract_ray<N>(v, equator, log_radii(dwin.lo, dwin.hi, spec.fit_samples)), cfg,
        grid.h(), dwin);
    rec.coeff_dirac = dir.coefficient;
    if (prev_field) rec.l1_gap = (v - *prev_field).l1_norm_scaled();
    result.rungs.push_back(rec);

    prev_store = v;
    prev_field = &prev_store;
    if (ti + 1 == spec.t_schedule.size()) {
      result.fields.emplace("combined", v);
      result.fields.emplace("dipole_only", w);
      result.fields.emplace("dirac_potential", green_dirac_pot);
    }
  }
  return result;
}

/// k -> infinity ladder at the finest separation: solves along a doubling k
/// list with warm starts, asserts k-monotonicity on the upper half-grid,
/// fits the ray exponent (target 2/(p-1)) at the largest k, bounds
/// w_k r^{2/(p-1)} on sampled radii, and compares the angular shape at
/// radius `angular_radius` against the separable ODE profile.
template <int N>
LadderResult<N> run_k_limit(const LadderSpec& spec) {
  static_assert(N == 2, "run_k_limit: the angular oracle is N = 2 only");
  detail::require(spec.j == 0.0, "run_k_limit: requires j = 0");
  detail::require(spec.g.kind() == Nonlinearity::Kind::Power, "run_k_limit: power g required");
  const double p = spec.g.exponent();
  const double critical = static_cast<double>(N + 1) / (N - 1);
  detail::require(p > 1.0 && p < critical, "run_k_limit: requires 1 < p < (N+1)/(N-1)");
  const double sing_exp = 2.0 / (p - 1.0);

  LadderResult<N> result;
  result.grid = std::make_shared<Grid<N>>(spec.grid_m);
  const Grid<N>& grid = *result.grid;
  const KernelConfig cfg = KernelConfig::standard(N);
  const double t = spec.t_schedule.back();

  MeasureSource src;
  src.t = t;
  src.m = coupled_mollifier_index(t, grid.h(), spec.eps_ratio);

  ScalarField<N> prev(grid);
  bool have_prev = false;
  ScalarField<N> u(grid);
  long n_prev = spec.n_start;
  std::vector<double> lambda_trail;
  const std::vector<double> bound_radii = log_radii(0.05, 0.3, 12);

  for (std::size_t ki = 0; ki < spec.k_list.size(); ++ki) {
    const double k = spec.k_list[ki];
    src.k = k;
    const ScalarField<N> f = dipole_field<N>(grid, src);
    const double tol_nl = spec.solver.tol_nonlinear_rel * f.l2_norm();
    const double slack = 10.0 * std::max(tol_nl, 1e-14);

    long n_final = 1;
    SolveReport rep;
    ScalarField<N> warm = have_prev ? prev : ScalarField<N>(grid);
    // escalate n starting from the previous rung's final level
    {
      long n = n_prev;
      const ScalarField<N>* ws = have_prev ? &warm : nullptr;
      for (int tries = 0; tries < 64; ++tries) {
        TruncatedNonlinearity gn = truncate(spec.g, n);
        auto [sol, r] = solve_semilinear<N>(f, gn, ws, spec.solver);
        if (!r.converged) throw std::runtime_error("k_limit: rung solve did not converge");
        u = sol;
        rep = r;
        warm = u;
        ws = &warm;
        const double need = spec.g(u.max_abs());
        if (static_cast<double>(n) - 1.0 >= need + 2.0) {
          n_final = n;
          break;
        }
        long next = n * 2;
        while (static_cast<double>(next) - 1.0 < need + 8.0) next *= 2;
        n = next;
        n_final = n;
      }
      n_prev = n_final;
    }

    if (have_prev) {
      const double viol = detail::upper_half_order_violation<N>(prev, u);
      result.checks.push_back({"k_monotone k=" + std::to_string(k), viol <= slack, viol,
                               slack, "w_{k/2} <= w_k on upper half"});
    }

    RungRecord rec;
    rec.k = k;
    rec.t = t;
    rec.m = src.m;
    rec.n = n_final;
    rec.grid_m = spec.grid_m;
    rec.residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
    rec.newton_iterations = rep.iterations;
    rec.converged = rep.converged;
    rec.tol_nl = tol_nl;
    rec.chain = "k_limit";
    rec.odd_defect_value = odd_defect<N>(u);
    rec.max_abs = u.max_abs();
    if (have_prev) rec.l1_gap = (u - prev).l1_norm_scaled();

    const RayProfile<N> bound_prof = extract_ray<N>(u, axis_unit<N>(), bound_radii);
    double lam = 0.0;
    for (std::size_t i = 0; i < bound_radii.size(); ++i)
      lam = std::max(lam, bound_prof.values[i] * std::pow(bound_radii[i], sing_exp));
    lambda_trail.push_back(lam);

    FitWindow ewin;
    ewin.lo = spec.exponent_lo;
    ewin.hi = spec.exponent_hi;
    ewin.drop_innermost = 0;
    const AsymptoticFit ex = fit_power_law<N>(
        extract_ray<N>(u, axis_unit<N>(), log_radii(ewin.lo, ewin.hi, spec.fit_samples)),
        grid.h(), ewin);
    rec.exponent_fit = ex.exponent;
    rec.fit_window_lo = ex.window_lo;
    rec.fit_window_hi = ex.window_hi;
    result.rungs.push_back(rec);

    prev = u;
    have_prev = true;
  }

  // singular-bound shape at the largest k: w r^{2/(p-1)} positive and
  // two-sided on the sampled radii
  {
    const RayProfile<N> prof = extract_ray<N>(u, axis_unit<N>(), bound_radii);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < bound_radii.size(); ++i) {
      const double s = prof.values[i] * std::pow(bound_radii[i], sing_exp);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    result.checks.push_back({"singular_bound_two_sided", lo > 0.0 && hi / lo < 20.0,
                             hi / lo, 20.0, "max/min of w r^{2/(p-1)} on [0.05, 0.3]"});
    // absolute stabilization of the fitted bound needs k far beyond desk
    // scale (the fixed-separation far field is capped by an interior
    // Keller-Osserman envelope above the separable one); the measurable
    // signature is that the relative lambda-hat increments shrink along the
    // doubling chain
    bool shrinking = lambda_trail.size() >= 3;
    double last_rel = 0.0;
    for (std::size_t i = 1; i + 1 < lambda_trail.size(); ++i) {
      const double a = (lambda_trail[i] - lambda_trail[i - 1]) / lambda_trail[i];
      const double b = (lambda_trail[i + 1] - lambda_trail[i]) / lambda_trail[i + 1];
      if (b > a + 1e-9) shrinking = false;
      last_rel = b;
    }
    result.checks.push_back({"lambda_hat_stabilizing", shrinking, last_rel, 0.0,
                             "relative lambda-hat increments shrink along the k chain"});
  }

  // angular shape vs the separable ODE profile
  {
    const AngularProfile oracle = angular_profile_oracle(p);
    const double r0 = spec.angular_radius;
    const double pole = u.interpolate(scaled<N>(axis_unit<N>(), r0));
    double sup = 0.0;
    const int samples = 61;
    for (int i = 0; i < samples; ++i) {
      const double theta = spec.angular_theta_margin +
                           (std::numbers::pi - 2.0 * spec.angular_theta_margin) * i /
                               (samples - 1);
      Vec<N> e{};
      e[0] = std::cos(theta);
      e[1] = std::sin(theta);
      const double val = u.interpolate(scaled<N>(e, r0)) / pole;
      const double ref = angular_value(oracle, theta) /
                         angular_value(oracle, 0.5 * std::numbers::pi);
      sup = std::max(sup, std::abs(val - ref));
    }
    result.checks.push_back({"angular_match", sup <= 0.15, sup, 0.15,
                             "sup distance of normalized shapes at r0"});
  }

  result.fields.emplace("k_limit", u);
  return result;
}

/// Critical-exponent contrast: runs the same dipole ladder with the
/// subcritical control g and the supercritical g_contrast, fitting every
/// rung on one fixed window.  Reports the coefficient trails; the checks
/// record the contrast signature (control retains >= 90% of 2k, the
/// supercritical trail is nonincreasing and ends below 50% of 2k).
template <int N>
LadderResult<N> run_supercritical_contrast(const LadderSpec& spec) {
  detail::require(spec.j == 0.0, "run_supercritical_contrast: requires j = 0");
  detail::require(spec.k_list.size() == 1, "run_supercritical_contrast: one k per run");
  const double k = spec.k_list.front();
  const double critical = static_cast<double>(N + 1) / (N - 1);
  detail::require(spec.g_contrast.kind() == Nonlinearity::Kind::Power &&
                      spec.g_contrast.exponent() >= critical,
                  "run_supercritical_contrast: g_contrast must be supercritical power");

  LadderResult<N> result;
  result.grid = std::make_shared<Grid<N>>(spec.grid_m);
  const Grid<N>& grid = *result.grid;
  const KernelConfig cfg = KernelConfig::standard(N);

  FitWindow win = spec.dipole_window;
  detail::require(win.lo > 0.0, "run_supercritical_contrast: fixed fit window required");

  struct Chain {
    const char* name;
    const Nonlinearity* g;
  };
  const Chain chains[] = {{"control", &spec.g}, {"supercritical", &spec.g_contrast}};

  struct ChainOutput {
    std::vector<RungRecord> rungs;
    std::vector<double> trail;
    ScalarField<N> final_field;
  };
  auto run_chain = [&](const Chain& chain) {
    ChainOutput out;
    out.final_field = ScalarField<N>(grid);
    ScalarField<N> prev(grid);
    bool have_prev = false;
    for (double t : spec.t_schedule) {
      MeasureSource src;
      src.k = k;
      src.t = t;
      src.m = coupled_mollifier_index(t, grid.h(), spec.eps_ratio);
      // first retained sample (after the innermost drops) must clear the support
      const double eff_lo =
          win.lo * std::pow(win.hi / win.lo,
                            double(win.drop_innermost) / (spec.fit_samples - 1));
      detail::require(1.005 * (t + src.eps()) <= eff_lo,
                      "run_supercritical_contrast: rung support reaches into the fit window");
      const ScalarField<N> f = dipole_field<N>(grid, src);
      long n_final = 1;
      SolveReport rep;
      ScalarField<N> u = detail::solve_rung_to_inactivity<N>(
          grid, f, *chain.g, spec.n_start, spec.solver, n_final, rep, nullptr);

      RungRecord rec;
      rec.k = k;
      rec.t = t;
      rec.m = src.m;
      rec.n = n_final;
      rec.grid_m = spec.grid_m;
      rec.residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
      rec.newton_iterations = rep.iterations;
      rec.converged = rep.converged;
      rec.tol_nl = spec.solver.tol_nonlinear_rel * f.l2_norm();
      rec.chain = chain.name;
      rec.odd_defect_value = odd_defect<N>(u);
      rec.max_abs = u.max_abs();
      const AsymptoticFit fit = fit_dipole_coefficient<N>(
          detail::polar_profile<N>(u, win, spec.fit_samples), cfg, grid.h(), win);
      rec.coeff_dipole = fit.coefficient;
      rec.fit_window_lo = fit.window_lo;
      rec.fit_window_hi = fit.window_hi;
      if (have_prev) rec.l1_gap = (u - prev).l1_norm_scaled();
      out.rungs.push_back(rec);
      out.trail.push_back(fit.coefficient);

      prev = u;
      have_prev = true;
    }
    out.final_field = prev;
    return out;
  };

  // independent chains; results merged in fixed chain order either way
  ChainOutput outputs[2];
  if (spec.workers >= 2) {
    std::future<ChainOutput> handle =
        std::async(std::launch::async, [&] { return run_chain(chains[1]); });
    outputs[0] = run_chain(chains[0]);
    outputs[1] = handle.get();
  } else {
    outputs[0] = run_chain(chains[0]);
    outputs[1] = run_chain(chains[1]);
  }
  for (int i = 0; i < 2; ++i) {
    for (auto& r : outputs[i].rungs) result.rungs.push_back(r);
    result.fields.emplace(chains[i].name, outputs[i].final_field);
  }

  const auto& control = outputs[0].trail;
  const auto& super = outputs[1].trail;
  result.checks.push_back({"control_retains_coefficient", control.back() >= 0.9 * 2.0 * k,
                           control.back(), 0.9 * 2.0 * k, "finest-rung control fit"});
  bool nonincreasing = true;
  for (std::size_t i = 0; i + 1 < super.size(); ++i)
    if (super[i + 1] > super[i] + 1e-6) nonincreasing = false;
  result.checks.push_back({"supercritical_nonincreasing", nonincreasing,
                           super.back() - super.front(), 0.0, "coefficient trail"});
  result.checks.push_back({"supercritical_collapse", super.back() < 0.5 * 2.0 * k,
                           super.back(), 0.5 * 2.0 * k, "finest-rung supercritical fit"});
  return result;
}

}  // namespace asel
