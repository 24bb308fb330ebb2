#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "asel/field.hpp"
#include "asel/nonlinearity.hpp"

namespace asel {

struct SolverOptions {
  double tol_linear_rel = 1e-10;
  double tol_nonlinear_rel = 1e-9;   // tol_nl = tol_nonlinear_rel * ||f||
  int max_cg_iterations = 10000;
  int max_newton_iterations = 60;
  bool monotone_fallback = false;    // Picard iteration with Lipschitz shift
};

struct SolveReport {
  int iterations = 0;                    // Newton (or Picard) steps; 0 for pure linear
  std::vector<double> residual_history;  // discrete l2 of -Lap_h u + g_n(u) - f
  bool converged = false;
  std::vector<int> linear_solver_stats;  // inner CG iteration counts
  std::string method = "cg";
};

/// -Lap_h with the unequal-arm (Shortley-Weller type) stencil in symmetric
/// flux form: each arm contributes (u_C - u_nb)/(h a), with u = 0 at the arm
/// foot on the sphere.  The matrix is symmetric positive definite and an
/// M-matrix, and commutes with the x_N reflection on this node set.
template <int N>
void laplacian_apply(const ScalarField<N>& u, ScalarField<N>& out) {
  const Grid<N>& g = u.grid();
  const double h = g.h();
  const std::int64_t n = g.size();
  for (std::int64_t c = 0; c < n; ++c) {
    double acc = 0.0;
    for (int a = 0; a < N; ++a) {
      for (int s = -1; s <= 1; s += 2) {
        const double arm = g.arm(c, a, s);
        const std::int64_t nb = g.neighbor(c, a, s);
        const double unb = (nb >= 0) ? u[nb] : 0.0;
        acc += (u[c] - unb) / (h * arm);
      }
    }
    out[c] = acc;
  }
}

template <int N>
ScalarField<N> laplacian_apply(const ScalarField<N>& u) {
  ScalarField<N> out(u.grid());
  laplacian_apply(u, out);
  return out;
}

namespace detail {

inline double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Jacobi-preconditioned CG for (-Lap_h + diag(d)) u = rhs.
/// Returns iterations used, or -1 on failure to reach tol.
template <int N>
int cg_solve(const Grid<N>& g, const std::vector<double>* d, const std::vector<double>& rhs,
             std::vector<double>& u, double tol_abs, int max_iter) {
  const std::int64_t n = g.size();
  const double h = g.h();
  std::vector<double> diag(n, 0.0);
  for (std::int64_t c = 0; c < n; ++c) {
    double acc = 0.0;
    for (int a = 0; a < N; ++a)
      for (int s = -1; s <= 1; s += 2) acc += 1.0 / (h * g.arm(c, a, s));
    diag[c] = acc + (d ? (*d)[c] : 0.0);
  }

  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::int64_t c = 0; c < n; ++c) {
      double acc = diag[c] * x[c];
      for (int a = 0; a < N; ++a) {
        for (int s = -1; s <= 1; s += 2) {
          const std::int64_t nb = g.neighbor(c, a, s);
          if (nb >= 0) acc -= x[nb] / (h * g.arm(c, a, s));
        }
      }
      y[c] = acc;
    }
  };

  std::vector<double> r(n), z(n), p(n), q(n);
  apply(u, q);
  for (std::int64_t c = 0; c < n; ++c) r[c] = rhs[c] - q[c];
  double rn2 = dot_v(r, r);
  if (std::sqrt(rn2) <= tol_abs) return 0;
  for (std::int64_t c = 0; c < n; ++c) z[c] = r[c] / diag[c];
  p = z;
  double rz = dot_v(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, q);
    const double alpha = rz / dot_v(p, q);
    for (std::int64_t c = 0; c < n; ++c) {
      u[c] += alpha * p[c];
      r[c] -= alpha * q[c];
    }
    rn2 = dot_v(r, r);
    if (std::sqrt(rn2) <= tol_abs) return it;
    for (std::int64_t c = 0; c < n; ++c) z[c] = r[c] / diag[c];
    const double rz_new = dot_v(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::int64_t c = 0; c < n; ++c) p[c] = z[c] + beta * p[c];
  }
  return -1;
}

}  // namespace detail

/// Solves -Lap_h u = f, u = 0 on the sphere, by preconditioned CG.
template <int N>
std::pair<ScalarField<N>, SolveReport> solve_linear(const ScalarField<N>& f,
                                                    const SolverOptions& opt = {}) {
  const Grid<N>& g = f.grid();
  ScalarField<N> u(g);
  SolveReport rep;
  const double fn = f.l2_norm();
  if (fn == 0.0) {
    rep.converged = true;
    return {u, rep};
  }
  const int its = detail::cg_solve<N>(g, nullptr, f.values(), u.values(),
                                      opt.tol_linear_rel * fn, opt.max_cg_iterations);
  rep.converged = its >= 0;
  rep.linear_solver_stats.push_back(its >= 0 ? its : opt.max_cg_iterations);
  if (!rep.converged) throw std::runtime_error("solve_linear: CG did not converge");
  ScalarField<N> res = laplacian_apply(u);
  rep.residual_history.push_back((res - f).l2_norm());
  return {u, rep};
}

/// Damped Newton for -Lap_h u + g_n(u) = f with J = -Lap_h + diag(g_n'(u))
/// (SPD since g_n' >= 0) and Armijo backtracking on the residual norm.
/// With monotone_fallback the Jacobian is replaced by -Lap_h + L I, where L
/// bounds g_n' over the current iterate range (Picard with Lipschitz shift).
template <int N>
std::pair<ScalarField<N>, SolveReport> solve_semilinear(const ScalarField<N>& f,
                                                        const TruncatedNonlinearity& gn,
                                                        const ScalarField<N>* warm_start = nullptr,
                                                        const SolverOptions& opt = {}) {
  const Grid<N>& g = f.grid();
  const std::int64_t n = g.size();
  SolveReport rep;
  rep.method = opt.monotone_fallback ? "monotone" : "newton";

  const double fn = f.l2_norm();
  ScalarField<N> u(g);
  if (fn == 0.0) {
    rep.converged = true;
    return {u, rep};
  }
  if (warm_start) u = *warm_start;
  const double tol = opt.tol_nonlinear_rel * fn;

  std::vector<double> res(n), gdiag(n), delta(n);
  auto residual = [&](const ScalarField<N>& v, std::vector<double>& out) {
    ScalarField<N> lap = laplacian_apply(v);
    double s = 0.0;
    for (std::int64_t c = 0; c < n; ++c) {
      out[c] = lap[c] + gn(v[c]) - f[c];
      s += out[c] * out[c];
    }
    return std::sqrt(s);
  };

  double rn = residual(u, res);
  rep.residual_history.push_back(rn);
  for (int it = 0; it < opt.max_newton_iterations; ++it) {
    if (rn <= tol) {
      rep.converged = true;
      rep.iterations = it;
      return {u, rep};
    }
    if (opt.monotone_fallback) {
      double lip = 0.0;
      for (std::int64_t c = 0; c < n; ++c) lip = std::max(lip, gn.derivative(u[c]));
      for (std::int64_t c = 0; c < n; ++c) gdiag[c] = lip;
    } else {
      for (std::int64_t c = 0; c < n; ++c) gdiag[c] = gn.derivative(u[c]);
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    std::vector<double> neg(n);
    for (std::int64_t c = 0; c < n; ++c) neg[c] = -res[c];
    // inexact inner tolerance, tightened as the outer residual falls
    const double inner_tol = std::max(1e-12 * fn, std::min(1e-2 * rn, 0.1 * tol));
    const int cg_its =
        detail::cg_solve<N>(g, &gdiag, neg, delta, inner_tol, opt.max_cg_iterations);
    if (cg_its < 0) throw std::runtime_error("solve_semilinear: Jacobian CG failed");
    rep.linear_solver_stats.push_back(cg_its);

    double lambda = 1.0;
    ScalarField<N> trial(g);
    double rn_trial = rn;
    std::vector<double> res_trial(n);
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      for (std::int64_t c = 0; c < n; ++c) trial[c] = u[c] + lambda * delta[c];
      rn_trial = residual(trial, res_trial);
      if (rn_trial <= (1.0 - 0.25 * lambda) * rn) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted && rn_trial >= rn) {
      rep.iterations = it + 1;
      rep.converged = false;
      return {u, rep};  // stagnation: report non-converged with trace
    }
    u = trial;
    res.swap(res_trial);
    rn = rn_trial;
    rep.residual_history.push_back(rn);
  }
  rep.iterations = opt.max_newton_iterations;
  rep.converged = rn <= tol;
  return {u, rep};
}

}  // namespace asel
