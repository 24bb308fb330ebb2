// Acceptance suite: one test per criterion, each printing a single
// PASS/FAIL line with the measured values and its runtime budget.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "asel/config.hpp"
#include "asel/io.hpp"
#include "asel/ladder.hpp"

using namespace asel;

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int number, const std::string& name, bool pass, const std::string& detail,
            double elapsed, double budget) {
  std::printf("ACCEPTANCE %d %s: %s (%s; %.1f s of %.0f s budget)\n", number, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str(), elapsed, budget);
  std::fflush(stdout);
  EXPECT_TRUE(pass) << "criterion " << number << " (" << name << "): " << detail;
  EXPECT_LE(elapsed, budget) << "criterion " << number << " over budget";
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

// 1. Kernel self-test: Green symmetry exact to rounding, dipole_green matches
//    the y-difference-quotient oracle at O(delta^2), under 10 s at M = 129.
TEST(Acceptance, C1_KernelSelfTest) {
  Stopwatch watch;
  const KernelConfig cfg = KernelConfig::standard(2);
  bool pass = true;
  std::string detail;

  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> dist(-0.95, 0.95);
  double worst_sym = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec<2> x{dist(rng), dist(rng)}, y{dist(rng), dist(rng)};
    if (norm2<2>(x) >= 0.9 || norm2<2>(y) >= 0.9 || norm2<2>(sub<2>(x, y)) < 1e-6) continue;
    const double gxy = green_ball<2>(x, y, cfg);
    worst_sym = std::max(worst_sym,
                         std::abs(gxy - green_ball<2>(y, x, cfg)) / std::max(1.0, std::abs(gxy)));
  }
  pass = pass && worst_sym <= 1e-12;
  detail += "symmetry " + fmt2(worst_sym);

  double errs[3];
  int i = 0;
  for (double delta : {1e-2, 5e-3, 2.5e-3}) {
    std::mt19937 rng2(777);
    double worst = 0.0;
    for (int s = 0; s < 60; ++s) {
      Vec<2> x{dist(rng2), dist(rng2)};
      if (norm<2>(x) < 0.1 || norm<2>(x) > 0.9) continue;
      Vec<2> up{0.0, delta}, down{0.0, -delta};
      const double dq = (green_ball<2>(x, up, cfg) - green_ball<2>(x, down, cfg)) / (2 * delta);
      worst = std::max(worst, std::abs(dq - dipole_green<2>(x, cfg)));
    }
    errs[i++] = worst;
  }
  const bool order_ok = errs[1] < 0.35 * errs[0] && errs[2] < 0.35 * errs[1];
  pass = pass && order_ok;
  detail += "; dq errors " + fmt2(errs[0]) + "/" + fmt2(errs[1]) + "/" + fmt2(errs[2]);

  // grid-level check at M = 129: discrete harmonicity of the image formula
  const Grid<2> grid(129);
  ScalarField<2> gfield(grid);
  const Vec<2> y0{0.3, 0.2};
  gfield.assign([&](const Vec<2>& x) {
    return norm2<2>(sub<2>(x, y0)) < 1e-20 ? 0.0 : green_ball<2>(x, y0, cfg);
  });
  const ScalarField<2> lap = laplacian_apply(gfield);
  double worst_lap = 0.0;
  for (std::int64_t c = 0; c < grid.size(); ++c) {
    if (grid.type_of(c) != NodeType::Interior) continue;
    if (norm<2>(sub<2>(grid.coords_compact(c), y0)) < 0.2) continue;
    worst_lap = std::max(worst_lap, std::abs(lap[c]));
  }
  pass = pass && worst_lap < 0.05;
  detail += "; harmonic residual " + fmt2(worst_lap);

  report(1, "kernel_selftest", pass, detail, watch.seconds(), 10.0);
}

// 2. Manufactured-solution sup-norm order >= 1.8 across M in {65, 129, 257}.
TEST(Acceptance, C2_DiscretizationOrder) {
  Stopwatch watch;
  double errs[3];
  int idx = 0;
  for (int m : {65, 129, 257}) {
    const Grid<2> grid(m);
    ScalarField<2> f(grid), exact(grid);
    for (std::int64_t c = 0; c < grid.size(); ++c) {
      const Vec<2> x = grid.coords_compact(c);
      const double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
      const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
      const double r2 = norm2<2>(x);
      exact[c] = sx * sy * (1.0 - r2);
      f[c] = -(-kPi * kPi * sx * sy * (1.0 - r2) - 4.0 * kPi * x[0] * cx * sy - 2.0 * sx * sy) -
             (-kPi * kPi * sx * sy * (1.0 - r2) - 4.0 * kPi * x[1] * sx * cy - 2.0 * sx * sy);
    }
    auto [u, rep] = solve_linear<2>(f);
    errs[idx++] = (u - exact).max_abs();
  }
  const double o1 = std::log2(errs[0] / errs[1]);
  const double o2 = std::log2(errs[1] / errs[2]);
  const bool pass = o1 >= 1.8 && o2 >= 1.8;
  report(2, "discretization_order", pass,
         "orders " + fmt2(o1) + ", " + fmt2(o2) + "; finest err " + fmt2(errs[2]),
         watch.seconds(), 60.0);
}

// 3. Linear dipole recovery: g = 0, k = 1, t in {1/4, 1/8, 1/16}, M = 257:
//    fitted dipole coefficient within 5% of 2 at the finest rung.
TEST(Acceptance, C3_LinearDipoleRecovery) {
  Stopwatch watch;
  LadderSpec spec;
  spec.mode = LadderMode::Dipole;
  spec.grid_m = 257;
  spec.g = Nonlinearity::zero();
  spec.k_list = {1.0};
  spec.t_schedule = {0.25, 0.125, 0.0625};
  const LadderResult<2> result = run_dipole_ladder<2>(spec);
  const double coeff = result.rungs.back().coeff_dipole;
  const bool pass = result.all_pass() && std::abs(coeff - 2.0) <= 0.05 * 2.0;
  report(3, "linear_dipole_recovery", pass,
         "finest coefficient " + fmt2(coeff) + " vs 2 (window [" +
             fmt2(result.rungs.back().fit_window_lo) + ", " +
             fmt2(result.rungs.back().fit_window_hi) + "])",
         watch.seconds(), 120.0);
}

// 4. Subcritical nonlinear run (N = 2, p = 2, k = 1, j = 0): coefficient
//    within 10% of 2k, odd defect <= 10 tol_nl, barrier ordering node-wise,
//    distributional-identity residual <= 5% for the canonical test function.
TEST(Acceptance, C4_SubcriticalNonlinear) {
  Stopwatch watch;
  LadderSpec spec;
  spec.mode = LadderMode::Dipole;
  spec.grid_m = 257;
  spec.g = Nonlinearity::power(2.0);
  spec.k_list = {1.0};
  spec.t_schedule = {0.25, 0.125, 0.0625};
  const LadderResult<2> result = run_dipole_ladder<2>(spec);

  const RungRecord& finest = result.rungs.back();
  const bool coeff_ok = std::abs(finest.coeff_dipole - 2.0) <= 0.10 * 2.0;
  const bool odd_ok = finest.odd_defect_value <= 10.0 * finest.tol_nl;
  const bool checks_ok = result.all_pass();  // includes barrier + positivity

  // identity residual on the finest field with its own source parameters
  const ScalarField<2>& u = result.fields.at("k=1.000000");
  MeasureSource src;
  src.k = 1.0;
  src.t = finest.t;
  src.m = finest.m;
  const auto residuals = identity_residual<2>(u, spec.g, src);
  const double rel = residuals[0].residual / std::abs(residuals[0].target);
  const bool identity_ok = rel <= 0.05;

  // Cauchy gaps contract across the t halvings
  const double gap_ratio = result.rungs[1].l1_gap / result.rungs[2].l1_gap;
  const bool gaps_ok = gap_ratio >= 1.5;

  const bool pass = coeff_ok && odd_ok && checks_ok && identity_ok && gaps_ok;
  report(4, "subcritical_nonlinear", pass,
         "coefficient " + fmt2(finest.coeff_dipole) + " vs 2; odd defect " +
             fmt2(finest.odd_defect_value) + "; identity residual " + fmt2(100 * rel) +
             "%; gap ratio " + fmt2(gap_ratio),
         watch.seconds(), 600.0);
}

// 5. Combined source (k = 1, j = 1, N = 3, M = 97): sandwich node-wise,
//    equatorial Dirac coefficient within 15% of 1, polar dipole coefficient
//    within 15% of 2.
TEST(Acceptance, C5_CombinedSource) {
  Stopwatch watch;
  LadderSpec spec;
  spec.mode = LadderMode::Combined;
  spec.grid_m = 97;
  spec.g = Nonlinearity::power(1.4);
  spec.k_list = {1.0};
  spec.j = 1.0;
  spec.t_schedule = {0.25, 0.125};
  spec.dipole_window.hi = 0.42;
  spec.dirac_window.hi = 0.35;
  const LadderResult<3> result = run_combined_ladder<3>(spec);
  const RungRecord& finest = result.rungs.back();
  const bool sandwich_ok = result.all_pass();
  const bool dirac_ok = std::abs(finest.coeff_dirac - 1.0) <= 0.15;
  const bool dipole_ok = std::abs(finest.coeff_dipole - 2.0) <= 0.15 * 2.0;
  const bool pass = sandwich_ok && dirac_ok && dipole_ok;
  report(5, "combined_source", pass,
         "dipole " + fmt2(finest.coeff_dipole) + " vs 2; dirac " + fmt2(finest.coeff_dirac) +
             " vs 1; sandwich " + (sandwich_ok ? "holds" : "violated"),
         watch.seconds(), 900.0);
}

// 6. k-limit (N = 2, p = 2, k = 1..64): node-wise k-monotonicity, ray
//    exponent within 15% of 2/(p-1) = 2 at the largest k, angular shape
//    within 15% sup distance of the ODE oracle profile.
TEST(Acceptance, C6_KLimitExponent) {
  Stopwatch watch;
  LadderSpec spec;
  spec.mode = LadderMode::KLimit;
  spec.grid_m = 257;
  spec.g = Nonlinearity::power(2.0);
  spec.k_list = {1, 2, 4, 8, 16, 32, 64};
  spec.t_schedule = {0.0625};
  const LadderResult<2> result = run_k_limit<2>(spec);
  const double expo = result.rungs.back().exponent_fit;
  const bool expo_ok = std::abs(expo - 2.0) <= 0.15 * 2.0;
  double angular = 0.0;
  bool checks_ok = true;
  for (const auto& c : result.checks) {
    checks_ok = checks_ok && c.pass;
    if (c.name == "angular_match") angular = c.value;
  }
  const bool pass = expo_ok && checks_ok;
  report(6, "k_limit_exponent", pass,
         "exponent " + fmt2(expo) + " vs 2; angular sup distance " + fmt2(angular) +
             (checks_ok ? "; orderings hold" : "; ordering violation"),
         watch.seconds(), 1200.0);
}

// 7. Critical-exponent contrast (N = 2, k = 4, M = 513): the p = 2 control
//    retains >= 90% of 2k while the p = 3.5 coefficient trail is
//    nonincreasing and ends below 50% of 2k.
TEST(Acceptance, C7_CriticalExponentContrast) {
  Stopwatch watch;
  LadderSpec spec;
  spec.mode = LadderMode::SupercriticalContrast;
  spec.grid_m = 513;
  spec.g = Nonlinearity::power(2.0);
  spec.g_contrast = Nonlinearity::power(3.5);
  spec.k_list = {4.0};
  spec.t_schedule = {0.0625, 1.0 / 24.0, 0.03125};
  spec.dipole_window = FitWindow{0.07, 0.18, 2};
  spec.workers = 2;
  const LadderResult<2> result = run_supercritical_contrast<2>(spec);
  double control = 0.0, super_final = 0.0;
  for (const auto& r : result.rungs) {
    if (r.chain == "control") control = r.coeff_dipole;
    if (r.chain == "supercritical") super_final = r.coeff_dipole;
  }
  const bool pass = result.all_pass();
  report(7, "critical_exponent_contrast", pass,
         "control " + fmt2(control / 8.0) + " of 2k (>= 0.9); supercritical " +
             fmt2(super_final / 8.0) + " of 2k (< 0.5), nonincreasing",
         watch.seconds(), 900.0);
}

// 8. Weak norms of the dipole Green potential stable under refinement:
//    M^{N/(N-1)}(dx) and M^{(N+1)/(N-1)}(|x| dx) change < 10% from M = 129
//    to M = 257.
TEST(Acceptance, C8_WeakNorms) {
  Stopwatch watch;
  const KernelConfig cfg = KernelConfig::standard(2);
  double v1[2], v2[2];
  int i = 0;
  for (int m : {129, 257}) {
    const Grid<2> grid(m);
    ScalarField<2> u(grid);
    u.assign([&](const Vec<2>& x) {
      return norm2<2>(x) < 1e-24 ? 0.0 : dipole_green<2>(x, cfg);
    });
    v1[i] = weak_norm<2>(u, 2.0, WeakNormWeight::Lebesgue).value;
    v2[i] = weak_norm<2>(u, 3.0, WeakNormWeight::RadialFirstMoment).value;
    ++i;
  }
  const double rel1 = std::abs(v1[1] - v1[0]) / v1[1];
  const double rel2 = std::abs(v2[1] - v2[0]) / v2[1];
  const bool pass = rel1 < 0.10 && rel2 < 0.10;
  report(8, "weak_norms", pass,
         "M^2(dx) " + fmt2(v1[0]) + " -> " + fmt2(v1[1]) + " (" + fmt2(100 * rel1) +
             "%); M^3(|x|dx) " + fmt2(v2[0]) + " -> " + fmt2(v2[1]) + " (" + fmt2(100 * rel2) +
             "%)",
         watch.seconds(), 120.0);
}

// 9. Invariant suite: comparison ordering, truncation monotonicity,
//    double-start uniqueness, and byte-identical CSV outputs.
TEST(Acceptance, C9_InvariantSuite) {
  Stopwatch watch;
  const Grid<2> grid(129);
  MeasureSource src;
  src.k = 1.0;
  src.t = 0.25;
  src.m = 4;
  const ScalarField<2> f1 = dipole_field<2>(grid, src);
  src.k = 2.0;
  const ScalarField<2> f2 = dipole_field<2>(grid, src);
  const TruncatedNonlinearity gn = truncate(Nonlinearity::power(2.0), 256);
  const double slack = 10.0 * 1e-9 * f2.l2_norm();

  auto [u1, r1] = solve_semilinear<2>(f1, gn);
  auto [u2, r2] = solve_semilinear<2>(f2, gn);
  bool comparison_ok = r1.converged && r2.converged;
  for (std::int64_t c = 0; c < grid.size() && comparison_ok; ++c) {
    if (grid.coords_compact(c)[1] <= 0.0) continue;
    comparison_ok = u1[c] <= u2[c] + slack && u1[c] >= -slack;
  }

  auto [u_low, rl] = solve_semilinear<2>(f1, truncate(Nonlinearity::power(2.0), 4));
  bool truncation_ok = rl.converged;
  for (std::int64_t c = 0; c < grid.size() && truncation_ok; ++c) {
    if (grid.coords_compact(c)[1] <= 0.0) continue;
    truncation_ok = u_low[c] >= u1[c] - slack;
  }

  auto [green, rg] = solve_linear<2>(f1);
  auto [u1b, r1b] = solve_semilinear<2>(f1, gn, &green);
  const bool unique_ok = r1b.converged && (u1 - u1b).max_abs() <= 10.0 * 1e-9 * f1.l2_norm();

  // determinism: two identical ladder runs produce byte-identical CSV tables
  LadderSpec spec;
  spec.mode = LadderMode::Dipole;
  spec.grid_m = 129;
  spec.g = Nonlinearity::power(2.0);
  spec.t_schedule = {0.25};
  const auto dir = std::filesystem::temp_directory_path() / "asel_acceptance_c9";
  std::filesystem::create_directories(dir);
  write_rungs_csv(run_dipole_ladder<2>(spec).rungs, (dir / "a.csv").string());
  write_rungs_csv(run_dipole_ladder<2>(spec).rungs, (dir / "b.csv").string());
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const bool deterministic = slurp(dir / "a.csv") == slurp(dir / "b.csv");
  std::filesystem::remove_all(dir);

  const bool pass = comparison_ok && truncation_ok && unique_ok && deterministic;
  report(9, "invariant_suite", pass,
         std::string("comparison ") + (comparison_ok ? "ok" : "VIOLATED") + "; truncation " +
             (truncation_ok ? "ok" : "VIOLATED") + "; double-start " +
             (unique_ok ? "ok" : "VIOLATED") + "; determinism " +
             (deterministic ? "ok" : "VIOLATED"),
         watch.seconds(), 600.0);
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
