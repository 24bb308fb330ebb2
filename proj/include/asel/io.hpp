#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "asel/field.hpp"
#include "asel/ladder.hpp"

namespace asel {

/// Deterministic number formatting shared by every CSV and table writer.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Node dump in compact (lexicographic) node order: index, coords, value.
template <int N>
void write_field_csv(const ScalarField<N>& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
  out << "node";
  for (int a = 0; a < N; ++a) out << ",x" << a;
  out << ",value\n";
  const Grid<N>& g = u.grid();
  for (std::int64_t c = 0; c < g.size(); ++c) {
    const Vec<N> x = g.coords_compact(c);
    out << c;
    for (int a = 0; a < N; ++a) out << ',' << fmt(x[a]);
    out << ',' << fmt(u[c]) << '\n';
  }
}

/// Raw dump: 16-byte header (magic "ASLF", u32 dim, u32 M, u32 node count),
/// then the node values as little-endian doubles in compact order.
template <int N>
void write_field_binary(const ScalarField<N>& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field_binary: cannot open " + path);
  const char magic[4] = {'A', 'S', 'L', 'F'};
  const std::uint32_t dim = N;
  const std::uint32_t m = static_cast<std::uint32_t>(u.grid().nodes_per_axis());
  const std::uint32_t count = static_cast<std::uint32_t>(u.size());
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(&m), 4);
  out.write(reinterpret_cast<const char*>(&count), 4);
  out.write(reinterpret_cast<const char*>(u.values().data()),
            static_cast<std::streamsize>(sizeof(double) * u.values().size()));
}

inline nlohmann::json to_json(const SolveReport& rep) {
  return {{"iterations", rep.iterations},
          {"converged", rep.converged},
          {"method", rep.method},
          {"residual_history", rep.residual_history},
          {"linear_solver_stats", rep.linear_solver_stats}};
}

inline nlohmann::json to_json(const RungRecord& r) {
  return {{"chain", r.chain},
          {"k", r.k},
          {"j", r.j},
          {"t", r.t},
          {"m", r.m},
          {"n", r.n},
          {"grid_m", r.grid_m},
          {"residual", r.residual},
          {"newton_iterations", r.newton_iterations},
          {"converged", r.converged},
          {"tol_nl", r.tol_nl},
          {"l1_gap", r.l1_gap},
          {"coeff_dipole", r.coeff_dipole},
          {"coeff_dirac", r.coeff_dirac},
          {"exponent_fit", r.exponent_fit},
          {"fit_window", {r.fit_window_lo, r.fit_window_hi}},
          {"odd_defect", r.odd_defect_value},
          {"max_abs", r.max_abs}};
}

inline nlohmann::json to_json(const CheckRecord& c) {
  return {{"name", c.name},
          {"pass", c.pass},
          {"value", c.value},
          {"bound", c.bound},
          {"detail", c.detail}};
}

/// Convergence table, one row per rung.
inline void write_rungs_csv(const std::vector<RungRecord>& rungs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_rungs_csv: cannot open " + path);
  out << "chain,k,j,n,t,m,M,residual,L1_gap,coeff_dipole,coeff_dirac,exponent_fit,"
         "odd_defect,max_abs,fit_lo,fit_hi\n";
  for (const RungRecord& r : rungs) {
    out << r.chain << ',' << fmt(r.k) << ',' << fmt(r.j) << ',' << r.n << ',' << fmt(r.t)
        << ',' << r.m << ',' << r.grid_m << ',' << fmt(r.residual) << ',' << fmt(r.l1_gap)
        << ',' << fmt(r.coeff_dipole) << ',' << fmt(r.coeff_dirac) << ','
        << fmt(r.exponent_fit) << ',' << fmt(r.odd_defect_value) << ',' << fmt(r.max_abs)
        << ',' << fmt(r.fit_window_lo) << ',' << fmt(r.fit_window_hi) << '\n';
  }
}

inline void write_checks_csv(const std::vector<CheckRecord>& checks, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_checks_csv: cannot open " + path);
  out << "name,pass,value,bound,detail\n";
  for (const CheckRecord& c : checks)
    out << '"' << c.name << "\"," << (c.pass ? 1 : 0) << ',' << fmt(c.value) << ','
        << fmt(c.bound) << ",\"" << c.detail << "\"\n";
}

/// Two-column table of the angular profile for plotting.
inline void write_angular_csv(const AngularProfile& prof, const std::string& path,
                              int stride = 50) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_angular_csv: cannot open " + path);
  out << "theta,omega\n";
  for (std::size_t i = 0; i < prof.theta.size(); i += stride)
    out << fmt(prof.theta[i]) << ',' << fmt(prof.omega[i]) << '\n';
  out << fmt(prof.theta.back()) << ',' << fmt(prof.omega.back()) << '\n';
}

}  // namespace asel
