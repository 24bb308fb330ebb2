// Batch front-end: runs experiment configs, writes manifests and tables,
// prints summaries.  Exit codes: 0 ok, 2 config error, 3 solver failure,
// 4 assertion failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "asel/config.hpp"
#include "asel/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAssert = 4;

struct RunArtifacts {
  json manifest;
  bool all_pass = true;
};

/// Deterministic LCG so the kernel self-test point set is reproducible.
struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  double next_unit() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
};

template <int N>
asel::Vec<N> random_in_ball(SplitMix& rng, double rmax = 0.95) {
  for (;;) {
    asel::Vec<N> x{};
    for (int a = 0; a < N; ++a) x[a] = 2.0 * rng.next_unit() - 1.0;
    if (asel::norm2<N>(x) < rmax * rmax && asel::norm2<N>(x) > 1e-4) return x;
  }
}

template <int N>
json kernels_selftest(const asel::ExperimentConfig& cfg) {
  using namespace asel;
  const KernelConfig kc = KernelConfig::standard(N);
  json checks = json::array();
  auto record = [&](const std::string& name, bool pass, double value, double bound) {
    checks.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"bound", bound}});
  };

  // Green function symmetry and boundary vanishing
  SplitMix rng(20240811ull);
  double worst_sym = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec<N> x = random_in_ball<N>(rng);
    Vec<N> y = random_in_ball<N>(rng);
    if (norm2<N>(sub<N>(x, y)) < 1e-6) y[0] = -y[0];
    const double gxy = green_ball<N>(x, y, kc);
    const double gyx = green_ball<N>(y, x, kc);
    worst_sym = std::max(worst_sym, std::abs(gxy - gyx) / std::max(1.0, std::abs(gxy)));
  }
  record("green_symmetry_100_pairs_seed20240811", worst_sym <= 1e-12, worst_sym, 1e-12);

  double worst_bdry = 0.0;
  for (int i = 0; i < 50; ++i) {
    Vec<N> e{};
    double s2 = 0.0;
    for (int a = 0; a < N; ++a) {
      e[a] = 2.0 * rng.next_unit() - 1.0;
      s2 += e[a] * e[a];
    }
    const double inv = 1.0 / std::sqrt(s2);
    for (int a = 0; a < N; ++a) e[a] *= inv;
    const Vec<N> y = random_in_ball<N>(rng);
    worst_bdry = std::max(worst_bdry, std::abs(green_ball<N>(e, y, kc)));
    worst_bdry = std::max(worst_bdry, std::abs(dipole_green<N>(e, kc)));
  }
  record("boundary_vanishing_on_sphere", worst_bdry <= 1e-12, worst_bdry, 1e-12);

  // dipole_green vs the centered difference quotient of green_ball in y_N
  double prev_err = 0.0;
  bool dq_order_ok = true;
  json dq = json::array();
  for (double delta : {1e-2, 5e-3, 2.5e-3}) {
    double worst = 0.0;
    SplitMix rng2(777ull);
    for (int i = 0; i < 40; ++i) {
      const Vec<N> x = random_in_ball<N>(rng2);
      if (norm<N>(x) < 0.1) continue;  // fixed point set across deltas
      Vec<N> up{}, down{};
      up[N - 1] = delta;
      down[N - 1] = -delta;
      const double dq_val =
          (green_ball<N>(x, up, kc) - green_ball<N>(x, down, kc)) / (2.0 * delta);
      worst = std::max(worst, std::abs(dq_val - dipole_green<N>(x, kc)));
    }
    dq.push_back({{"delta", delta}, {"max_error", worst}});
    if (prev_err > 0.0 && worst > 0.35 * prev_err) dq_order_ok = false;  // expect ~x4 drop
    prev_err = worst;
  }
  record("dipole_green_difference_quotient_O(delta^2)", dq_order_ok, prev_err, 0.0);

  // discrete harmonicity of the closed-form kernels away from the origin
  json harmonic = json::array();
  for (int pass = 0; pass < 2; ++pass) {
    const bool dip = pass == 1;
    double res_coarse = 0.0, res_fine = 0.0;
    for (int gi = 0; gi < 2; ++gi) {
      const int m = gi == 0 ? 65 : 129;
      const Grid<N> grid(m);
      ScalarField<N> u(grid);
      u.assign([&](const Vec<N>& x) {
        const double r = norm<N>(x);
        if (r < 1e-12) return 0.0;
        return dip ? dipole_kernel<N>(x, kc) : gamma_kernel<N>(x, kc);
      });
      const ScalarField<N> lap = laplacian_apply(u);
      double worst = 0.0;
      for (std::int64_t c = 0; c < grid.size(); ++c) {
        const double r = norm<N>(grid.coords_compact(c));
        if (r < 0.4 || r > 0.7) continue;  // annulus away from origin and rim
        if (grid.type_of(c) != NodeType::Interior) continue;
        worst = std::max(worst, std::abs(lap[c]));
      }
      (gi == 0 ? res_coarse : res_fine) = worst;
    }
    harmonic.push_back({{"kernel", dip ? "dipole" : "gamma"},
                        {"residual_M65", res_coarse},
                        {"residual_M129", res_fine}});
    record(std::string("harmonic_O(h^2)_") + (dip ? "dipole" : "gamma"),
           res_fine <= 0.35 * res_coarse, res_fine / res_coarse, 0.35);
  }

  // weak norms of the dipole Green potential under refinement
  if (N == 2) {
    const double kap1 = double(N) / (N - 1), kap2 = double(N + 1) / (N - 1);
    double v1[2], v2[2];
    for (int gi = 0; gi < 2; ++gi) {
      const Grid<N> grid(gi == 0 ? 129 : 257);
      ScalarField<N> u(grid);
      u.assign([&](const Vec<N>& x) {
        return norm2<N>(x) < 1e-24 ? 0.0 : dipole_green<N>(x, kc);
      });
      v1[gi] = weak_norm<N>(u, kap1, WeakNormWeight::Lebesgue).value;
      v2[gi] = weak_norm<N>(u, kap2, WeakNormWeight::RadialFirstMoment).value;
    }
    record("weak_norm_M^{N/(N-1)}_refinement", std::abs(v1[1] - v1[0]) <= 0.1 * v1[1],
           std::abs(v1[1] - v1[0]) / v1[1], 0.1);
    record("weak_norm_M^{(N+1)/(N-1)}_refinement", std::abs(v2[1] - v2[0]) <= 0.1 * v2[1],
           std::abs(v2[1] - v2[0]) / v2[1], 0.1);
  }

  json out;
  out["mode"] = "kernels_selftest";
  out["checks"] = checks;
  out["difference_quotient"] = dq;
  out["harmonicity"] = harmonic;
  (void)cfg;
  return out;
}

template <int N>
RunArtifacts run_mode(const asel::ExperimentConfig& cfg, const fs::path& outdir, bool strict,
                      int workers) {
  using namespace asel;
  RunArtifacts art;
  const std::string mode = cfg.mode();
  json manifest;
  manifest["mode"] = mode;
  manifest["dimension"] = N;
  {
    json echo;
    for (const auto& [k, v] : cfg.entries()) echo[k] = v;
    manifest["config"] = echo;
  }
  const KernelConfig kc = KernelConfig::standard(N);
  manifest["kernel_normalization"] = {{"gamma_norm", kc.gamma_norm},
                                      {"dipole_norm", kc.dipole_norm}};

  if (mode == "kernels_selftest") {
    const json self = kernels_selftest<N>(cfg);
    manifest["checks"] = self["checks"];
    manifest["selftest"] = self;
    for (const auto& c : self["checks"]) art.all_pass = art.all_pass && c["pass"].get<bool>();
    art.manifest = manifest;
    return art;
  }

  LadderSpec spec = cfg.ladder_spec();
  spec.workers = workers;
  LadderResult<N> result;
  if (spec.mode == LadderMode::Dipole) {
    result = run_dipole_ladder<N>(spec);
  } else if (spec.mode == LadderMode::Combined) {
    result = run_combined_ladder<N>(spec);
  } else if (spec.mode == LadderMode::KLimit) {
    if constexpr (N == 2) {
      result = run_k_limit<N>(spec);
    } else {
      throw ConfigError("k_limit mode runs the N = 2 angular oracle only");
    }
  } else {
    result = run_supercritical_contrast<N>(spec);
  }

  write_rungs_csv(result.rungs, (outdir / "rungs.csv").string());
  write_checks_csv(result.checks, (outdir / "checks.csv").string());
  json rungs = json::array();
  for (const auto& r : result.rungs) rungs.push_back(to_json(r));
  json checks = json::array();
  for (const auto& c : result.checks) checks.push_back(to_json(c));
  manifest["rungs"] = rungs;
  manifest["checks"] = checks;
  manifest["tables"] = {{"rungs", "rungs.csv"}, {"checks", "checks.csv"}};

  const std::string dump = cfg.get_string("write_fields", "csv");
  json fields = json::object();
  for (const auto& [name, field] : result.fields) {
    if (dump == "none") break;
    std::string fname = "field_" + name;
    for (char& ch : fname)
      if (ch == '=' || ch == ' ') ch = '_';
    if (dump == "binary") {
      fname += ".bin";
      write_field_binary<N>(field, (outdir / fname).string());
    } else {
      fname += ".csv";
      write_field_csv<N>(field, (outdir / fname).string());
    }
    fields[name] = fname;
  }
  manifest["fields"] = fields;

  if (spec.mode == LadderMode::KLimit && N == 2) {
    const AngularProfile prof = angular_profile_oracle(spec.g.exponent());
    write_angular_csv(prof, (outdir / "angular_profile.csv").string());
    manifest["tables"]["angular_profile"] = "angular_profile.csv";
  }

  art.all_pass = result.all_pass();
  (void)strict;
  art.manifest = manifest;
  return art;
}

int do_run(const std::string& config_path, std::string output_dir, bool strict, int workers) {
  asel::ExperimentConfig cfg;
  try {
    cfg = asel::ExperimentConfig::parse_file(config_path);
  } catch (const asel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (output_dir.empty()) output_dir = cfg.get_string("output_dir", "out");
  if (workers <= 0) workers = static_cast<int>(cfg.get_long("workers", 1));
  const bool assertions = strict || cfg.get_bool("assertions", true);

  fs::create_directories(output_dir);
  RunArtifacts art;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (cfg.dimension() == 2)
      art = run_mode<2>(cfg, output_dir, strict, workers);
    else
      art = run_mode<3>(cfg, output_dir, strict, workers);
  } catch (const asel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  art.manifest["elapsed_seconds"] = elapsed;
  art.manifest["assertions_enabled"] = assertions;

  std::ofstream mf(fs::path(output_dir) / "manifest.json");
  mf << art.manifest.dump(2) << "\n";
  mf.close();

  int failures = 0;
  for (const auto& c : art.manifest["checks"]) {
    if (!c["pass"].get<bool>()) {
      ++failures;
      std::cout << "FAIL " << c["name"].get<std::string>() << " value="
                << c["value"].get<double>() << " bound=" << c["bound"].get<double>() << "\n";
    }
  }
  std::cout << "wrote " << (fs::path(output_dir) / "manifest.json").string() << " ("
            << art.manifest["checks"].size() << " checks, " << failures << " failing, "
            << asel::fmt(elapsed) << " s)\n";
  if (assertions && failures > 0) return kExitAssert;
  return kExitOk;
}

int do_report(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    std::cerr << "report: cannot read " << manifest_path << "\n";
    return 1;
  }
  json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    std::cerr << "report: invalid manifest: " << e.what() << "\n";
    return 1;
  }
  if (!manifest.contains("mode") || !manifest.contains("checks")) {
    std::cerr << "report: manifest is missing required sections\n";
    return 1;
  }
  const std::string mode = manifest["mode"].get<std::string>();
  std::cout << "mode: " << mode << "  dimension: " << manifest.value("dimension", 0) << "\n";
  if (manifest.contains("kernel_normalization"))
    std::cout << "kernel normalization: c_N=" << manifest["kernel_normalization"]["gamma_norm"]
              << "  c~_N=" << manifest["kernel_normalization"]["dipole_norm"] << "\n";

  if (manifest.contains("rungs") && !manifest["rungs"].empty()) {
    std::cout << "\n  chain            k      j        t      n     coeff_dipole  coeff_dirac"
                 "  exponent   L1_gap\n";
    for (const auto& r : manifest["rungs"]) {
      char buf[200];
      std::snprintf(buf, sizeof(buf), "  %-14s %5.3g %6.3g %8.5f %6ld %12.5f %12.5f %9.4f %9.3g",
                    r["chain"].get<std::string>().c_str(), r["k"].get<double>(),
                    r["j"].get<double>(), r["t"].get<double>(), r["n"].get<long>(),
                    r["coeff_dipole"].get<double>(), r["coeff_dirac"].get<double>(),
                    r["exponent_fit"].get<double>(), r["l1_gap"].get<double>());
      std::cout << buf << "\n";
    }
    std::cout << "\n  theoretical targets: dipole coefficient 2k; Dirac coefficient j; "
                 "k-limit exponent 2/(p-1)\n";
  }

  // verify referenced artifacts exist
  const fs::path base = fs::path(manifest_path).parent_path();
  bool missing = false;
  if (manifest.contains("fields"))
    for (const auto& [name, file] : manifest["fields"].items())
      if (!fs::exists(base / file.get<std::string>())) {
        std::cerr << "report: missing artifact " << file.get<std::string>() << "\n";
        missing = true;
      }

  int failures = 0;
  std::cout << "\n";
  for (const auto& c : manifest["checks"]) {
    const bool pass = c["pass"].get<bool>();
    if (!pass) ++failures;
    std::cout << (pass ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "\n";
  }
  std::cout << failures << " of " << manifest["checks"].size() << " checks failing\n";
  return (failures > 0 || missing) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic singular solutions of -Lap u + g(u) = measure on the unit ball"};
  app.require_subcommand(1);

  std::string config_path, output_dir, manifest_path;
  bool strict = false;
  int workers = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "flat key=value config file")->required();
  run->add_option("--output-dir", output_dir, "output directory (overrides config)");
  run->add_flag("--strict", strict, "enable every assertion toggle");
  run->add_option("--workers", workers, "parallel independent chains (overrides config)");

  CLI::App* report = app.add_subcommand("report", "summarize a run manifest");
  report->add_option("manifest", manifest_path, "manifest.json from a run")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return do_run(config_path, output_dir, strict, workers);
  return do_report(manifest_path);
}
