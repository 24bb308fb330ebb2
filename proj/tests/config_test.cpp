#include <gtest/gtest.h>

#include "asel/config.hpp"

using namespace asel;

TEST(Config, ParsesFlatKeyValue) {
  const ExperimentConfig cfg = ExperimentConfig::parse(
      "# comment line\n"
      "mode = dipole\n"
      "dimension = 2\n"
      "grid_m = 257   # trailing comment\n"
      "nonlinearity = power:2.0\n"
      "k_list = 1,2,4\n"
      "t_schedule = 0.25, 0.125\n");
  EXPECT_EQ(cfg.mode(), "dipole");
  EXPECT_EQ(cfg.dimension(), 2);
  EXPECT_EQ(cfg.get_long("grid_m", 0), 257);
  const LadderSpec spec = cfg.ladder_spec();
  EXPECT_EQ(spec.k_list.size(), 3u);
  EXPECT_EQ(spec.t_schedule.size(), 2u);
  EXPECT_EQ(spec.g.kind(), Nonlinearity::Kind::Power);
}

TEST(Config, UnknownKeyIsHardError) {
  EXPECT_THROW(ExperimentConfig::parse("mode = dipole\nbogus_key = 1\n"), ConfigError);
}

TEST(Config, DuplicateAndMalformed) {
  EXPECT_THROW(ExperimentConfig::parse("mode = dipole\nmode = combined\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("mode dipole\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("mode = dipole\ngrid_m = 1.5\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("mode = dipole\ngrid_m = 256\n"), ConfigError);
}

TEST(Config, SupercriticalDipoleRejected) {
  // p = 3 at N = 2 sits exactly at the critical exponent (N+1)/(N-1)
  try {
    ExperimentConfig::parse("mode = dipole\nnonlinearity = power:3.0\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("critical"), std::string::npos);
  }
  // explicit opt-out allows it (contrast-style experiments)
  EXPECT_NO_THROW(ExperimentConfig::parse(
      "mode = dipole\nnonlinearity = power:3.0\nassert_subcritical = false\n"));
}

TEST(Config, ModeParameterValidation) {
  EXPECT_THROW(ExperimentConfig::parse("mode = combined\nj = 0\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("mode = dipole\nj = 1\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("mode = teleport\n"), ConfigError);
  EXPECT_NO_THROW(ExperimentConfig::parse("mode = combined\nj = 1\nnonlinearity = power:1.4\n"));
}

TEST(Config, EnvToleranceOverride) {
  setenv("ASEL_TOL_NONLINEAR", "1e-7", 1);
  const ExperimentConfig cfg = ExperimentConfig::parse("mode = dipole\n");
  EXPECT_NEAR(cfg.ladder_spec().solver.tol_nonlinear_rel, 1e-7, 1e-20);
  unsetenv("ASEL_TOL_NONLINEAR");
  EXPECT_NEAR(cfg.ladder_spec().solver.tol_nonlinear_rel, 1e-9, 1e-22);
}
