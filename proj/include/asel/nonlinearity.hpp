#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "asel/geometry.hpp"

namespace asel {

/// Odd nondecreasing absorption term g with pointwise derivative.
class Nonlinearity {
 public:
  enum class Kind { Zero, Power, Custom };

  Nonlinearity() = default;

  static Nonlinearity zero() {
    Nonlinearity g;
    g.kind_ = Kind::Zero;
    return g;
  }

  /// g(s) = |s|^{p-1} s, p > 0.
  static Nonlinearity power(double p) {
    detail::require(p > 0.0, "Nonlinearity::power: exponent must be positive");
    Nonlinearity g;
    g.kind_ = Kind::Power;
    g.p_ = p;
    return g;
  }

  static Nonlinearity custom(std::function<double(double)> f, std::function<double(double)> df) {
    Nonlinearity g;
    g.kind_ = Kind::Custom;
    g.eval_ = std::move(f);
    g.deriv_ = std::move(df);
    return g;
  }

  /// Config strings: "zero", "power:<p>".
  static Nonlinearity parse(const std::string& s) {
    if (s == "zero" || s == "none") return zero();
    const std::string prefix = "power:";
    if (s.rfind(prefix, 0) == 0) return power(std::stod(s.substr(prefix.size())));
    throw std::invalid_argument("Nonlinearity::parse: unknown spec '" + s + "'");
  }

  double operator()(double s) const {
    switch (kind_) {
      case Kind::Zero: return 0.0;
      case Kind::Power: return std::copysign(std::pow(std::abs(s), p_), s);
      case Kind::Custom: return eval_(s);
    }
    return 0.0;
  }

  double derivative(double s) const {
    switch (kind_) {
      case Kind::Zero: return 0.0;
      case Kind::Power: return p_ * std::pow(std::abs(s), p_ - 1.0);
      case Kind::Custom: return deriv_(s);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  double exponent() const {
    detail::require(kind_ == Kind::Power, "Nonlinearity: exponent only defined for power kind");
    return p_;
  }
  bool odd() const { return odd_; }
  bool nondecreasing() const { return nondecreasing_; }

  std::string describe() const {
    if (kind_ == Kind::Zero) return "zero";
    if (kind_ == Kind::Power) return "power:" + std::to_string(p_);
    return "custom";
  }

 private:
  Kind kind_ = Kind::Zero;
  double p_ = 1.0;
  bool odd_ = true;
  bool nondecreasing_ = true;
  std::function<double(double)> eval_;
  std::function<double(double)> deriv_;
};

/// C1 soft cap of g at level n:
///   g_n(s) = sign(s) q_n(g(|s|)),  q_n(v) = v for v <= n-1,
///                                  q_n(v) = n - exp(-(v-n+1)) otherwise.
/// q_n matches value and slope at v = n-1, so g_n stays C1 wherever g is;
/// sup g_n = n and g_n <= g_{n+1} <= g on s >= 0.
class TruncatedNonlinearity {
 public:
  TruncatedNonlinearity() = default;

  TruncatedNonlinearity(Nonlinearity base, long level) : base_(std::move(base)), level_(level) {
    detail::require(level >= 1, "truncate: level must be >= 1");
  }

  double operator()(double s) const {
    if (base_.kind() == Nonlinearity::Kind::Zero) return 0.0;
    const double v = base_(std::abs(s));
    return std::copysign(cap(v), s);
  }

  double derivative(double s) const {
    if (base_.kind() == Nonlinearity::Kind::Zero) return 0.0;
    const double v = base_(std::abs(s));
    return cap_slope(v) * base_.derivative(std::abs(s));
  }

  const Nonlinearity& base() const { return base_; }
  long level() const { return level_; }

  /// True when the cap never engages for |g| <= bound (i.e. g_n == g there).
  bool inactive_for(double bound) const { return bound <= static_cast<double>(level_) - 1.0; }

 private:
  double cap(double v) const {
    const double n = static_cast<double>(level_);
    if (v <= n - 1.0) return v;
    return n - std::exp(-(v - n + 1.0));
  }
  double cap_slope(double v) const {
    const double n = static_cast<double>(level_);
    if (v <= n - 1.0) return 1.0;
    return std::exp(-(v - n + 1.0));
  }

  Nonlinearity base_ = Nonlinearity::zero();
  long level_ = 1;
};

inline TruncatedNonlinearity truncate(const Nonlinearity& g, long level) {
  return TruncatedNonlinearity(g, level);
}

struct SubcriticalReport {
  double integral_estimate = 0.0;
  bool converges = false;
  double critical_exponent = 0.0;  // (N+1)/(N-1)
};

/// Estimates int_1^inf g(s) s^{-1-q} ds with q = (N+1)/(N-1).
/// Power kinds use the closed form 1/(q-p); other kinds are integrated on a
/// log grid with a monotone tail bound.
inline SubcriticalReport check_subcritical(const Nonlinearity& g, int dim) {
  detail::require(dim >= 2, "check_subcritical: dimension must be >= 2");
  SubcriticalReport rep;
  const double q = static_cast<double>(dim + 1) / static_cast<double>(dim - 1);
  rep.critical_exponent = q;
  if (g.kind() == Nonlinearity::Kind::Zero) {
    rep.converges = true;
    return rep;
  }
  if (g.kind() == Nonlinearity::Kind::Power) {
    const double p = g.exponent();
    rep.converges = p < q;
    rep.integral_estimate = rep.converges ? 1.0 / (q - p) : std::numeric_limits<double>::infinity();
    return rep;
  }
  // Simpson on u = log s over [0, log S]; integrand g(e^u) e^{-q u}.
  const double logS = std::log(1e8);
  const int m = 4096;  // even
  const double du = logS / m;
  double acc = 0.0, last_decade = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double u = i * du;
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double term = w * g(std::exp(u)) * std::exp(-q * u);
    acc += term;
    if (u > logS - std::log(10.0)) last_decade += term;
  }
  acc *= du / 3.0;
  last_decade *= du / 3.0;
  const double S = std::exp(logS);
  const double tail_probe = g(S) * std::pow(S, -q) / q;  // exact if g froze at S
  rep.integral_estimate = acc + tail_probe;
  // convergent integrands contribute vanishingly over the last sampled decade
  rep.converges = last_decade < 1e-2 * std::max(acc, 1e-300);
  return rep;
}

struct StructureReport {
  double c1_estimate = 0.0;
  bool holds = false;
  double sample_lo = 1e-3, sample_hi = 1e3;  // sampling box, recorded in output
};

/// Sampled falsifier for g(s+t) - g(s) <= c1 [ |g(s)| t / (1+|s|) + g(t) ]:
/// scans (s, t) over a log grid (plus s = 0 and s < 0) and reports the
/// smallest admissible c1 on the box.  The |g(s)| form is the one the
/// existence argument actually applies (the literal signed form is violated
/// by every odd g at negative s).
inline StructureReport check_structure(const Nonlinearity& g, int samples_per_decade = 8) {
  StructureReport rep;
  if (g.kind() == Nonlinearity::Kind::Zero) {
    rep.holds = true;
    return rep;
  }
  std::vector<double> ts;
  const int decades = static_cast<int>(std::round(std::log10(rep.sample_hi / rep.sample_lo)));
  const int m = decades * samples_per_decade;
  for (int i = 0; i <= m; ++i)
    ts.push_back(rep.sample_lo * std::pow(rep.sample_hi / rep.sample_lo, double(i) / m));
  std::vector<double> ss{0.0};
  for (double v : ts) {
    ss.push_back(v);
    ss.push_back(-v);
  }
  double worst = 0.0;
  bool finite = true;
  for (double s : ss) {
    for (double t : ts) {
      const double lhs = g(s + t) - g(s);
      if (lhs <= 0.0) continue;
      const double denom = std::abs(g(s)) * t / (1.0 + std::abs(s)) + g(t);
      if (denom <= 0.0) {
        finite = false;
        continue;
      }
      worst = std::max(worst, lhs / denom);
    }
  }
  rep.c1_estimate = worst;
  rep.holds = finite && std::isfinite(worst);
  return rep;
}

/// Samples s -> g(s) s^{-q}, q = (N+1)/(N-1), on a log grid; tends to zero
/// exactly when the subcritical integral converges.
inline std::vector<std::pair<double, double>> growth_decay(const Nonlinearity& g, int dim,
                                                           double s_max = 1e6, int count = 40) {
  const double q = static_cast<double>(dim + 1) / static_cast<double>(dim - 1);
  std::vector<std::pair<double, double>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double s = std::pow(s_max, double(i) / (count - 1));
    out.emplace_back(s, g(s) * std::pow(s, -q));
  }
  return out;
}

}  // namespace asel
