#pragma once

// Real Klein-Gordon fields on a flat cylinder M (x periodic with length Lx)
// and on M x S^1 of radius R, built from plane-wave modes. Derivatives are
// analytic; Cauchy-surface integrals use the periodic trapezoid rule.

#include <cmath>
#include <string>
#include <vector>

#include "pathquant/errors.hpp"
#include "pathquant/numerics.hpp"
#include "pathquant/path_space.hpp"

namespace pathquant {

enum class ThetaMetricSign { paper_literal, spacelike };

inline ThetaMetricSign parse_theta_sign(const std::string& s) {
  if (s == "paper_literal") return ThetaMetricSign::paper_literal;
  if (s == "spacelike") return ThetaMetricSign::spacelike;
  throw ConfigError("unknown theta_metric_sign '" + s + "'");
}

inline const char* to_string(ThetaMetricSign s) {
  return s == ThetaMetricSign::paper_literal ? "paper_literal" : "spacelike";
}

struct SpacetimeConfig {
  double Lx = kTwoPi;
  double rho = 1.0;
  double R = 1.0;
  ThetaMetricSign sign = ThetaMetricSign::paper_literal;
  int K = 2;
  int Nbar = 1;

  /// s in the dispersion relation omega^2 = khat^2 + rho^2 + s n^2 / R^2.
  [[nodiscard]] double s() const { return sign == ThetaMetricSign::paper_literal ? -1.0 : 1.0; }
  [[nodiscard]] double khat(int k) const { return kTwoPi * k / Lx; }
  [[nodiscard]] double mass2(int n) const { return rho * rho + s() * n * n / (R * R); }

  void validate() const {
    if (!(Lx > 0.0) || !(R > 0.0)) throw ConfigError("Lx and R must be positive");
    if (!(rho >= 0.0)) throw ConfigError("rho must be non-negative");
    if (K < 1 || Nbar < 1) throw ConfigError("mode cutoffs must be >= 1");
  }

  /// On M x S^1 every retained (k, n), k = 0 included, must have a real
  /// frequency, so the effective mass^2 has to be positive up to Nbar.
  void validate_bar() const {
    validate();
    for (int n = 0; n <= Nbar; ++n)
      if (!(mass2(n) > 0.0))
        throw ConfigError("effective mass^2 " + std::to_string(mass2(n)) + " at n = " + std::to_string(n) +
                          " is not positive; raise rho or R, or lower Nbar");
  }
};

/// One plane wave A cos(khat x + n theta - omega t) + B sin(...). On M the
/// n entry is zero and theta does not appear.
struct Mode {
  int k = 0;
  int n = 0;
  double A = 0.0;
  double B = 0.0;
  double omega = 0.0;
  double mass2 = 0.0;  // effective mass^2 carried by this mode
};

namespace detail {
struct ModeTerms {
  double c;  // cos phase
  double s;  // sin phase
};
inline ModeTerms phase_terms(double khat, int n, double omega, double x, double theta, double t) {
  const double a = khat * x + n * theta - omega * t;
  return {std::cos(a), std::sin(a)};
}
}  // namespace detail

struct ModeSolution {
  double Lx = kTwoPi;
  std::vector<Mode> modes;

  [[nodiscard]] double khat(const Mode& m) const { return kTwoPi * m.k / Lx; }

  [[nodiscard]] double value(double x, double t) const {
    double v = 0.0;
    for (const auto& m : modes) {
      const auto p = detail::phase_terms(khat(m), 0, m.omega, x, 0.0, t);
      v += m.A * p.c + m.B * p.s;
    }
    return v;
  }
  [[nodiscard]] double dt(double x, double t) const {
    double v = 0.0;
    for (const auto& m : modes) {
      const auto p = detail::phase_terms(khat(m), 0, m.omega, x, 0.0, t);
      v += m.omega * (m.A * p.s - m.B * p.c);
    }
    return v;
  }
  /// dtt psi - dxx psi + m^2 psi evaluated mode by mode with exact derivatives.
  [[nodiscard]] double kg_operator(double x, double t) const {
    double v = 0.0;
    for (const auto& m : modes) {
      const auto p = detail::phase_terms(khat(m), 0, m.omega, x, 0.0, t);
      const double k2 = khat(m) * khat(m);
      const double u = m.A * p.c + m.B * p.s;
      v += (-m.omega * m.omega + k2 + m.mass2) * u;
    }
    return v;
  }
};

struct BarModeSolution {
  double Lx = kTwoPi;
  double R = 1.0;
  double s = -1.0;
  double rho2 = 1.0;
  std::vector<Mode> modes;

  [[nodiscard]] double khat(const Mode& m) const { return kTwoPi * m.k / Lx; }

  [[nodiscard]] double value(double x, double theta, double t) const {
    double v = 0.0;
    for (const auto& m : modes) {
      const auto p = detail::phase_terms(khat(m), m.n, m.omega, x, theta, t);
      v += m.A * p.c + m.B * p.s;
    }
    return v;
  }
  [[nodiscard]] double dt(double x, double theta, double t) const {
    double v = 0.0;
    for (const auto& m : modes) {
      const auto p = detail::phase_terms(khat(m), m.n, m.omega, x, theta, t);
      v += m.omega * (m.A * p.s - m.B * p.c);
    }
    return v;
  }
  /// dtt Psi - dxx Psi - dthth Psi / (s R^2) + rho^2 Psi with exact derivatives.
  [[nodiscard]] double kg_operator(double x, double theta, double t) const {
    double v = 0.0;
    for (const auto& m : modes) {
      const auto p = detail::phase_terms(khat(m), m.n, m.omega, x, theta, t);
      const double u = m.A * p.c + m.B * p.s;
      const double k2 = khat(m) * khat(m);
      v += (-m.omega * m.omega + k2 + m.n * m.n / (s * R * R) + rho2) * u;
    }
    return v;
  }
};

struct ModeCoefficients {
  int k = 0;
  int n = 0;
  double A = 0.0;
  double B = 0.0;
};

inline Mode make_mode(const SpacetimeConfig& cfg, int k, int n, double A, double B) {
  if (std::abs(k) > cfg.K) throw ConfigError("mode k = " + std::to_string(k) + " exceeds the cutoff");
  if (std::abs(n) > cfg.Nbar) throw ConfigError("mode n = " + std::to_string(n) + " exceeds the cutoff");
  const double kh = cfg.khat(k);
  const double w2 = kh * kh + cfg.mass2(n);
  if (!(w2 > 0.0)) throw ConfigError("mode (" + std::to_string(k) + ", " + std::to_string(n) + ") has no real frequency");
  return {k, n, A, B, std::sqrt(w2), cfg.mass2(n)};
}

/// Solution on M from (k, A, B) triples; n entries are ignored.
inline ModeSolution make_solution(const SpacetimeConfig& cfg, const std::vector<ModeCoefficients>& coeffs) {
  cfg.validate();
  ModeSolution out{cfg.Lx, {}};
  for (const auto& c : coeffs) out.modes.push_back(make_mode(cfg, c.k, 0, c.A, c.B));
  return out;
}

inline BarModeSolution make_bar_solution(const SpacetimeConfig& cfg, const std::vector<ModeCoefficients>& coeffs) {
  cfg.validate_bar();
  BarModeSolution out{cfg.Lx, cfg.R, cfg.s(), cfg.rho * cfg.rho, {}};
  for (const auto& c : coeffs) out.modes.push_back(make_mode(cfg, c.k, c.n, c.A, c.B));
  return out;
}

/// Random mixture of `count` modes with k, n uniform within the cutoffs and
/// amplitudes uniform in [-1, 1].
inline BarModeSolution random_bar_solution(const SpacetimeConfig& cfg, int count, Rng& rng) {
  std::vector<ModeCoefficients> c;
  for (int i = 0; i < count; ++i) {
    const int k = static_cast<int>(rng.integer(-cfg.K, cfg.K));
    const int n = static_cast<int>(rng.integer(-cfg.Nbar, cfg.Nbar));
    const double A = rng.uniform(-1.0, 1.0);
    const double B = rng.uniform(-1.0, 1.0);
    c.push_back({k, n, A, B});
  }
  return make_bar_solution(cfg, c);
}

struct CauchySurfaceSpec {
  double t0 = 0.0;
  int nx = 128;
  int ntheta = 128;

  void validate() const {
    if (nx < 32 || nx % 2 != 0 || ntheta < 32 || ntheta % 2 != 0)
      throw ConfigError("Cauchy surface resolutions must be even and >= 32");
  }
};

inline double kg_residual(const SpacetimeConfig& cfg, const ModeSolution& psi, const CauchySurfaceSpec& grid) {
  (void)cfg;
  grid.validate();
  double worst = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    const double x = psi.Lx * i / grid.nx;
    worst = std::max(worst, std::abs(psi.kg_operator(x, grid.t0)));
  }
  return worst;
}

inline double kg_residual(const SpacetimeConfig& cfg, const BarModeSolution& psi, const CauchySurfaceSpec& grid) {
  grid.validate();
  (void)cfg;
  double worst = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ntheta; ++j) {
      const double x = psi.Lx * i / grid.nx;
      const double th = kTwoPi * j / grid.ntheta;
      worst = std::max(worst, std::abs(psi.kg_operator(x, th, grid.t0)));
    }
  return worst;
}

/// (1/2) int_Sigma (psi2 dn psi1 - psi1 dn psi2) dx with the future-pointing
/// unit normal d/dt.
inline double omega_M(const SpacetimeConfig& cfg, const ModeSolution& a, const ModeSolution& b,
                      const CauchySurfaceSpec& sigma) {
  (void)cfg;
  sigma.validate();
  std::vector<double> f(static_cast<std::size_t>(sigma.nx));
  for (int i = 0; i < sigma.nx; ++i) {
    const double x = a.Lx * i / sigma.nx;
    f[static_cast<std::size_t>(i)] =
        b.value(x, sigma.t0) * a.dt(x, sigma.t0) - a.value(x, sigma.t0) * b.dt(x, sigma.t0);
  }
  return 0.5 * periodic_trapezoid(f, a.Lx / sigma.nx);
}

/// (1/2) int_{Sigma x S^1} (Psi2 dn Psi1 - Psi1 dn Psi2) R dx dtheta.
inline double omega_bar(const SpacetimeConfig& cfg, const BarModeSolution& a, const BarModeSolution& b,
                        const CauchySurfaceSpec& sigma) {
  sigma.validate();
  const double hx = a.Lx / sigma.nx;
  const double hth = kTwoPi / sigma.ntheta;
  double total = 0.0;
  for (int i = 0; i < sigma.nx; ++i) {
    const double x = hx * i;
    for (int j = 0; j < sigma.ntheta; ++j) {
      const double th = hth * j;
      total += b.value(x, th, sigma.t0) * a.dt(x, th, sigma.t0) - a.value(x, th, sigma.t0) * b.dt(x, th, sigma.t0);
    }
  }
  return 0.5 * cfg.R * total * hx * hth;
}

/// The family t -> Psi(., theta = 2 pi t, .) of solutions on M.
struct EmbeddedPath {
  PathGrid grid;
  std::vector<ModeSolution> slices;
};

/// Each slice keeps the frequency and effective mass^2 of its parent modes,
/// with the n theta phase folded into the amplitudes.
inline ModeSolution bar_slice(const BarModeSolution& psi, double theta) {
  ModeSolution out{psi.Lx, {}};
  out.modes.reserve(psi.modes.size());
  for (const auto& m : psi.modes) {
    const double ph = m.n * theta;
    const double c = std::cos(ph), s = std::sin(ph);
    out.modes.push_back({m.k, 0, m.A * c + m.B * s, m.B * c - m.A * s, m.omega, m.mass2});
  }
  return out;
}

inline EmbeddedPath embed_bar_solution(const SpacetimeConfig& cfg, const BarModeSolution& psi, const PathGrid& grid) {
  (void)cfg;
  EmbeddedPath out{grid, {}};
  out.slices.reserve(grid.nodes());
  for (std::size_t i = 0; i < grid.nodes(); ++i) out.slices.push_back(bar_slice(psi, kTwoPi * grid.node(i)));
  return out;
}

/// Field samples of a slice on the Cauchy surface x-grid.
inline std::vector<double> slice_samples(const ModeSolution& slice, const CauchySurfaceSpec& sigma) {
  std::vector<double> out(static_cast<std::size_t>(sigma.nx));
  for (int i = 0; i < sigma.nx; ++i) out[static_cast<std::size_t>(i)] = slice.value(slice.Lx * i / sigma.nx, sigma.t0);
  return out;
}

/// 2 pi R int_0^1 omega_M(gamma1(t), gamma2(t)) dt over the embedded paths.
inline double omega_tilde_solutions(const SpacetimeConfig& cfg, const BarModeSolution& a, const BarModeSolution& b,
                                    const CauchySurfaceSpec& sigma, const PathGrid& grid) {
  const auto pa = embed_bar_solution(cfg, a, grid);
  const auto pb = embed_bar_solution(cfg, b, grid);
  std::vector<double> vals(grid.nodes());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = omega_M(cfg, pa.slices[i], pb.slices[i], sigma);
  return kTwoPi * cfg.R * simpson(vals, grid.spacing());
}

inline constexpr double kRelativeFloor = 1e-12;

/// Bound on |omega_bar(a, b)| from the mode amplitudes: the integrand never
/// exceeds 2 S_a S_b omega_max, with S the sum of |A| + |B| over modes.
inline double omega_bar_bound(const SpacetimeConfig& cfg, const BarModeSolution& a, const BarModeSolution& b) {
  double sa = 0.0, sb = 0.0, wmax = 0.0;
  for (const auto& m : a.modes) sa += std::abs(m.A) + std::abs(m.B), wmax = std::max(wmax, m.omega);
  for (const auto& m : b.modes) sb += std::abs(m.A) + std::abs(m.B), wmax = std::max(wmax, m.omega);
  return sa * sb * wmax * cfg.Lx * kTwoPi * cfg.R;
}

/// Relative share of the bound below which omega_bar counts as zero; there
/// the residual becomes absolute in units of the bound.
inline constexpr double kCancellationShare = 1e-6;

/// |omega~ - omega_bar| / max(|omega_bar|, floor), the floor being the larger
/// of 1e-12 and a 1e-6 share of omega_bar_bound. Pairs that are orthogonal
/// by symmetry have omega_bar at rounding level, where a purely relative
/// measure would only compare rounding noise.
inline double path_form_residual(const SpacetimeConfig& cfg, const BarModeSolution& a, const BarModeSolution& b,
                              const CauchySurfaceSpec& sigma, const PathGrid& grid) {
  const double wt = omega_tilde_solutions(cfg, a, b, sigma, grid);
  const double wb = omega_bar(cfg, a, b, sigma);
  const double floor = std::max(kRelativeFloor, kCancellationShare * omega_bar_bound(cfg, a, b));
  return std::abs(wt - wb) / std::max(std::abs(wb), floor);
}

}  // namespace pathquant
