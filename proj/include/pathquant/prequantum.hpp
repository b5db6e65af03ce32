#pragma once

// Prequantum line bundle on the model and its pull-back to path space:
// integrality, connections, holonomy over loops of paths, prequantum
// operators and the induced inner product.

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pathquant/chen.hpp"
#include "pathquant/errors.hpp"
#include "pathquant/geometry.hpp"
#include "pathquant/numerics.hpp"
#include "pathquant/path_space.hpp"

namespace pathquant {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

struct PrequantumConfig {
  SymplecticModel model;
  double hbar = 1.0;
  int chart = 0;              // trivializing chart of the line bundle
  double section_step = 1e-5;  // central-difference step for sections without gradient

  PrequantumConfig(SymplecticModel m, double h, int c = 0) : model(std::move(m)), hbar(h), chart(c) {
    if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
    if (!model.has_potential()) throw ConfigError("prequantum data needs a model with a local potential");
  }
};

/// Section of the line bundle in the working trivialization. The Hermitian
/// metric is the modulus, |s|^2 = s conj(s).
struct Section {
  std::string name;
  std::function<cplx(int chart, const Point&)> value;
  std::function<std::vector<cplx>(int chart, const Point&)> gradient;
};

inline Section constant_section(cplx c = 1.0) {
  return {"const", [c](int, const Point&) { return c; },
          [](int, const Point& p) { return std::vector<cplx>(p.size(), cplx{}); }};
}

/// ds at p: analytic when available, otherwise central differences with an
/// absolute step.
inline std::vector<cplx> section_differential(const Section& s, int chart, const Point& p, double step) {
  if (s.gradient) return s.gradient(chart, p);
  std::vector<cplx> ds(p.size());
  Point q = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    q[i] = p[i] + step;
    const cplx a = s.value(chart, q);
    q[i] = p[i] - step;
    const cplx b = s.value(chart, q);
    q[i] = p[i];
    ds[i] = (a - b) / (2.0 * step);
  }
  return ds;
}

/// (nabla_u s)(p) = ds(u) - i/hbar theta(u) s(p).
inline cplx covariant_derivative(const PrequantumConfig& cfg, const Section& s, const Point& p, const Vec& u) {
  cfg.model.require_interior(cfg.chart, p);
  if (u.size() != p.size()) throw DimensionError("covariant_derivative: vector length mismatch");
  const auto ds = section_differential(s, cfg.chart, p, cfg.section_step);
  cplx d{};
  for (std::size_t i = 0; i < u.size(); ++i) d += ds[i] * u[i];
  const double th = dot(cfg.model.theta(cfg.chart, p), u);
  return d - kI / cfg.hbar * th * s.value(cfg.chart, p);
}

/// Connection one-form of the pulled-back connection in the trivialization:
/// theta(V(a)) at gamma(a) plus lambda(V).
inline double connection_form(const PrequantumConfig& cfg, const DiscretePath& path, const PathTangent& v) {
  return dot(cfg.model.theta(path.chart, path.points.front()), v.values.front()) + lambda_eval(cfg.model, path, v);
}

/// (nabla~_V ev_a^* s)(gamma) = (nabla_{V(a)} s)(gamma(a)) - i/hbar lambda(V) s(gamma(a)).
inline cplx pullback_covariant_derivative(const PrequantumConfig& cfg, const Section& s, const DiscretePath& path,
                                          const PathTangent& v) {
  require_aligned(cfg.model, path, v);
  const Point& p0 = path.points.front();
  return covariant_derivative(cfg, s, p0, v.values.front()) -
         kI / cfg.hbar * lambda_eval(cfg.model, path, v) * s.value(path.chart, p0);
}

/// Function on path space with values in the (trivialized) pulled-back bundle.
using PathSection = std::function<cplx(const DiscretePath&)>;

inline PathSection pullback_section(Section s) {
  return [s = std::move(s)](const DiscretePath& g) { return s.value(g.chart, g.points.front()); };
}

/// nabla~_V F at gamma for an arbitrary path section, with dF(V) by a central
/// difference in the path that is Richardson-extrapolated once.
inline cplx covariant_derivative_fd(const PrequantumConfig& cfg, const PathSection& f, const DiscretePath& path,
                                    const PathTangent& v, double h) {
  auto central = [&](double e) {
    return (f(displace(cfg.model, path, v, e)) - f(displace(cfg.model, path, v, -e))) / (2.0 * e);
  };
  const cplx d = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  return d - kI / cfg.hbar * connection_form(cfg, path, v) * f(path);
}

/// |i hbar [nabla~_V, nabla~_W] 1 - omega~(V, W)| for constant coordinate
/// variations, with the commutator from nested finite differences.
inline double curvature_residual(const PrequantumConfig& cfg, const DiscretePath& path, const PathTangent& v,
                                 const PathTangent& w, double h) {
  const PathSection one = [](const DiscretePath&) { return cplx{1.0}; };
  const PathSection dw = [&](const DiscretePath& g) { return covariant_derivative_fd(cfg, one, g, w, h); };
  const PathSection dv = [&](const DiscretePath& g) { return covariant_derivative_fd(cfg, one, g, v, h); };
  const cplx comm = covariant_derivative_fd(cfg, dw, path, v, h) - covariant_derivative_fd(cfg, dv, path, w, h);
  return std::abs(kI * cfg.hbar * comm - omega_tilde(cfg.model, path, v, w));
}

// ---------------------------------------------------------------------------
// Surfaces for flux integration

/// One axis of a product quadrature grid. Periodic axes use `count` distinct
/// equispaced samples and the trapezoid rule; closed axes use Simpson on
/// `count` intervals (count must then be even).
struct QuadratureAxis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 64;
  bool periodic = false;

  [[nodiscard]] std::size_t samples() const { return static_cast<std::size_t>(periodic ? count : count + 1); }
  [[nodiscard]] double spacing() const { return (hi - lo) / count; }
  [[nodiscard]] double node(std::size_t i) const { return lo + static_cast<double>(i) * spacing(); }
  [[nodiscard]] std::vector<double> weights() const {
    std::vector<double> w(samples(), spacing());
    if (periodic) return w;
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = spacing() / 3.0 * ((i == 0 || i + 1 == w.size()) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
    return w;
  }
};

/// Coordinate product grid covering a compact surface (or a bounded box) in
/// one chart. Coordinate-degenerate edges such as the poles of the sphere
/// carry vanishing form components, so Simpson nodes may sit on them.
struct ClosedSurfaceGrid {
  int chart = 0;
  std::array<QuadratureAxis, 2> axes;
};

inline ClosedSurfaceGrid closed_surface_grid(const SymplecticModel& model, int n1, int n2) {
  if (model.name == "t2") return {0, {QuadratureAxis{0.0, kTwoPi, n1, true}, QuadratureAxis{0.0, kTwoPi, n2, true}}};
  if (model.name == "s2") return {0, {QuadratureAxis{0.0, kPi, n1, false}, QuadratureAxis{0.0, kTwoPi, n2, true}}};
  throw NonCompactDomainError("model " + model.name + " is not compact; supply an explicit bounding box");
}

inline ClosedSurfaceGrid bounded_surface_grid(Vec lo, Vec hi, int n1, int n2, int chart = 0) {
  return {chart, {QuadratureAxis{lo[0], hi[0], n1, false}, QuadratureAxis{lo[1], hi[1], n2, false}}};
}

/// sum over the grid of weight * integrand(point) * omega_{01}(point).
template <class Fn>
auto integrate_against_omega(const SymplecticModel& model, const ClosedSurfaceGrid& grid, Fn&& integrand) {
  if (model.dim != 2) throw DimensionError("surface integration is implemented for two-dimensional models");
  using R = decltype(integrand(Point{}));
  const auto w0 = grid.axes[0].weights();
  const auto w1 = grid.axes[1].weights();
  R total{};
  Point p(2);
  for (std::size_t i = 0; i < w0.size(); ++i) {
    p[0] = grid.axes[0].node(i);
    for (std::size_t j = 0; j < w1.size(); ++j) {
      p[1] = grid.axes[1].node(j);
      model.require_closure(grid.chart, p);
      total += w0[i] * w1[j] * model.omega_at(grid.chart, p)(0, 1) * integrand(p);
    }
  }
  return total;
}

struct IntegralityResult {
  long n = 0;
  double residual = 0.0;
  double flux = 0.0;
};

/// Total flux F of omega over the closed surface, the nearest integer to
/// F / (2 pi hbar) and the distance to it.
inline IntegralityResult integrality_check(const PrequantumConfig& cfg, const ClosedSurfaceGrid& surface) {
  const double flux = integrate_against_omega(cfg.model, surface, [](const Point&) { return 1.0; });
  const double q = flux / (kTwoPi * cfg.hbar);
  const double n = std::round(q);
  return {static_cast<long>(n), std::abs(q - n), flux};
}

/// <s1, s2> = int_M s1 conj(s2) omega over the grid.
inline cplx inner_product(const PrequantumConfig& cfg, const Section& s1, const Section& s2,
                          const ClosedSurfaceGrid& grid) {
  return integrate_against_omega(cfg.model, grid, [&](const Point& p) {
    return s1.value(grid.chart, p) * std::conj(s2.value(grid.chart, p));
  });
}

// ---------------------------------------------------------------------------
// Loops and surfaces on path space

/// Gamma(s_j, t_i) on an (S+1) x (N+1) grid with Gamma(0, .) = Gamma(1, .).
class LoopOfPathsGrid {
 public:
  LoopOfPathsGrid(const SymplecticModel& model, int chart, int s_intervals, const PathGrid& grid,
                  std::vector<Point> points)
      : chart_(chart), s_(s_intervals), grid_(grid), pts_(std::move(points)), periods_(model.periods(chart)) {
    if (s_ < 8 || s_ % 2 != 0) throw ConfigError("loop grid needs an even s-interval count >= 8");
    if (pts_.size() != static_cast<std::size_t>(s_ + 1) * grid_.nodes())
      throw DimensionError("loop grid point count mismatch");
    for (std::size_t i = 0; i < grid_.nodes(); ++i)
      for (std::size_t c = 0; c < periods_.size(); ++c)
        if (wrap_difference(at(static_cast<std::size_t>(s_), i)[c] - at(0, i)[c], periods_[c]) != 0.0)
          throw ConfigError("loop of paths is not closed in s");
  }

  [[nodiscard]] int chart() const { return chart_; }
  [[nodiscard]] int s_intervals() const { return s_; }
  [[nodiscard]] const PathGrid& grid() const { return grid_; }
  [[nodiscard]] const std::vector<double>& periods() const { return periods_; }
  [[nodiscard]] const Point& at(std::size_t j, std::size_t i) const { return pts_[j * grid_.nodes() + i]; }

  /// The closed loop s -> Gamma(s, t_i) on M (S + 1 samples, last = first).
  [[nodiscard]] std::vector<Point> longitudinal(std::size_t i) const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(s_) + 1);
    for (std::size_t j = 0; j <= static_cast<std::size_t>(s_); ++j) out.push_back(at(j, i));
    return out;
  }

  /// The path t -> Gamma(s_j, t).
  [[nodiscard]] DiscretePath transversal(const SymplecticModel& model, std::size_t j) const {
    std::vector<Point> pts(pts_.begin() + static_cast<long>(j * grid_.nodes()),
                           pts_.begin() + static_cast<long>((j + 1) * grid_.nodes()));
    return make_path(model, chart_, grid_, std::move(pts));
  }

 private:
  int chart_;
  int s_;
  PathGrid grid_;
  std::vector<Point> pts_;
  std::vector<double> periods_;
};

/// G(sigma_a, eps_b)(t_i) on a (Ss+1) x (Se+1) x (N+1) grid. For each t the
/// edge sigma = 1 traces the loop eps -> Gamma^t(eps), the edge sigma = 0 is
/// collapsed, and the edges eps = 0 and eps = 1 coincide.
class SurfaceOnPathsGrid {
 public:
  SurfaceOnPathsGrid(int chart, int sigma_intervals, int eps_intervals, const PathGrid& grid, std::vector<Point> points)
      : chart_(chart), ss_(sigma_intervals), se_(eps_intervals), grid_(grid), pts_(std::move(points)) {
    if (ss_ < 8 || se_ < 8 || ss_ % 2 || se_ % 2) throw ConfigError("surface grid needs even interval counts >= 8");
    if (pts_.size() != static_cast<std::size_t>(ss_ + 1) * static_cast<std::size_t>(se_ + 1) * grid_.nodes())
      throw DimensionError("surface grid point count mismatch");
  }
  [[nodiscard]] int chart() const { return chart_; }
  [[nodiscard]] int sigma_intervals() const { return ss_; }
  [[nodiscard]] int eps_intervals() const { return se_; }
  [[nodiscard]] const PathGrid& grid() const { return grid_; }
  [[nodiscard]] const Point& at(std::size_t a, std::size_t b, std::size_t i) const {
    return pts_[(a * static_cast<std::size_t>(se_ + 1) + b) * grid_.nodes() + i];
  }

 private:
  int chart_;
  int ss_;
  int se_;
  PathGrid grid_;
  std::vector<Point> pts_;
};

/// Stencil width for derivatives of loops and surfaces in their own parameters.
inline constexpr int kSurfaceStencil = 9;

/// oint_{Gamma^t_i} theta for every t-node, with eighth-order periodic
/// differences in s and the trapezoid rule.
inline std::vector<double> loop_potential_integrals(const PrequantumConfig& cfg, const LoopOfPathsGrid& loop) {
  const Differentiator d(kSurfaceStencil, true, loop.periods());
  const double ds = 1.0 / loop.s_intervals();
  std::vector<double> out(loop.grid().nodes());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto pts = loop.longitudinal(i);
    const auto tang = d(pts, ds);
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) s += dot(cfg.model.theta(loop.chart(), pts[j]), tang[j]);
    out[i] = s * ds;
  }
  return out;
}

/// Exponent int dt oint_{Gamma^t} theta of the chart holonomy formula.
inline double holonomy_chart_exponent(const PrequantumConfig& cfg, const LoopOfPathsGrid& loop) {
  return simpson(loop_potential_integrals(cfg, loop), loop.grid().spacing());
}

/// exp((i / hbar) int dt oint_{Gamma^t} theta); the loop must stay inside the
/// potential's chart.
inline cplx holonomy_chart(const PrequantumConfig& cfg, const LoopOfPathsGrid& loop) {
  return std::exp(kI / cfg.hbar * holonomy_chart_exponent(cfg, loop));
}

/// Flux int_{G_t} omega for every t-node.
inline std::vector<double> surface_fluxes(const PrequantumConfig& cfg, const SurfaceOnPathsGrid& g) {
  const auto& model = cfg.model;
  const auto periods = model.periods(g.chart());
  const Differentiator d(kSurfaceStencil, false, periods);
  const std::size_t ns = static_cast<std::size_t>(g.sigma_intervals()) + 1;
  const std::size_t ne = static_cast<std::size_t>(g.eps_intervals()) + 1;
  const double hs = 1.0 / g.sigma_intervals(), he = 1.0 / g.eps_intervals();
  std::vector<double> out(g.grid().nodes());
  std::vector<Point> line;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::vector<std::vector<Vec>> d_sigma(ne), d_eps(ns);
    for (std::size_t b = 0; b < ne; ++b) {
      line.clear();
      for (std::size_t a = 0; a < ns; ++a) line.push_back(g.at(a, b, i));
      d_sigma[b] = d(line, hs);
    }
    for (std::size_t a = 0; a < ns; ++a) {
      line.clear();
      for (std::size_t b = 0; b < ne; ++b) line.push_back(g.at(a, b, i));
      d_eps[a] = d(line, he);
    }
    std::vector<double> row(ns);
    std::vector<double> col(ne);
    for (std::size_t a = 0; a < ns; ++a) {
      for (std::size_t b = 0; b < ne; ++b) {
        const Point& p = g.at(a, b, i);
        model.require_closure(g.chart(), p);
        col[b] = bilinear(d_sigma[b][a], model.omega_at(g.chart(), p), d_eps[a][b]);
      }
      row[a] = simpson(col, he);
    }
    out[i] = simpson(row, hs);
  }
  return out;
}

inline constexpr double kBoundaryTolerance = 1e-8;

/// Throws BoundaryMismatchError unless G spans the loop: the sigma = 1 edge
/// matches Gamma node by node and the eps = 0 / eps = 1 edges coincide.
inline void check_spans(const SymplecticModel& model, const SurfaceOnPathsGrid& g, const LoopOfPathsGrid& loop) {
  if (g.eps_intervals() != loop.s_intervals() || g.grid().nodes() != loop.grid().nodes())
    throw BoundaryMismatchError("surface and loop grids differ in size");
  const auto periods = model.periods(g.chart());
  const auto ss = static_cast<std::size_t>(g.sigma_intervals());
  const auto se = static_cast<std::size_t>(g.eps_intervals());
  auto close = [&](const Point& x, const Point& y) {
    for (std::size_t c = 0; c < x.size(); ++c)
      if (std::abs(wrap_difference(x[c] - y[c], periods[c])) > kBoundaryTolerance) return false;
    return true;
  };
  for (std::size_t i = 0; i < g.grid().nodes(); ++i) {
    for (std::size_t b = 0; b <= se; ++b)
      if (!close(g.at(ss, b, i), loop.at(b, i)))
        throw BoundaryMismatchError("surface edge does not trace the loop at t-node " + std::to_string(i));
    for (std::size_t a = 0; a <= ss; ++a)
      if (!close(g.at(a, 0, i), g.at(a, se, i)))
        throw BoundaryMismatchError("surface seam edges do not coincide at t-node " + std::to_string(i));
  }
}

/// Exponent int dt int_{G_t} omega of the surface holonomy formula.
inline double holonomy_surface_exponent(const PrequantumConfig& cfg, const SurfaceOnPathsGrid& g) {
  return simpson(surface_fluxes(cfg, g), g.grid().spacing());
}

/// exp((i / hbar) int dt int_{G_t} omega) after checking that G spans the loop.
inline cplx holonomy_surface(const PrequantumConfig& cfg, const SurfaceOnPathsGrid& g, const LoopOfPathsGrid& loop) {
  check_spans(cfg.model, g, loop);
  return std::exp(kI / cfg.hbar * holonomy_surface_exponent(cfg, g));
}

/// Phase-difference in (-pi, pi] between two unit complex numbers.
inline double phase_difference(cplx a, cplx b) { return std::abs(std::arg(a * std::conj(b))); }

/// Line integral of lambda along the loop: int_0^1 lambda(Gamma'(s)) ds.
inline double lambda_line_integral(const PrequantumConfig& cfg, const LoopOfPathsGrid& loop) {
  const Differentiator d(kSurfaceStencil, true, loop.periods());
  const auto s_count = static_cast<std::size_t>(loop.s_intervals());
  const double ds = 1.0 / loop.s_intervals();
  const std::size_t n = loop.grid().nodes();
  // d/ds at every (s, t)
  std::vector<std::vector<Vec>> tangents(n);
  for (std::size_t i = 0; i < n; ++i) tangents[i] = d(loop.longitudinal(i), ds);
  std::vector<double> vals(s_count + 1);
  for (std::size_t j = 0; j <= s_count; ++j) {
    const auto path = loop.transversal(cfg.model, j);
    PathTangent v;
    v.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.values.push_back(tangents[i][j]);
    vals[j] = lambda_eval(cfg.model, path, v);
  }
  return simpson(vals, ds);
}

/// The same quantity in the flux form int_0^1 dt int_{Gamma|_t} omega, where
/// Gamma|_t is the strip [0, 1] x [0, t]: the s-integral is taken first, then
/// a running integral in t.
inline double lambda_flux_integral(const PrequantumConfig& cfg, const LoopOfPathsGrid& loop) {
  const Differentiator ds_diff(kSurfaceStencil, true, loop.periods());
  const auto s_count = static_cast<std::size_t>(loop.s_intervals());
  const double ds = 1.0 / loop.s_intervals();
  const std::size_t n = loop.grid().nodes();
  std::vector<std::vector<Vec>> d_s(n);
  for (std::size_t i = 0; i < n; ++i) d_s[i] = ds_diff(loop.longitudinal(i), ds);
  std::vector<std::vector<Vec>> d_t(s_count);
  for (std::size_t j = 0; j < s_count; ++j) d_t[j] = velocity(cfg.model, loop.transversal(cfg.model, j));
  std::vector<double> rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s_count; ++j)
      acc += bilinear(d_t[j][i], cfg.model.omega(loop.chart(), loop.at(j, i)), d_s[i][j]);
    rate[i] = acc * ds;
  }
  const auto strip = cumulative_simpson(rate, loop.grid().spacing());
  return simpson(strip, loop.grid().spacing());
}

// ---------------------------------------------------------------------------
// Families

using Profile = std::function<double(double)>;

/// Gamma(s, t) = center + r(t) (cos 2 pi s, sin 2 pi s).
inline LoopOfPathsGrid sweep_circle_loop(const SymplecticModel& model, const PathGrid& grid, int s_intervals,
                                         Point center, const Profile& radius, int chart = 0) {
  std::vector<Point> pts;
  const auto S = static_cast<std::size_t>(s_intervals);
  pts.reserve((S + 1) * grid.nodes());
  for (std::size_t j = 0; j <= S; ++j) {
    const double ang = kTwoPi * static_cast<double>(j % S) / s_intervals;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      const double r = radius(grid.node(i));
      pts.push_back({center[0] + r * std::cos(ang), center[1] + r * std::sin(ang)});
    }
  }
  return {model, chart, s_intervals, grid, std::move(pts)};
}

/// Disk surfaces G(sigma, eps)(t) = center + sigma r(t) (cos 2 pi eps, sin 2 pi eps).
inline SurfaceOnPathsGrid disk_surface(const PathGrid& grid, int sigma_intervals, int eps_intervals, Point center,
                                       const Profile& radius, int chart = 0) {
  std::vector<Point> pts;
  for (int a = 0; a <= sigma_intervals; ++a) {
    const double sigma = static_cast<double>(a) / sigma_intervals;
    for (int b = 0; b <= eps_intervals; ++b) {
      const double ang = kTwoPi * static_cast<double>(b % eps_intervals) / eps_intervals;
      for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double r = sigma * radius(grid.node(i));
        pts.push_back({center[0] + r * std::cos(ang), center[1] + r * std::sin(ang)});
      }
    }
  }
  return {chart, sigma_intervals, eps_intervals, grid, std::move(pts)};
}

/// Latitude loops on the sphere chart: Gamma(s, t) = (polar(t), 2 pi s).
inline LoopOfPathsGrid latitude_loop(const SymplecticModel& model, const PathGrid& grid, int s_intervals,
                                     const Profile& polar) {
  std::vector<Point> pts;
  const auto S = static_cast<std::size_t>(s_intervals);
  for (std::size_t j = 0; j <= S; ++j)
    for (std::size_t i = 0; i < grid.nodes(); ++i)
      pts.push_back({polar(grid.node(i)), kTwoPi * static_cast<double>(j % S) / s_intervals});
  return {model, 0, s_intervals, grid, std::move(pts)};
}

/// Polar cap spanning each latitude loop: the northern cap through phi = 0,
/// or the complementary southern cap through phi = pi.
inline SurfaceOnPathsGrid cap_surface(const PathGrid& grid, int sigma_intervals, int eps_intervals,
                                      const Profile& polar, bool northern) {
  std::vector<Point> pts;
  for (int a = 0; a <= sigma_intervals; ++a) {
    const double sigma = static_cast<double>(a) / sigma_intervals;
    for (int b = 0; b <= eps_intervals; ++b) {
      const double psi = kTwoPi * static_cast<double>(b % eps_intervals) / eps_intervals;
      for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double phi0 = polar(grid.node(i));
        const double phi = northern ? sigma * phi0 : kPi - sigma * (kPi - phi0);
        pts.push_back({phi, psi});
      }
    }
  }
  return {0, sigma_intervals, eps_intervals, grid, std::move(pts)};
}

/// Loops that run out and back along a segment, enclosing no area:
/// Gamma(s, t) = center + length(t) sin(2 pi s) direction.
inline LoopOfPathsGrid back_and_forth_loop(const SymplecticModel& model, const PathGrid& grid, int s_intervals,
                                           Point center, Vec direction, const Profile& length, int chart = 0) {
  std::vector<Point> pts;
  const auto S = static_cast<std::size_t>(s_intervals);
  for (std::size_t j = 0; j <= S; ++j) {
    const double w = std::sin(kTwoPi * static_cast<double>(j % S) / s_intervals);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      const double l = length(grid.node(i)) * w;
      pts.push_back({center[0] + l * direction[0], center[1] + l * direction[1]});
    }
  }
  return {model, chart, s_intervals, grid, std::move(pts)};
}

// ---------------------------------------------------------------------------
// Prequantum operators

/// (phi_op ev_a^* s)(gamma) = -i hbar (nabla~_{X~_phi} s~)(gamma) + phi(gamma) s(gamma(a)).
inline cplx apply_operator(const PrequantumConfig& cfg, const PathObservable& phi, const Section& s,
                           const DiscretePath& path) {
  const auto lift = hamiltonian_lift(cfg.model, phi, path);
  const cplx s0 = s.value(path.chart, path.points.front());
  return -kI * cfg.hbar * pullback_covariant_derivative(cfg, s, path, lift) + eval_path_observable(phi, path) * s0;
}

/// The same action written out term by term: for f~ the base covariant
/// derivative along X_f at gamma(a), the lambda(X_f) term and the
/// multiplication term; for products f~ g~ the five-term expansion. Terms of
/// total degree above two raise DegreeError.
inline cplx apply_operator_expanded(const PrequantumConfig& cfg, const PathObservable& phi, const Section& s,
                                    const DiscretePath& path) {
  const auto& model = cfg.model;
  const Point& p0 = path.points.front();
  const cplx s0 = s.value(path.chart, p0);
  const double hb = cfg.hbar;
  auto nabla_x = [&](const Observable& f) {
    return covariant_derivative(cfg, s, p0, hamiltonian_components(model, path.chart, p0, differential(f, path.chart, p0)));
  };
  auto lambda_x = [&](const Observable& f) { return lambda_eval(model, path, pointwise_hamiltonian(model, f, path)); };
  cplx total{};
  for (const auto& term : phi.terms) {
    std::vector<const Observable*> fs;
    for (const auto& fac : term.factors)
      for (int k = 0; k < fac.power; ++k) fs.push_back(&fac.observable);
    if (fs.empty()) {
      total += term.coeff * s0;
    } else if (fs.size() == 1) {
      const Observable& f = *fs[0];
      total += term.coeff * (-kI * hb * nabla_x(f) - lambda_x(f) * s0 + eval_tilde(f, path) * s0);
    } else if (fs.size() == 2) {
      const Observable& f = *fs[0];
      const Observable& g = *fs[1];
      const double ft = eval_tilde(f, path), gt = eval_tilde(g, path);
      total += term.coeff * (-kI * hb * gt * nabla_x(f) - kI * hb * ft * nabla_x(g) - gt * lambda_x(f) * s0 -
                             ft * lambda_x(g) * s0 + ft * gt * s0);
    } else {
      throw DegreeError("expanded operator action covers terms of total degree <= 2");
    }
  }
  return total;
}

/// |([phi1_op, phi2_op] + i hbar {phi1, phi2}_op) s~ (gamma)|, the outer
/// derivatives taken by Richardson-extrapolated central differences with step h.
inline double commutator_residual(const PrequantumConfig& cfg, const PathObservable& phi1, const PathObservable& phi2,
                                  const Section& s, const DiscretePath& path, double h) {
  PrequantumConfig local = cfg;
  local.section_step = h;
  auto op_on = [&](const PathObservable& outer, const PathObservable& inner) {
    const PathSection inner_applied = [&](const DiscretePath& g) { return apply_operator(local, inner, s, g); };
    const auto lift = hamiltonian_lift(local.model, outer, path);
    return -kI * local.hbar * covariant_derivative_fd(local, inner_applied, path, lift, h) +
           eval_path_observable(outer, path) * inner_applied(path);
  };
  const cplx comm = op_on(phi1, phi2) - op_on(phi2, phi1);
  const auto bracket = bracket_path_observable(local.model, phi1, phi2);
  return std::abs(comm + kI * local.hbar * apply_operator(local, bracket, s, path));
}

}  // namespace pathquant
