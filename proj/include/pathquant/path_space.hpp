#pragma once

// Discretized paths [a, b] -> M, integrated observables and the transgressed
// symplectic structure on path space.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pathquant/errors.hpp"
#include "pathquant/geometry.hpp"
#include "pathquant/numerics.hpp"

namespace pathquant {

/// Uniform grid a + i (b - a) / N, i = 0..N, with N even and at least 8.
class PathGrid {
 public:
  explicit PathGrid(int intervals = 256, double a = 0.0, double b = 1.0) : n_(intervals), a_(a), b_(b) {
    if (n_ < 8 || n_ % 2 != 0) throw ConfigError("path grid needs an even interval count >= 8");
    if (!(b_ > a_)) throw ConfigError("path grid interval must satisfy a < b");
  }
  [[nodiscard]] int intervals() const { return n_; }
  [[nodiscard]] std::size_t nodes() const { return static_cast<std::size_t>(n_) + 1; }
  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double b() const { return b_; }
  [[nodiscard]] double length() const { return b_ - a_; }
  [[nodiscard]] double spacing() const { return (b_ - a_) / n_; }
  [[nodiscard]] double node(std::size_t i) const { return a_ + static_cast<double>(i) * spacing(); }
  /// Index of the grid node nearest to t, clamped to the interval.
  [[nodiscard]] std::size_t snap(double t) const {
    const double r = std::round((t - a_) / spacing());
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(n_)));
  }

 private:
  int n_;
  double a_;
  double b_;
};

struct DiscretePath {
  PathGrid grid;
  int chart = 0;
  std::vector<Point> points;

  [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Vector field along a path: one component vector per grid node.
struct PathTangent {
  std::vector<Vec> values;

  [[nodiscard]] std::size_t size() const { return values.size(); }
};

/// Largest consecutive step allowed, as a fraction of the chart box width.
inline constexpr double kMaxStepFraction = 0.2;

/// Checks chart interiors and step sizes; throws ChartDomainError.
inline void validate_path(const SymplecticModel& model, const DiscretePath& path) {
  if (path.points.size() != path.grid.nodes())
    throw DimensionError("path has " + std::to_string(path.points.size()) + " points for " +
                         std::to_string(path.grid.nodes()) + " grid nodes");
  const auto& chart = model.chart(path.chart);
  for (const auto& p : path.points) model.require_interior(path.chart, p);
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    for (std::size_t c = 0; c < chart.dim(); ++c) {
      const double per = chart.period(c);
      const double width = per > 0.0 ? per : chart.width(c);
      if (!std::isfinite(width)) continue;
      const double step = std::abs(wrap_difference(path.points[i][c] - path.points[i - 1][c], per));
      if (step > kMaxStepFraction * width)
        throw ChartDomainError("path step exceeds " + std::to_string(kMaxStepFraction) + " of the chart width");
    }
  }
}

inline DiscretePath make_path(const SymplecticModel& model, int chart, const PathGrid& grid,
                              std::vector<Point> points) {
  DiscretePath p{grid, chart, std::move(points)};
  validate_path(model, p);
  return p;
}

/// Samples t -> curve(t) at the grid nodes.
inline DiscretePath sample_path(const SymplecticModel& model, int chart, const PathGrid& grid,
                                const std::function<Point(double)>& curve) {
  std::vector<Point> pts;
  pts.reserve(grid.nodes());
  for (std::size_t i = 0; i < grid.nodes(); ++i) pts.push_back(curve(grid.node(i)));
  return make_path(model, chart, grid, std::move(pts));
}

/// Straight segment from p0 at t = a to p1 at t = b.
inline DiscretePath line_path(const SymplecticModel& model, const PathGrid& grid, Point p0, Point p1, int chart = 0) {
  return sample_path(model, chart, grid, [&](double t) {
    const double u = (t - grid.a()) / grid.length();
    Point p(p0.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = p0[i] + u * (p1[i] - p0[i]);
    return p;
  });
}

/// Arc of a coordinate circle: center + radius (cos, sin)(phase + turns 2 pi u).
inline DiscretePath circle_path(const SymplecticModel& model, const PathGrid& grid, Point center, double radius,
                                double turns = 1.0, double phase = 0.0, int chart = 0) {
  return sample_path(model, chart, grid, [&](double t) {
    const double u = (t - grid.a()) / grid.length();
    const double ang = phase + kTwoPi * turns * u;
    return Point{center[0] + radius * std::cos(ang), center[1] + radius * std::sin(ang)};
  });
}

/// Lissajous curve center_i + amp_i sin(freq_i 2 pi u + phase_i).
inline DiscretePath lissajous_path(const SymplecticModel& model, const PathGrid& grid, Point center, Vec amp,
                                   Vec freq, Vec phase, int chart = 0) {
  return sample_path(model, chart, grid, [&](double t) {
    const double u = (t - grid.a()) / grid.length();
    Point p(center.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = center[i] + amp[i] * std::sin(freq[i] * kTwoPi * u + phase[i]);
    return p;
  });
}

/// d(gamma)/dt at every node: five-point stencils, shifted one-sided near the
/// ends, angular coordinates differenced modulo their period.
inline std::vector<Vec> velocity(const SymplecticModel& model, const DiscretePath& path) {
  const Differentiator d(5, false, model.periods(path.chart));
  return d(path.points, path.grid.spacing());
}

inline PathTangent constant_tangent(const DiscretePath& path, const Vec& v) {
  return {std::vector<Vec>(path.size(), v)};
}

inline void require_aligned(const SymplecticModel& model, const DiscretePath& path, const PathTangent& v) {
  if (v.size() != path.size()) throw DimensionError("tangent is not aligned with the path grid");
  for (const auto& x : v.values)
    if (x.size() != static_cast<std::size_t>(model.dim)) throw DimensionError("tangent component length mismatch");
}

/// gamma + eps v, validated.
inline DiscretePath displace(const SymplecticModel& model, const DiscretePath& path, const PathTangent& v,
                             double eps) {
  require_aligned(model, path, v);
  DiscretePath out = path;
  for (std::size_t i = 0; i < out.points.size(); ++i)
    for (std::size_t c = 0; c < out.points[i].size(); ++c) out.points[i][c] += eps * v.values[i][c];
  validate_path(model, out);
  return out;
}

inline std::vector<double> sample_observable(const Observable& f, const DiscretePath& path) {
  std::vector<double> vals(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) vals[i] = f.value(path.chart, path.points[i]);
  return vals;
}

/// Integrated observable: int_a^b f(gamma(t)) dt by composite Simpson.
inline double eval_tilde(const Observable& f, const DiscretePath& path) {
  const auto vals = sample_observable(f, path);
  return simpson(vals, path.grid.spacing());
}

// ---------------------------------------------------------------------------
// Polynomials in integrated observables

struct Factor {
  Observable observable;
  int power = 1;
};

struct Term {
  double coeff = 1.0;
  std::vector<Factor> factors;
};

/// Finite sum  sum_i c_i prod_j (f_ij~)^{n_ij}.
struct PathObservable {
  std::vector<Term> terms;

  static PathObservable tilde(Observable f, double coeff = 1.0) { return {{Term{coeff, {Factor{std::move(f), 1}}}}}; }
  static PathObservable constant(double c) { return {{Term{c, {}}}}; }

  PathObservable& operator+=(const PathObservable& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
  }
};

inline PathObservable operator+(PathObservable a, const PathObservable& b) { return a += b; }

inline PathObservable operator*(double s, PathObservable a) {
  for (auto& t : a.terms) t.coeff *= s;
  return a;
}

inline PathObservable operator*(const PathObservable& a, const PathObservable& b) {
  PathObservable out;
  for (const auto& ta : a.terms) {
    for (const auto& tb : b.terms) {
      Term t{ta.coeff * tb.coeff, ta.factors};
      t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
      out.terms.push_back(std::move(t));
    }
  }
  return out;
}

/// Integrated values of every factor, indexed [term][factor].
inline std::vector<std::vector<double>> factor_values(const PathObservable& phi, const DiscretePath& path) {
  std::vector<std::vector<double>> v(phi.terms.size());
  for (std::size_t i = 0; i < phi.terms.size(); ++i)
    for (const auto& fac : phi.terms[i].factors) v[i].push_back(eval_tilde(fac.observable, path));
  return v;
}

inline double eval_path_observable(const PathObservable& phi, const DiscretePath& path) {
  const auto vals = factor_values(phi, path);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.terms.size(); ++i) {
    double prod = phi.terms[i].coeff;
    for (std::size_t j = 0; j < phi.terms[i].factors.size(); ++j)
      prod *= std::pow(vals[i][j], phi.terms[i].factors[j].power);
    s += prod;
  }
  return s;
}

/// d(phi)/d(f_ij~) for every factor, indexed like factor_values.
inline std::vector<std::vector<double>> factor_derivatives(const PathObservable& phi,
                                                           const std::vector<std::vector<double>>& vals) {
  std::vector<std::vector<double>> out(phi.terms.size());
  for (std::size_t i = 0; i < phi.terms.size(); ++i) {
    const auto& term = phi.terms[i];
    out[i].assign(term.factors.size(), 0.0);
    for (std::size_t j = 0; j < term.factors.size(); ++j) {
      double c = term.coeff * term.factors[j].power * std::pow(vals[i][j], term.factors[j].power - 1);
      for (std::size_t k = 0; k < term.factors.size(); ++k)
        if (k != j) c *= std::pow(vals[i][k], term.factors[k].power);
      out[i][j] = c;
    }
  }
  return out;
}

/// |f~ g~ - (int f^ g^. + int f^. g^)| with running integrals on the same grid.
inline double product_law_residual(const Observable& f, const Observable& g, const DiscretePath& path) {
  const double h = path.grid.spacing();
  const auto fv = sample_observable(f, path);
  const auto gv = sample_observable(g, path);
  const auto fcum = cumulative_simpson(fv, h);
  const auto gcum = cumulative_simpson(gv, h);
  std::vector<double> a(fv.size()), b(fv.size());
  for (std::size_t i = 0; i < fv.size(); ++i) {
    a[i] = fv[i] * gcum[i];
    b[i] = fcum[i] * gv[i];
  }
  const double lhs = simpson(fv, h) * simpson(gv, h);
  const double rhs = simpson(a, h) + simpson(b, h);
  return std::abs(lhs - rhs);
}

/// d(f~)(v) = int df_{gamma(t)}(v(t)) dt.
inline double d_tilde(const SymplecticModel& model, const Observable& f, const DiscretePath& path,
                      const PathTangent& v) {
  require_aligned(model, path, v);
  std::vector<double> vals(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) vals[i] = dot(differential(f, path.chart, path.points[i]), v.values[i]);
  return simpson(vals, path.grid.spacing());
}

/// d(phi)(v) by the Leibniz rule over the factors.
inline double d_path_observable(const SymplecticModel& model, const PathObservable& phi, const DiscretePath& path,
                                const PathTangent& v) {
  const auto vals = factor_values(phi, path);
  const auto coef = factor_derivatives(phi, vals);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.terms.size(); ++i)
    for (std::size_t j = 0; j < phi.terms[i].factors.size(); ++j)
      if (coef[i][j] != 0.0) s += coef[i][j] * d_tilde(model, phi.terms[i].factors[j].observable, path, v);
  return s;
}

/// omega~(v1, v2) = int_a^b omega(v1(t), v2(t)) dt.
inline double omega_tilde(const SymplecticModel& model, const DiscretePath& path, const PathTangent& v1,
                          const PathTangent& v2) {
  require_aligned(model, path, v1);
  require_aligned(model, path, v2);
  std::vector<double> vals(path.size());
  for (std::size_t i = 0; i < path.size(); ++i)
    vals[i] = bilinear(v1.values[i], model.omega(path.chart, path.points[i]), v2.values[i]);
  return simpson(vals, path.grid.spacing());
}

/// t -> X_f(gamma(t)).
inline PathTangent pointwise_hamiltonian(const SymplecticModel& model, const Observable& f, const DiscretePath& path) {
  PathTangent out;
  out.values.reserve(path.size());
  for (const auto& p : path.points)
    out.values.push_back(hamiltonian_components(model, path.chart, p, differential(f, path.chart, p)));
  return out;
}

/// Hamiltonian vector field of phi along gamma: each factor contributes its
/// pointwise Hamiltonian field weighted by d(phi)/d(f~).
inline PathTangent hamiltonian_lift(const SymplecticModel& model, const PathObservable& phi,
                                    const DiscretePath& path) {
  PathTangent lift{std::vector<Vec>(path.size(), Vec(static_cast<std::size_t>(model.dim), 0.0))};
  const auto vals = factor_values(phi, path);
  const auto coef = factor_derivatives(phi, vals);
  for (std::size_t i = 0; i < phi.terms.size(); ++i) {
    for (std::size_t j = 0; j < phi.terms[i].factors.size(); ++j) {
      if (coef[i][j] == 0.0) continue;
      const auto x = pointwise_hamiltonian(model, phi.terms[i].factors[j].observable, path);
      for (std::size_t n = 0; n < path.size(); ++n)
        for (std::size_t c = 0; c < lift.values[n].size(); ++c) lift.values[n][c] += coef[i][j] * x.values[n][c];
    }
  }
  return lift;
}

/// {phi1, phi2} = omega~(X~_phi1, X~_phi2).
inline double poisson_tilde(const SymplecticModel& model, const PathObservable& phi1, const PathObservable& phi2,
                            const DiscretePath& path) {
  return omega_tilde(model, path, hamiltonian_lift(model, phi1, path), hamiltonian_lift(model, phi2, path));
}

/// The bracket of two path observables as a path observable, expanding with
/// the Leibniz rule and {f~, g~} = ({f, g})~.
inline PathObservable bracket_path_observable(const SymplecticModel& model, const PathObservable& phi1,
                                              const PathObservable& phi2) {
  PathObservable out;
  for (const auto& t1 : phi1.terms) {
    for (const auto& t2 : phi2.terms) {
      for (std::size_t j = 0; j < t1.factors.size(); ++j) {
        for (std::size_t k = 0; k < t2.factors.size(); ++k) {
          Term t{t1.coeff * t2.coeff * t1.factors[j].power * t2.factors[k].power, {}};
          for (std::size_t a = 0; a < t1.factors.size(); ++a) {
            const int p = t1.factors[a].power - (a == j ? 1 : 0);
            if (p > 0) t.factors.push_back({t1.factors[a].observable, p});
          }
          for (std::size_t b = 0; b < t2.factors.size(); ++b) {
            const int p = t2.factors[b].power - (b == k ? 1 : 0);
            if (p > 0) t.factors.push_back({t2.factors[b].observable, p});
          }
          t.factors.push_back(
              {bracket_observable(model, t1.factors[j].observable, t2.factors[k].observable), 1});
          out.terms.push_back(std::move(t));
        }
      }
    }
  }
  return out;
}

/// One-form on path space, evaluated at (path, tangent).
using PathOneForm = std::function<double(const DiscretePath&, const PathTangent&)>;

/// dA(V, W) = V(A(W)) - W(A(V)) by central differences in the path. Valid for
/// constant coordinate variations V, W, whose Lie bracket vanishes.
inline double exterior_derivative_fd(const SymplecticModel& model, const PathOneForm& form, const DiscretePath& path,
                                     const PathTangent& v, const PathTangent& w, double h) {
  const double vw = (form(displace(model, path, v, h), w) - form(displace(model, path, v, -h), w)) / (2.0 * h);
  const double wv = (form(displace(model, path, w, h), v) - form(displace(model, path, w, -h), v)) / (2.0 * h);
  return vw - wv;
}

// ---------------------------------------------------------------------------
// Local potential on path space

/// A local potential theta on a coordinate box, assigned to the parameter
/// interval [t_begin, t_end].
struct PotentialPatch {
  double t_begin = 0.0;
  double t_end = 1.0;
  Chart domain;
  std::function<Vec(const Point&)> theta;
};

/// beta(v) = sum_i int_0^1 theta_i(v(gamma_i(s))) (t_i - t_{i-1}) ds, each
/// segment reparametrized affinely onto [0, 1].
inline double beta_eval(const SymplecticModel& model, const std::vector<PotentialPatch>& partition,
                        const DiscretePath& path, const PathTangent& v) {
  require_aligned(model, path, v);
  if (partition.empty()) throw PartitionDomainError("empty partition");
  const auto& grid = path.grid;
  std::size_t expected = 0;
  double total = 0.0;
  for (const auto& patch : partition) {
    const std::size_t i0 = grid.snap(patch.t_begin);
    const std::size_t i1 = grid.snap(patch.t_end);
    if (i0 != expected || i1 <= i0) throw PartitionDomainError("partition breakpoints are not contiguous");
    expected = i1;
    std::vector<double> vals;
    vals.reserve(i1 - i0 + 1);
    for (std::size_t i = i0; i <= i1; ++i) {
      if (!patch.domain.contains(path.points[i], model.margin))
        throw PartitionDomainError("segment leaves the domain of its potential");
      vals.push_back(dot(patch.theta(path.points[i]), v.values[i]));
    }
    const double jacobian = grid.node(i1) - grid.node(i0);
    total += jacobian * simpson(vals, 1.0 / static_cast<double>(i1 - i0));
  }
  if (expected != grid.nodes() - 1) throw PartitionDomainError("partition does not reach the end of the path");
  return total;
}

/// Single-patch partition that uses the model's own potential on the path chart.
inline std::vector<PotentialPatch> whole_path_partition(const SymplecticModel& model, const DiscretePath& path) {
  const int chart = path.chart;
  return {{path.grid.a(), path.grid.b(), model.chart(chart),
           [theta = model.theta_at, chart](const Point& p) { return theta(chart, p); }}};
}

// ---------------------------------------------------------------------------
// Lie bracket of lifted fields through flows

/// Path-space vector field.
using PathVectorField = std::function<PathTangent(const DiscretePath&)>;

namespace detail {
inline DiscretePath rk4_flow(const SymplecticModel& model, const PathVectorField& field, const DiscretePath& path,
                             double eps) {
  const auto k1 = field(path);
  const auto k2 = field(displace(model, path, k1, 0.5 * eps));
  const auto k3 = field(displace(model, path, k2, 0.5 * eps));
  const auto k4 = field(displace(model, path, k3, eps));
  PathTangent step{k1.values};
  for (std::size_t i = 0; i < step.size(); ++i)
    for (std::size_t c = 0; c < step.values[i].size(); ++c)
      step.values[i][c] = (k1.values[i][c] + 2.0 * k2.values[i][c] + 2.0 * k3.values[i][c] + k4.values[i][c]) / 6.0;
  return displace(model, path, step, eps);
}
}  // namespace detail

/// [V, W] at gamma from the flow commutator
/// (phi^W_{-eps} o phi^V_{-eps} o phi^W_eps o phi^V_eps (gamma) - gamma) / eps^2.
/// First order accurate in eps.
inline PathTangent lie_bracket_by_flows(const SymplecticModel& model, const PathVectorField& v,
                                        const PathVectorField& w, const DiscretePath& path, double eps) {
  auto g = detail::rk4_flow(model, v, path, eps);
  g = detail::rk4_flow(model, w, g, eps);
  g = detail::rk4_flow(model, v, g, -eps);
  g = detail::rk4_flow(model, w, g, -eps);
  const auto periods = model.periods(path.chart);
  PathTangent out{std::vector<Vec>(path.size(), Vec(static_cast<std::size_t>(model.dim), 0.0))};
  for (std::size_t i = 0; i < path.size(); ++i)
    for (std::size_t c = 0; c < out.values[i].size(); ++c)
      out.values[i][c] = wrap_difference(g.points[i][c] - path.points[i][c], periods[c]) / (eps * eps);
  return out;
}

}  // namespace pathquant
