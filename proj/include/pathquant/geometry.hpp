#pragma once

// Chart-based symplectic models, observables on them, pointwise Hamiltonian
// vector fields and the Poisson bracket.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pathquant/errors.hpp"
#include "pathquant/numerics.hpp"

namespace pathquant {

/// An open coordinate box. Coordinates with a positive period are angles and
/// are never bounds-checked.
struct Chart {
  std::string id;
  Vec lo;
  Vec hi;
  std::vector<double> periods;

  [[nodiscard]] std::size_t dim() const { return lo.size(); }
  [[nodiscard]] double period(std::size_t c) const { return c < periods.size() ? periods[c] : 0.0; }
  [[nodiscard]] double width(std::size_t c) const { return hi[c] - lo[c]; }

  /// True when `p` lies in the box shrunk by `margin` times each finite width.
  /// A zero margin accepts the closed box.
  [[nodiscard]] bool contains(const Point& p, double margin) const {
    if (p.size() != dim()) return false;
    for (std::size_t c = 0; c < dim(); ++c) {
      if (!std::isfinite(p[c])) return false;
      if (period(c) > 0.0) continue;
      const double w = width(c);
      const double pad = std::isfinite(w) ? margin * w : 0.0;
      if (margin > 0.0) {
        if (!(p[c] > lo[c] + pad && p[c] < hi[c] - pad)) return false;
      } else if (p[c] < lo[c] || p[c] > hi[c]) {
        return false;
      }
    }
    return true;
  }
};

using FormMatrixFn = std::function<Matrix(int chart, const Point&)>;
using CovectorFn = std::function<Vec(int chart, const Point&)>;

/// Even-dimensional manifold described by charts, the components of its
/// symplectic form, and optionally a local potential with d(theta) = omega.
struct SymplecticModel {
  std::string name;
  int dim = 2;
  std::vector<Chart> charts;
  FormMatrixFn omega_at;
  CovectorFn theta_at;  // empty when no potential is known
  double margin = 1e-3;
  double radius = 1.0;  // s2 only
  double scale = 1.0;   // t2 only

  [[nodiscard]] const Chart& chart(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= charts.size())
      throw ChartDomainError("unknown chart index " + std::to_string(id));
    return charts[static_cast<std::size_t>(id)];
  }

  void require_interior(int chart_id, const Point& p) const {
    if (p.size() != static_cast<std::size_t>(dim))
      throw DimensionError("point has " + std::to_string(p.size()) + " coordinates, model dimension is " +
                           std::to_string(dim));
    if (!chart(chart_id).contains(p, margin))
      throw ChartDomainError("point outside the interior of chart '" + chart(chart_id).id + "' of model " + name);
  }

  void require_closure(int chart_id, const Point& p) const {
    if (p.size() != static_cast<std::size_t>(dim)) throw DimensionError("point dimension mismatch");
    if (!chart(chart_id).contains(p, 0.0))
      throw ChartDomainError("point outside chart '" + chart(chart_id).id + "' of model " + name);
  }

  /// Components of omega at an interior point.
  [[nodiscard]] Matrix omega(int chart_id, const Point& p) const {
    require_interior(chart_id, p);
    return omega_at(chart_id, p);
  }

  [[nodiscard]] bool has_potential() const { return static_cast<bool>(theta_at); }

  [[nodiscard]] Vec theta(int chart_id, const Point& p) const {
    if (!theta_at) throw ConfigError("model " + name + " has no symplectic potential");
    require_interior(chart_id, p);
    return theta_at(chart_id, p);
  }

  [[nodiscard]] std::vector<double> periods(int chart_id) const {
    const auto& c = chart(chart_id);
    std::vector<double> p(static_cast<std::size_t>(dim), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = c.period(i);
    return p;
  }
};

struct PointVector {
  int chart = 0;
  Point base;
  Vec components;
};

/// A smooth function on the model, with an optional analytic differential.
struct Observable {
  std::string name;
  std::function<double(int chart, const Point&)> value;
  std::function<Vec(int chart, const Point&)> gradient;

  double operator()(int chart, const Point& p) const { return value(chart, p); }
  [[nodiscard]] bool has_gradient() const { return static_cast<bool>(gradient); }
};

/// Central-difference step used for observables without analytic gradient.
inline double fd_step(double coordinate, double rel = 1e-5) { return rel * (1.0 + std::abs(coordinate)); }

/// df at p: analytic when available, otherwise second-order central differences.
inline Vec differential(const Observable& f, int chart, const Point& p, double rel_step = 1e-5) {
  if (f.gradient) return f.gradient(chart, p);
  Vec df(p.size(), 0.0);
  Point q = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = fd_step(p[i], rel_step);
    q[i] = p[i] + h;
    const double fp = f.value(chart, q);
    q[i] = p[i] - h;
    const double fm = f.value(chart, q);
    q[i] = p[i];
    df[i] = (fp - fm) / (2.0 * h);
  }
  return df;
}

inline double eval_omega(const SymplecticModel& model, int chart, const Point& p, const Vec& u, const Vec& v) {
  if (u.size() != static_cast<std::size_t>(model.dim) || v.size() != static_cast<std::size_t>(model.dim))
    throw DimensionError("eval_omega: vector length does not match model dimension");
  return bilinear(u, model.omega(chart, p), v);
}

inline double eval_omega(const SymplecticModel& model, const PointVector& u, const PointVector& v) {
  if (u.chart != v.chart || u.base != v.base)
    throw DimensionError("eval_omega: vectors are based at different points");
  return eval_omega(model, u.chart, u.base, u.components, v.components);
}

/// Solves omega(X, .) = -df(.) at p, i.e. Omega^T X = -df.
inline Vec hamiltonian_components(const SymplecticModel& model, int chart, const Point& p, const Vec& df) {
  const Matrix om = model.omega(chart, p);
  Vec rhs(df.size());
  for (std::size_t i = 0; i < df.size(); ++i) rhs[i] = -df[i];
  return solve(om.transposed(), std::move(rhs));
}

inline PointVector hamiltonian_vector_field(const SymplecticModel& model, const Observable& f, int chart,
                                            const Point& p) {
  model.require_interior(chart, p);
  return {chart, p, hamiltonian_components(model, chart, p, differential(f, chart, p))};
}

/// Max-norm of omega(X, .) + df for a computed field X.
inline double hamiltonian_residual(const SymplecticModel& model, const Observable& f, const PointVector& x) {
  const Matrix om = model.omega(x.chart, x.base);
  const Vec df = differential(f, x.chart, x.base);
  Vec r = matvec(om.transposed(), x.components);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += df[i];
  return norm_inf(r);
}

/// {f, g} = omega(X_f, X_g).
inline double poisson_bracket(const SymplecticModel& model, const Observable& f, const Observable& g, int chart,
                              const Point& p) {
  const auto xf = hamiltonian_vector_field(model, f, chart, p);
  const auto xg = hamiltonian_vector_field(model, g, chart, p);
  return eval_omega(model, chart, p, xf.components, xg.components);
}

/// The same bracket through i_{X_f} dg.
inline double poisson_bracket_contraction(const SymplecticModel& model, const Observable& f, const Observable& g,
                                          int chart, const Point& p) {
  const auto xf = hamiltonian_vector_field(model, f, chart, p);
  return dot(differential(g, chart, p), xf.components);
}

/// p -> {f, g}(p) as an observable; its differential is taken numerically.
inline Observable bracket_observable(const SymplecticModel& model, Observable f, Observable g) {
  Observable h;
  h.name = "{" + f.name + "," + g.name + "}";
  auto m = std::make_shared<const SymplecticModel>(model);
  h.value = [m, f = std::move(f), g = std::move(g)](int chart, const Point& p) {
    return poisson_bracket(*m, f, g, chart, p);
  };
  return h;
}

inline Observable constant_observable(double c) {
  return {"const", [c](int, const Point&) { return c; },
          [](int, const Point& p) { return Vec(p.size(), 0.0); }};
}

inline Observable coordinate_observable(std::size_t index, std::string name = {}) {
  if (name.empty()) name = "x" + std::to_string(index);
  return {std::move(name), [index](int, const Point& p) { return p[index]; },
          [index](int, const Point& p) {
            Vec g(p.size(), 0.0);
            g[index] = 1.0;
            return g;
          }};
}

/// Product fg with the product-rule differential when both factors have one.
inline Observable product_observable(Observable f, Observable g) {
  Observable h;
  h.name = f.name + "*" + g.name;
  const bool analytic = f.has_gradient() && g.has_gradient();
  h.value = [f, g](int c, const Point& p) { return f.value(c, p) * g.value(c, p); };
  if (analytic) {
    h.gradient = [f, g](int c, const Point& p) {
      const double fv = f.value(c, p), gv = g.value(c, p);
      Vec df = f.gradient(c, p), dg = g.gradient(c, p);
      for (std::size_t i = 0; i < df.size(); ++i) df[i] = df[i] * gv + fv * dg[i];
      return df;
    };
  }
  return h;
}

struct Monomial {
  double coeff = 1.0;
  std::vector<int> powers;
};

/// Polynomial in chart coordinates with an analytic gradient.
inline Observable polynomial_observable(std::vector<Monomial> terms, std::string name = "poly") {
  auto shared = std::make_shared<const std::vector<Monomial>>(std::move(terms));
  Observable f;
  f.name = std::move(name);
  f.value = [shared](int, const Point& p) {
    double s = 0.0;
    for (const auto& m : *shared) {
      double v = m.coeff;
      for (std::size_t i = 0; i < m.powers.size(); ++i) v *= std::pow(p[i], m.powers[i]);
      s += v;
    }
    return s;
  };
  f.gradient = [shared](int, const Point& p) {
    Vec g(p.size(), 0.0);
    for (const auto& m : *shared) {
      for (std::size_t k = 0; k < m.powers.size(); ++k) {
        if (m.powers[k] == 0) continue;
        double v = m.coeff * m.powers[k];
        for (std::size_t i = 0; i < m.powers.size(); ++i)
          v *= std::pow(p[i], i == k ? m.powers[i] - 1 : m.powers[i]);
        g[k] += v;
      }
    }
    return g;
  };
  return f;
}

/// Random polynomial of total degree <= `degree` in `dim` variables, with
/// coefficients uniform in [-1, 1].
inline Observable random_polynomial(Rng& rng, int dim, int degree, std::string name = "rand") {
  std::vector<Monomial> terms;
  std::vector<int> powers(static_cast<std::size_t>(dim), 0);
  std::function<void(int, int)> rec = [&](int var, int remaining) {
    if (var == dim) {
      terms.push_back({rng.uniform(-1.0, 1.0), powers});
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      powers[static_cast<std::size_t>(var)] = e;
      rec(var + 1, remaining - e);
    }
    powers[static_cast<std::size_t>(var)] = 0;
  };
  rec(0, degree);
  return polynomial_observable(std::move(terms), std::move(name));
}

// ---------------------------------------------------------------------------
// Built-in models

inline Matrix canonical_2form(double c) {
  Matrix m(2);
  m(0, 1) = c;
  m(1, 0) = -c;
  return m;
}

/// The plane with dx^dy and potential x dy.
inline SymplecticModel make_r2() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  SymplecticModel m;
  m.name = "r2";
  m.dim = 2;
  m.charts = {{"global", {-inf, -inf}, {inf, inf}, {0.0, 0.0}}};
  m.omega_at = [](int, const Point&) { return canonical_2form(1.0); };
  m.theta_at = [](int, const Point& p) { return Vec{0.0, p[0]}; };
  return m;
}

/// Flat torus [0, 2pi)^2 with c dphi1^dphi2; the potential c phi1 dphi2 is
/// only valid on the box, not across the seam in phi1.
inline SymplecticModel make_t2(double c) {
  SymplecticModel m;
  m.name = "t2";
  m.dim = 2;
  m.scale = c;
  m.charts = {{"box", {0.0, 0.0}, {kTwoPi, kTwoPi}, {kTwoPi, kTwoPi}}};
  m.omega_at = [c](int, const Point&) { return canonical_2form(c); };
  m.theta_at = [c](int, const Point& p) { return Vec{0.0, c * p[0]}; };
  return m;
}

/// Round sphere of radius r in (polar, azimuth) coordinates with
/// omega = r^2 sin(phi) dphi^dpsi and theta = -r^2 cos(phi) dpsi.
inline SymplecticModel make_s2(double r) {
  SymplecticModel m;
  m.name = "s2";
  m.dim = 2;
  m.radius = r;
  m.charts = {{"spherical", {0.0, 0.0}, {kPi, kTwoPi}, {0.0, kTwoPi}}};
  m.omega_at = [r](int, const Point& p) { return canonical_2form(r * r * std::sin(p[0])); };
  m.theta_at = [r](int, const Point& p) { return Vec{0.0, -r * r * std::cos(p[0])}; };
  return m;
}

/// Looks a built-in model up by name ("r2", "t2", "s2").
inline SymplecticModel make_model(const std::string& name, double radius = 1.0, double scale = 1.0) {
  if (name == "r2") return make_r2();
  if (name == "t2") return make_t2(scale);
  if (name == "s2") return make_s2(radius);
  throw ConfigError("unknown model '" + name + "'");
}

/// Largest |d(theta)_ij - omega_ij| at p using central differences of theta.
inline double potential_mismatch(const SymplecticModel& model, int chart, const Point& p, double h) {
  const auto n = static_cast<std::size_t>(model.dim);
  std::vector<Vec> dtheta(n);  // dtheta[i][j] = d_i theta_j
  Point q = p;
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = p[i] + h;
    const Vec tp = model.theta(chart, q);
    q[i] = p[i] - h;
    const Vec tm = model.theta(chart, q);
    q[i] = p[i];
    dtheta[i].resize(n);
    for (std::size_t j = 0; j < n; ++j) dtheta[i][j] = (tp[j] - tm[j]) / (2.0 * h);
  }
  const Matrix om = model.omega(chart, p);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(dtheta[i][j] - dtheta[j][i] - om(i, j)));
  return worst;
}

/// Largest component of d(omega) at p by central differences.
inline double closedness_residual(const SymplecticModel& model, int chart, const Point& p, double h) {
  const auto n = static_cast<std::size_t>(model.dim);
  std::vector<Matrix> d(n);
  Point q = p;
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = p[i] + h;
    const Matrix a = model.omega(chart, q);
    q[i] = p[i] - h;
    const Matrix b = model.omega(chart, q);
    q[i] = p[i];
    d[i] = Matrix(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) d[i](r, c) = (a(r, c) - b(r, c)) / (2.0 * h);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        worst = std::max(worst, std::abs(d[i](j, k) + d[j](k, i) + d[k](i, j)));
  return worst;
}

}  // namespace pathquant
