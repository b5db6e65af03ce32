#pragma once

// First-order Chen integrals, their truncations, and the transgression
// one-form lambda with omega~ = ev_a^* omega' + d(lambda).

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pathquant/errors.hpp"
#include "pathquant/geometry.hpp"
#include "pathquant/numerics.hpp"
#include "pathquant/path_space.hpp"

namespace pathquant {

/// A 1- or 2-form on the model given by its action on tangent vectors.
struct SampledPForm {
  int degree = 2;
  std::string name;
  std::function<double(int chart, const Point&, std::span<const Vec>)> eval;
};

inline SampledPForm symplectic_form(const SymplecticModel& model) {
  return {2, "omega", [m = model](int chart, const Point& p, std::span<const Vec> v) {
            return bilinear(v[0], m.omega(chart, p), v[1]);
          }};
}

/// Constant-coefficient one-form sum_i a_i dx^i.
inline SampledPForm coordinate_one_form(Vec coeffs, std::string name = "alpha") {
  return {1, std::move(name), [a = std::move(coeffs)](int, const Point&, std::span<const Vec> v) {
            return dot(a, v[0]);
          }};
}

/// Integrand alpha(gamma'(t), v_1(t), ..., v_{p-1}(t)) at every node.
inline std::vector<double> chen_integrand(const SymplecticModel& model, const SampledPForm& alpha,
                                          const DiscretePath& path, std::span<const PathTangent> tangents) {
  if (static_cast<int>(tangents.size()) != alpha.degree - 1)
    throw DegreeError("a " + std::to_string(alpha.degree) + "-form needs " + std::to_string(alpha.degree - 1) +
                      " tangents, got " + std::to_string(tangents.size()));
  for (const auto& t : tangents) require_aligned(model, path, t);
  const auto vel = velocity(model, path);
  std::vector<double> vals(path.size());
  std::vector<Vec> args(static_cast<std::size_t>(alpha.degree));
  for (std::size_t i = 0; i < path.size(); ++i) {
    args[0] = vel[i];
    for (std::size_t k = 0; k < tangents.size(); ++k) args[k + 1] = tangents[k].values[i];
    vals[i] = alpha.eval(path.chart, path.points[i], args);
  }
  return vals;
}

/// int_a^b alpha(gamma', v_1, ...) dt.
inline double chen_first(const SymplecticModel& model, const SampledPForm& alpha, const DiscretePath& path,
                         std::span<const PathTangent> tangents = {}) {
  return simpson(chen_integrand(model, alpha, path, tangents), path.grid.spacing());
}

/// Running Chen integral at every node; the last entry equals chen_first.
inline std::vector<double> chen_truncated_profile(const SymplecticModel& model, const SampledPForm& alpha,
                                                  const DiscretePath& path,
                                                  std::span<const PathTangent> tangents = {}) {
  return cumulative_simpson(chen_integrand(model, alpha, path, tangents), path.grid.spacing());
}

/// Chen integral over the segment [a, t], t snapped to the nearest node.
inline double chen_truncated(const SymplecticModel& model, const SampledPForm& alpha, const DiscretePath& path,
                             double t, std::span<const PathTangent> tangents = {}) {
  if (t < path.grid.a() || t > path.grid.b()) throw ConfigError("truncation point lies outside the path interval");
  return chen_truncated_profile(model, alpha, path, tangents)[path.grid.snap(t)];
}

/// |d(int^t alpha)(V, W) - (ev_t^* alpha - ev_a^* alpha)(V, W)| for a closed
/// 2-form and constant coordinate variations V, W.
inline double chen_stokes_residual(const SymplecticModel& model, const SampledPForm& alpha, const DiscretePath& path,
                                   double t, const PathTangent& v, const PathTangent& w, double h) {
  if (alpha.degree != 2) throw DegreeError("Chen-Stokes check needs a 2-form");
  const std::size_t node = path.grid.snap(t);
  const PathOneForm truncated = [&](const DiscretePath& g, const PathTangent& x) {
    const PathTangent args[] = {x};
    return chen_truncated_profile(model, alpha, g, args)[node];
  };
  const double lhs = exterior_derivative_fd(model, truncated, path, v, w, h);
  const Vec vt[] = {v.values[node], w.values[node]};
  const Vec v0[] = {v.values[0], w.values[0]};
  const double rhs = alpha.eval(path.chart, path.points[node], vt) - alpha.eval(path.chart, path.points[0], v0);
  return std::abs(lhs - rhs);
}

/// lambda(v) = int_a^b ( int_a^t omega(gamma'(s), v(s)) ds ) dt, reusing the
/// running Chen integral so the nested quadrature stays O(N).
inline double lambda_eval(const SymplecticModel& model, const DiscretePath& path, const PathTangent& v) {
  const PathTangent args[] = {v};
  const auto running = chen_truncated_profile(model, symplectic_form(model), path, args);
  return simpson(running, path.grid.spacing());
}

/// |omega~(V, W) - (b - a) omega(V(a), W(a)) - d(lambda)(V, W)| with
/// finite-difference d(lambda).
inline double decomposition_residual(const SymplecticModel& model, const DiscretePath& path, const PathTangent& v,
                                       const PathTangent& w, double h) {
  const double wt = omega_tilde(model, path, v, w);
  const double base =
      path.grid.length() * eval_omega(model, path.chart, path.points.front(), v.values.front(), w.values.front());
  const PathOneForm lambda = [&](const DiscretePath& g, const PathTangent& x) { return lambda_eval(model, g, x); };
  const double dl = exterior_derivative_fd(model, lambda, path, v, w, h);
  return std::abs(wt - base - dl);
}

}  // namespace pathquant
