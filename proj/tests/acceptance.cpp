// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pathquant/pathquant.hpp"

using namespace pathquant;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what, double value) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << '=' << value << (ok ? "" : " (!)");
  }
};

struct Criterion {
  int number;
  std::string title;
  double limit_s;
  std::function<void(Verdict&)> body;
};

const Observable X = coordinate_observable(0, "x");
const Observable Y = coordinate_observable(1, "y");

DiscretePath r2_wave(const SymplecticModel& m, int n, double phase = 0.1) {
  return lissajous_path(m, PathGrid(n), {0.1, -0.2}, {0.8, 0.5}, {1, 2}, {phase, 0.3});
}

DiscretePath s2_arc(const SymplecticModel& m, int n) {
  return lissajous_path(m, PathGrid(n), {kPi / 2, kPi}, {0.5, 1.2}, {0.6, 0.9}, {0.3, -0.2});
}

DiscretePath random_wiggle(const SymplecticModel& m, int n, Rng& rng) {
  if (m.name == "s2")
    return lissajous_path(m, PathGrid(n), {kPi / 2 + rng.uniform(-0.3, 0.3), kPi}, {0.5, 0.8}, {1, 2},
                          {rng.uniform(0, 6), rng.uniform(0, 6)});
  return lissajous_path(m, PathGrid(n), {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}, {0.7, 0.5}, {1, 2},
                        {rng.uniform(0, 6), rng.uniform(0, 6)});
}

void criterion1(Verdict& v) {
  const auto m = make_r2();
  v.expect(std::abs(poisson_bracket(m, X, Y, 0, {0.3, -1.2}) - 1.0) < 1e-12, "bracket_xy_err",
           std::abs(poisson_bracket(m, X, Y, 0, {0.3, -1.2}) - 1.0));
  Rng rng(101);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3), h = random_polynomial(rng, 2, 3);
    const Point p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double j = poisson_bracket(m, f, bracket_observable(m, g, h), 0, p) +
                     poisson_bracket(m, g, bracket_observable(m, h, f), 0, p) +
                     poisson_bracket(m, h, bracket_observable(m, f, g), 0, p);
    worst = std::max(worst, std::abs(j));
  }
  v.expect(worst < 1e-6, "jacobi", worst);
}

void criterion2(Verdict& v) {
  Rng rng(102);
  for (const auto& m : {make_r2(), make_s2(1.0)}) {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3);
      const auto p = random_wiggle(m, 256, rng);
      // oracle: Simpson of the pointwise bracket from hand-solved 2x2 fields
      std::vector<double> vals;
      for (const auto& q : p.points) {
        const Vec df = differential(f, 0, q), dg = differential(g, 0, q);
        const double w = m.omega(0, q)(0, 1);
        vals.push_back((df[0] * dg[1] - df[1] * dg[0]) / w);
      }
      const double oracle = simpson(vals, p.grid.spacing());
      const double got = poisson_tilde(m, PathObservable::tilde(f), PathObservable::tilde(g), p);
      worst = std::max(worst, std::abs(got - oracle));
    }
    v.expect(worst < 1e-6, m.name, worst);
  }
}

void criterion3(Verdict& v) {
  const auto m = make_r2();
  const auto diag = line_path(m, PathGrid(256), {0, 0}, {1, 1});
  const auto lift = hamiltonian_lift(m, PathObservable::tilde(X) * PathObservable::tilde(Y), diag);
  double err = 0.0;
  for (const auto& x : lift.values) err = std::max({err, std::abs(x[0] + 0.5), std::abs(x[1] - 0.5)});
  v.expect(err < 1e-8, "closed_form", err);
  Rng rng(103);
  double worst = 0.0;
  for (const auto& model : {make_r2(), make_s2(1.0)}) {
    for (int k = 0; k < 10; ++k) {
      const auto f = PathObservable::tilde(random_polynomial(rng, 2, 2));
      const auto g = PathObservable::tilde(random_polynomial(rng, 2, 2));
      const auto phi = f * g + 0.5 * f * f * g + g;
      const auto p = random_wiggle(model, 256, rng);
      const auto w = constant_tangent(p, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
      worst = std::max(worst,
                       std::abs(omega_tilde(model, p, hamiltonian_lift(model, phi, p), w) + d_path_observable(model, phi, p, w)));
    }
  }
  v.expect(worst < 1e-6, "contract", worst);
}

void criterion4(Verdict& v) {
  const auto m = make_r2();
  const auto seg = line_path(m, PathGrid(256), {0, 0}, {1, 0});
  const double closed = product_law_residual(X, X, seg);
  v.expect(closed < 1e-10, "closed_form", closed);
  Rng rng(104);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3);
    worst = std::max(worst, product_law_residual(f, g, random_wiggle(m, 256, rng)));
  }
  v.expect(worst < 1e-8, "random", worst);
}

void criterion5(Verdict& v) {
  for (const auto& m : {make_r2(), make_s2(1.0)}) {
    const auto p = m.name == "s2" ? s2_arc(m, 256) : r2_wave(m, 256);
    const auto a = constant_tangent(p, {0.3, 0.7}), b = constant_tangent(p, {-0.5, 0.2});
    auto one = whole_path_partition(m, p);
    auto two = one;
    two.push_back(one[0]);
    two[0].t_end = 0.5;
    two[1].t_begin = 0.5;
    for (const auto* part : {&one, &two}) {
      const PathOneForm beta = [&](const DiscretePath& g, const PathTangent& x) { return beta_eval(m, *part, g, x); };
      const double r = std::abs(exterior_derivative_fd(m, beta, p, a, b, 1e-4) - omega_tilde(m, p, a, b));
      v.expect(r < 1e-5, m.name + (part == &two ? "_two_segments" : ""), r);
    }
  }
}

void criterion6(Verdict& v) {
  const auto r2 = make_r2();
  const auto circle = circle_path(r2, PathGrid(128), {0, 0}, 1.0);
  const double a = chen_stokes_residual(r2, symplectic_form(r2), circle, 0.6, constant_tangent(circle, {0.3, 0.7}),
                                        constant_tangent(circle, {-0.5, 0.2}), 1e-4);
  v.expect(a < 1e-6, "r2", a);
  const auto s2 = make_s2(1.0);
  const auto arc = s2_arc(s2, 256);
  const double b = chen_stokes_residual(s2, symplectic_form(s2), arc, 0.7, constant_tangent(arc, {0.3, 0.7}),
                                        constant_tangent(arc, {-0.5, 0.2}), 1e-4);
  v.expect(b < 1e-5, "s2", b);
}

void criterion7(Verdict& v) {
  const auto r2 = make_r2();
  const auto wave = r2_wave(r2, 256);
  const double flat =
      decomposition_residual(r2, wave, constant_tangent(wave, {1, 0}), constant_tangent(wave, {0, 1}), 1e-4);
  v.expect(flat < 1e-8, "flat", flat);
  const auto s2 = make_s2(1.0);
  const auto arc = s2_arc(s2, 256);
  const double curved =
      decomposition_residual(s2, arc, constant_tangent(arc, {0.3, 0.7}), constant_tangent(arc, {-0.5, 0.2}), 1e-4);
  v.expect(curved < 1e-5, "s2", curved);
  std::vector<double> xs, rs;
  double h = 0.02;
  for (int n = 16; n <= 128; n *= 2, h /= 2) {
    const auto p = s2_arc(s2, n);
    xs.push_back(1.0 / n);
    rs.push_back(decomposition_residual(s2, p, constant_tangent(p, {0.3, 0.7}), constant_tangent(p, {-0.5, 0.2}), h));
  }
  const double slope = loglog_slope(xs, rs);
  v.expect(slope >= 1.7, "slope", slope);
}

void criterion8(Verdict& v) {
  const PrequantumConfig r2(make_r2(), 1.0);
  const auto wave = r2_wave(r2.model, 128);
  const double a =
      curvature_residual(r2, wave, constant_tangent(wave, {1, 0}), constant_tangent(wave, {0, 1}), 1e-4);
  v.expect(a < 1e-6, "r2", a);
  const PrequantumConfig s2(make_s2(1.0), 1.0);
  const auto arc = s2_arc(s2.model, 256);
  const double b = curvature_residual(s2, arc, constant_tangent(arc, {0.3, 0.7}), constant_tangent(arc, {-0.5, 0.2}), 1e-4);
  v.expect(b < 1e-5, "s2", b);
}

void criterion9(Verdict& v) {
  const PathGrid grid(64);
  {
    const PrequantumConfig cfg(make_r2(), 0.8);
    const auto radius = [](double t) { return 0.6 + 0.5 * t * (1 - t); };
    const auto loop = sweep_circle_loop(cfg.model, grid, 128, {0.1, 0.2}, radius);
    const auto disk = disk_surface(grid, 64, 128, {0.1, 0.2}, radius);
    const double d = phase_difference(holonomy_chart(cfg, loop), holonomy_surface(cfg, disk, loop));
    v.expect(d < 1e-6, "chart_vs_surface", d);
    const double r = 0.9;
    const auto circle = sweep_circle_loop(cfg.model, grid, 128, {0, 0}, [r](double) { return r; });
    const double c = phase_difference(holonomy_chart(cfg, circle), std::exp(kI * (kPi * r * r / cfg.hbar)));
    v.expect(c < 1e-6, "closed_form", c);
  }
  {
    const PrequantumConfig cfg(make_s2(1.0), 1.0);
    const auto polar = [](double t) { return 0.8 + 0.9 * t; };
    const auto loop = latitude_loop(cfg.model, grid, 64, polar);
    const auto north = holonomy_surface(cfg, cap_surface(grid, 64, 64, polar, true), loop);
    const auto south = holonomy_surface(cfg, cap_surface(grid, 64, 64, polar, false), loop);
    const double d = phase_difference(north, south);
    v.expect(d < 1e-6, "cap_complement", d);
    const auto res = integrality_check(cfg, closed_surface_grid(cfg.model, 256, 64));
    v.expect(res.n == 2 && res.residual < 1e-6, "integrality_residual", res.residual);
  }
  {
    const PrequantumConfig cfg(make_s2(1.0), 0.7);
    const auto res = integrality_check(cfg, closed_surface_grid(cfg.model, 256, 64));
    const bool flagged = res.residual > 1e-6 && std::abs(res.residual - 0.143) < 1e-3;
    v.expect(flagged, "hbar07_residual", res.residual);
  }
}

void criterion10(Verdict& v) {
  const PrequantumConfig cfg(make_r2(), 1.0);
  const auto p = r2_wave(cfg.model, 128);
  const Section s{"wave",
                  [](int, const Point& q) { return std::exp(kI * (0.7 * q[0] - 0.4 * q[1])) * (1.0 + 0.3 * q[0] * q[1]); },
                  nullptr};
  const auto xt = PathObservable::tilde(X), yt = PathObservable::tilde(Y);
  const double c = commutator_residual(cfg, xt, yt, s, p, 1e-4);
  v.expect(c < 1e-4, "commutator", c);
  double worst = 0.0;
  for (const auto& phi : {xt * yt, xt * xt + 0.5 * yt, xt + PathObservable::constant(1.0)}) {
    const cplx a = apply_operator(cfg, phi, s, p), b = apply_operator_expanded(cfg, phi, s, p);
    worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
  }
  v.expect(worst < 1e-8, "five_term_rel", worst);
}

void criterion11(Verdict& v) {
  const PathGrid grid(64);
  const CauchySurfaceSpec sigma{0.0, 64, 64};
  for (auto sign : {ThetaMetricSign::paper_literal, ThetaMetricSign::spacelike}) {
    SpacetimeConfig c;
    c.rho = 1.5;
    c.K = 3;
    c.sign = sign;
    Rng rng(sign == ThetaMetricSign::spacelike ? 111 : 112);
    double worst = 0.0;
    for (int k = 0; k < 60; ++k) {
      const auto a = random_bar_solution(c, 5, rng), b = random_bar_solution(c, 5, rng);
      worst = std::max(worst, path_form_residual(c, a, b, sigma, grid));
    }
    v.expect(worst < 1e-6, std::string("mixtures_") + to_string(sign), worst);

    double drift = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto a = random_bar_solution(c, 5, rng), b = random_bar_solution(c, 5, rng);
      const double w0 = omega_bar(c, a, b, sigma);
      const double scale = std::max(std::abs(w0), 1e-6 * omega_bar_bound(c, a, b));
      for (double t : {0.7, 2.3})
        drift = std::max(drift, std::abs(omega_bar(c, a, b, {t, 64, 64}) - w0) / scale);
    }
    v.expect(drift < 1e-8, std::string("cauchy_") + to_string(sign), drift);
  }
  SpacetimeConfig c;
  c.rho = 1.5;
  c.K = 3;
  const auto a = make_bar_solution(c, {{1, 0, 0.7, -0.2}, {2, 0, 0.1, 0.5}});
  const auto b = make_bar_solution(c, {{1, 0, -0.3, 0.9}, {-2, 0, 0.4, 0.3}});
  const double r = path_form_residual(c, a, b, sigma, grid);
  v.expect(r < 1e-10, "n0_reduction", r);
}

void criterion12(Verdict& v) {
  Scenario sc;
  sc.suite = "all";
  sc.seed = 7;
  const auto first = run_suite(sc);
  const auto second = run_suite(sc);
  v.expect(first.body().dump() == second.body().dump(), "identical_bodies", 1.0);
  v.expect(first.failed() == 0, "all_failed_checks", static_cast<double>(first.failed()));
  v.expect(first.timing()["total_ms"].get<double>() >= 0.0, "checks", static_cast<double>(first.checks.size()));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "base Poisson bracket", 1.0, criterion1},
      {2, "path-space bracket of integrated observables", 5.0, criterion2},
      {3, "Hamiltonian lift of products", 5.0, criterion3},
      {4, "product of line integrals", 1.0, criterion4},
      {5, "exterior derivative of the path-space potential", 10.0, criterion5},
      {6, "Stokes formula for truncated Chen integrals", 10.0, criterion6},
      {7, "global decomposition of the path-space form", 30.0, criterion7},
      {8, "curvature of the pulled-back connection", 10.0, criterion8},
      {9, "holonomy and integrality", 30.0, criterion9},
      {10, "commutators of prequantum operators", 10.0, criterion10},
      {11, "symplectic forms on Klein-Gordon solutions", 60.0, criterion11},
      {12, "deterministic full suite", 180.0, criterion12},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << (v.detail.tellp() > 0 ? "; " : "") << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool ok = v.pass && in_time;
    failures += ok ? 0 : 1;
    std::printf("criterion %2d %s  %s  [%s] %.2fs/%.0fs%s\n", c.number, ok ? "PASS" : "FAIL", c.title.c_str(),
                v.detail.str().c_str(), secs, c.limit_s, in_time ? "" : " (over time)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
