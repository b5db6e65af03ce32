#include <gtest/gtest.h>

#include <cmath>

#include "pathquant/chen.hpp"

using namespace pathquant;

namespace {

DiscretePath segment(const SymplecticModel& m, int n = 256) { return line_path(m, PathGrid(n), {0, 0}, {1, 0}); }

DiscretePath sphere_arc(const SymplecticModel& s2, int n) {
  return lissajous_path(s2, PathGrid(n), {kPi / 2, kPi}, {0.5, 1.2}, {0.6, 0.9}, {0.3, -0.2});
}

}  // namespace

TEST(ChenFirst, Examples) {
  const auto m = make_r2();
  const auto p = segment(m);
  const PathTangent up[] = {constant_tangent(p, {0, 1})};
  EXPECT_NEAR(chen_first(m, symplectic_form(m), p, up), 1.0, 1e-14);
  const auto still = line_path(m, PathGrid(16), {0.3, 0.3}, {0.3, 0.3});
  const PathTangent any[] = {constant_tangent(still, {0.2, 1})};
  EXPECT_EQ(chen_first(m, symplectic_form(m), still, any), 0.0);
  EXPECT_NEAR(chen_first(m, coordinate_one_form({1.0, 0.0}), p), 1.0, 1e-14);
}

TEST(ChenFirst, WrongNumberOfTangents) {
  const auto m = make_r2();
  const auto p = segment(m, 16);
  EXPECT_THROW(chen_first(m, symplectic_form(m), p), DegreeError);
  const PathTangent one[] = {constant_tangent(p, {0, 1})};
  EXPECT_THROW(chen_first(m, coordinate_one_form({1.0, 0.0}), p, one), DegreeError);
}

TEST(ChenFirst, OneFormAlongAClosedCurveMatchesGreen) {
  // the loop integral of x dy around a circle of radius r is pi r^2
  const auto m = make_r2();
  const auto c = circle_path(m, PathGrid(128), {0.4, -0.1}, 0.8);
  const SampledPForm xdy{1, "xdy", [](int, const Point& p, std::span<const Vec> v) { return p[0] * v[0][1]; }};
  EXPECT_NEAR(chen_first(m, xdy, c), kPi * 0.64, 1e-6);
}

TEST(ChenTruncated, Examples) {
  const auto m = make_r2();
  const auto p = segment(m);
  const PathTangent up[] = {constant_tangent(p, {0, 1})};
  EXPECT_EQ(chen_truncated(m, symplectic_form(m), p, 0.0, up), 0.0);
  EXPECT_NEAR(chen_truncated(m, symplectic_form(m), p, 0.5, up), 0.5, 1e-14);
  EXPECT_NEAR(chen_truncated(m, symplectic_form(m), p, 1.0, up), chen_first(m, symplectic_form(m), p, up), 1e-15);
  EXPECT_THROW(chen_truncated(m, symplectic_form(m), p, 1.5, up), ConfigError);
}

TEST(ChenTruncated, ProfileMatchesClosedFormOnCubicIntegrand) {
  // gamma(t) = (t, t^2), alpha = x dy: integrand 2 t^2, running integral 2 t^3 / 3
  const auto m = make_r2();
  const auto p = sample_path(m, 0, PathGrid(64), [](double t) { return Point{t, t * t}; });
  const SampledPForm xdy{1, "xdy", [](int, const Point& q, std::span<const Vec> v) { return q[0] * v[0][1]; }};
  const auto prof = chen_truncated_profile(m, xdy, p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double t = p.grid.node(i);
    EXPECT_NEAR(prof[i], 2.0 * t * t * t / 3.0, 1e-12);
  }
}

TEST(ChenStokes, Examples) {
  const auto r2 = make_r2();
  const auto circle = circle_path(r2, PathGrid(128), {0, 0}, 1.0);
  const auto v = constant_tangent(circle, {0.3, 0.7}), w = constant_tangent(circle, {-0.5, 0.2});
  EXPECT_LT(chen_stokes_residual(r2, symplectic_form(r2), circle, 0.0, v, w, 1e-4), 1e-12);
  EXPECT_LT(chen_stokes_residual(r2, symplectic_form(r2), circle, 0.6, v, w, 1e-4), 1e-6);

  const auto s2 = make_s2(1.0);
  const auto arc = sphere_arc(s2, 256);
  const auto vs = constant_tangent(arc, {0.3, 0.7}), ws = constant_tangent(arc, {-0.5, 0.2});
  EXPECT_LT(chen_stokes_residual(s2, symplectic_form(s2), arc, 0.7, vs, ws, 1e-4), 1e-5);
  EXPECT_THROW(chen_stokes_residual(s2, coordinate_one_form({1, 0}), arc, 0.7, vs, ws, 1e-4), DegreeError);
}

TEST(LambdaEval, Examples) {
  const auto m = make_r2();
  const auto p = segment(m);
  EXPECT_NEAR(lambda_eval(m, p, constant_tangent(p, {0, 1})), 0.5, 1e-14);
  const auto wave = lissajous_path(m, PathGrid(128), {0, 0}, {0.8, 0.5}, {1, 2}, {0.1, 0.3});
  EXPECT_NEAR(lambda_eval(m, wave, PathTangent{velocity(m, wave)}), 0.0, 1e-14);
  const auto still = line_path(m, PathGrid(16), {0.3, 0.3}, {0.3, 0.3});
  EXPECT_EQ(lambda_eval(m, still, constant_tangent(still, {1, 0})), 0.0);
}

TEST(LambdaEval, IsLinearInTheTangent) {
  Rng rng(21);
  const auto s2 = make_s2(1.3);
  const auto p = sphere_arc(s2, 128);
  for (int k = 0; k < 10; ++k) {
    PathTangent v, w, vw;
    const double a = rng.uniform(-2, 2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      v.values.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
      w.values.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
      vw.values.push_back(axpy(a, w.values.back(), v.values.back()));
    }
    const double lhs = lambda_eval(s2, p, vw);
    EXPECT_NEAR(lhs, lambda_eval(s2, p, v) + a * lambda_eval(s2, p, w), 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Decomposition, Examples) {
  const auto r2 = make_r2();
  const auto wave = lissajous_path(r2, PathGrid(128), {0, 0}, {0.8, 0.5}, {1, 2}, {0.1, 0.3});
  const auto v = constant_tangent(wave, {1, 0}), w = constant_tangent(wave, {0, 1});
  EXPECT_LT(decomposition_residual(r2, wave, v, w, 1e-4), 1e-8);
  EXPECT_EQ(decomposition_residual(r2, wave, v, v, 1e-4), 0.0);

  const auto s2 = make_s2(1.0);
  const auto arc = sphere_arc(s2, 256);
  EXPECT_LT(decomposition_residual(s2, arc, constant_tangent(arc, {0.3, 0.7}), constant_tangent(arc, {-0.5, 0.2}),
                                     1e-4),
            1e-5);
}

TEST(Decomposition, HoldsOnLongerIntervals) {
  const auto s2 = make_s2(1.0);
  const auto arc = lissajous_path(s2, PathGrid(256, 0.0, 2.0), {kPi / 2, kPi}, {0.5, 1.2}, {0.6, 0.9}, {0.3, -0.2});
  EXPECT_LT(decomposition_residual(s2, arc, constant_tangent(arc, {0.3, 0.7}), constant_tangent(arc, {-0.5, 0.2}),
                                     1e-4),
            1e-5);
}

TEST(Decomposition, ConvergesUnderJointRefinement) {
  const auto s2 = make_s2(1.0);
  std::vector<double> xs, rs;
  double h = 0.02;
  for (int n = 16; n <= 64; n *= 2, h /= 2) {
    const auto arc = sphere_arc(s2, n);
    xs.push_back(1.0 / n);
    rs.push_back(decomposition_residual(s2, arc, constant_tangent(arc, {0.3, 0.7}),
                                          constant_tangent(arc, {-0.5, 0.2}), h));
  }
  EXPECT_GE(loglog_slope(xs, rs), 1.7);
}
