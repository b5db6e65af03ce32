#include <gtest/gtest.h>

#include <cmath>

#include "pathquant/geometry.hpp"

using namespace pathquant;

namespace {

const Observable X = coordinate_observable(0, "x");
const Observable Y = coordinate_observable(1, "y");

// The same observable without its analytic gradient.
Observable numeric(Observable f) {
  f.gradient = nullptr;
  return f;
}

}  // namespace

TEST(EvalOmega, CanonicalPairingOnThePlane) {
  const auto m = make_r2();
  EXPECT_EQ(eval_omega(m, 0, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}), 1.0);
}

TEST(EvalOmega, SphereAreaFormAtEquator) {
  const auto m = make_s2(1.0);
  EXPECT_NEAR(eval_omega(m, 0, {kPi / 2, 0.5}, {1.0, 0.0}, {0.0, 1.0}), 1.0, 1e-15);
}

TEST(EvalOmega, AntisymmetricAndBilinearOnRandomInput) {
  Rng rng(5);
  for (const auto& m : {make_r2(), make_t2(0.7), make_s2(1.3)}) {
    for (int k = 0; k < 50; ++k) {
      const Point p{rng.uniform(0.5, 2.5), rng.uniform(0.5, 5.5)};
      const Vec u{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Vec v{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Vec w{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      EXPECT_NEAR(eval_omega(m, 0, p, u, u), 0.0, 1e-15);
      EXPECT_NEAR(eval_omega(m, 0, p, u, v), -eval_omega(m, 0, p, v, u), 1e-15);
      const double a = 0.3;
      const double lhs = eval_omega(m, 0, p, axpy(a, v, u), w);
      EXPECT_NEAR(lhs, eval_omega(m, 0, p, u, w) + a * eval_omega(m, 0, p, v, w), 1e-14);
    }
  }
}

TEST(EvalOmega, BuiltinMatricesAreExactlyAntisymmetric) {
  Rng rng(6);
  for (const auto& m : {make_r2(), make_t2(2.0), make_s2(0.5)}) {
    const Point p{rng.uniform(0.5, 2.5), rng.uniform(0.5, 5.5)};
    const Matrix om = m.omega(0, p);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(om(i, j) + om(j, i), 0.0);
  }
}

TEST(EvalOmega, RejectsPointsOutsideTheChart) {
  const auto s2 = make_s2(1.0);
  EXPECT_THROW(eval_omega(s2, 0, {0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}), ChartDomainError);
  EXPECT_THROW(eval_omega(s2, 0, {4.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}), ChartDomainError);
  // azimuth is periodic and never rejected
  EXPECT_NO_THROW(eval_omega(s2, 0, {1.0, 9.0}, {1.0, 0.0}, {0.0, 1.0}));
}

TEST(EvalOmega, RejectsWrongLengths) {
  const auto m = make_r2();
  EXPECT_THROW(eval_omega(m, 0, {0.0, 0.0}, {1.0}, {0.0, 1.0}), DimensionError);
  EXPECT_THROW(eval_omega(m, 0, {0.0, 0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}), DimensionError);
}

TEST(HamiltonianField, CoordinateFunctions) {
  const auto m = make_r2();
  const auto xf = hamiltonian_vector_field(m, X, 0, {0.3, -2.0});
  EXPECT_EQ(xf.components, (Vec{0.0, 1.0}));
  const auto yf = hamiltonian_vector_field(m, Y, 0, {0.3, -2.0});
  EXPECT_EQ(yf.components, (Vec{-1.0, 0.0}));
}

TEST(HamiltonianField, ConstantHasZeroField) {
  for (const auto& m : {make_r2(), make_s2(1.0)}) {
    const auto f = hamiltonian_vector_field(m, constant_observable(3.0), 0, {1.0, 1.0});
    EXPECT_EQ(norm_inf(f.components), 0.0);
  }
}

TEST(HamiltonianField, ResidualWithAnalyticGradients) {
  Rng rng(7);
  for (const auto& m : {make_r2(), make_t2(1.7), make_s2(2.0)}) {
    for (int k = 0; k < 20; ++k) {
      const auto f = random_polynomial(rng, 2, 3);
      const Point p{rng.uniform(0.5, 2.5), rng.uniform(0.5, 5.5)};
      const auto xf = hamiltonian_vector_field(m, f, 0, p);
      const double scale = std::max(1e-300, norm_inf(differential(f, 0, p)));
      EXPECT_LE(hamiltonian_residual(m, f, xf), 1e-12 * scale);
    }
  }
}

TEST(HamiltonianField, FiniteDifferenceGradientConvergesQuadratically) {
  // the error constant C in err = C h^2 stays put when h halves
  const auto f = polynomial_observable({{1.0, {3, 1}}, {-0.5, {0, 4}}, {2.0, {1, 2}}});
  const Point p{0.7, -0.4};
  const Vec exact = differential(f, 0, p);
  auto err = [&](double rel) {
    const Vec d = differential(numeric(f), 0, p, rel);
    return std::max(std::abs(d[0] - exact[0]), std::abs(d[1] - exact[1]));
  };
  const double e1 = err(1e-2), e2 = err(5e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.1);
}

TEST(HamiltonianField, DegenerateFormIsDetected) {
  auto m = make_r2();
  m.omega_at = [](int, const Point&) { return Matrix(2); };
  EXPECT_THROW(hamiltonian_vector_field(m, X, 0, {0.0, 0.0}), DegenerateFormError);
}

TEST(PoissonBracket, Examples) {
  const auto m = make_r2();
  EXPECT_EQ(poisson_bracket(m, X, Y, 0, {5.0, -1.0}), 1.0);
  const auto f = polynomial_observable({{1.0, {2, 1}}, {0.5, {0, 3}}});
  EXPECT_EQ(poisson_bracket(m, f, f, 0, {0.2, 0.9}), 0.0);
  const auto half_x2 = polynomial_observable({{0.5, {2, 0}}});
  EXPECT_NEAR(poisson_bracket(m, half_x2, Y, 0, {2.0, 3.0}), 2.0, 1e-15);
}

TEST(PoissonBracket, AgreesWithContraction) {
  Rng rng(8);
  for (const auto& m : {make_r2(), make_t2(0.4), make_s2(1.0)}) {
    for (int k = 0; k < 20; ++k) {
      const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3);
      const Point p{rng.uniform(0.5, 2.5), rng.uniform(0.5, 5.5)};
      const double a = poisson_bracket(m, f, g, 0, p), b = poisson_bracket_contraction(m, f, g, 0, p);
      EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST(PoissonBracket, JacobiIdentityOnPolynomials) {
  Rng rng(9);
  const auto m = make_r2();
  for (int k = 0; k < 20; ++k) {
    const auto f = random_polynomial(rng, 2, 3), g = random_polynomial(rng, 2, 3), h = random_polynomial(rng, 2, 3);
    const Point p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double j = poisson_bracket(m, f, bracket_observable(m, g, h), 0, p) +
                     poisson_bracket(m, g, bracket_observable(m, h, f), 0, p) +
                     poisson_bracket(m, h, bracket_observable(m, f, g), 0, p);
    EXPECT_LE(std::abs(j), 1e-6);
  }
}

TEST(PoissonBracket, LeibnizRule) {
  Rng rng(10);
  for (const auto& m : {make_r2(), make_s2(1.0)}) {
    for (int k = 0; k < 20; ++k) {
      const auto f = random_polynomial(rng, 2, 2), g = random_polynomial(rng, 2, 2), h = random_polynomial(rng, 2, 2);
      const Point p{rng.uniform(0.5, 2.5), rng.uniform(0.5, 5.5)};
      const double lhs = poisson_bracket(m, product_observable(f, g), h, 0, p);
      const double rhs = f(0, p) * poisson_bracket(m, g, h, 0, p) + g(0, p) * poisson_bracket(m, f, h, 0, p);
      EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(Models, PotentialMatchesOmegaToSecondOrder) {
  const auto s2 = make_s2(1.5);
  const Point p{1.1, 2.0};
  const double e1 = potential_mismatch(s2, 0, p, 1e-2), e2 = potential_mismatch(s2, 0, p, 5e-3);
  EXPECT_LT(e1, 1e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.05);
  EXPECT_LT(potential_mismatch(make_r2(), 0, {0.3, 0.4}, 1e-3), 1e-12);
  EXPECT_LT(potential_mismatch(make_t2(2.0), 0, {3.0, 0.4}, 1e-3), 1e-12);
}

TEST(Models, Closedness) {
  for (const auto& m : {make_r2(), make_t2(1.0), make_s2(1.0)})
    EXPECT_LT(closedness_residual(m, 0, {1.2, 0.7}, 1e-4), 1e-10);
}

TEST(Models, LookupByName) {
  EXPECT_EQ(make_model("s2", 2.0).radius, 2.0);
  EXPECT_EQ(make_model("t2", 1.0, 3.0).scale, 3.0);
  EXPECT_THROW(make_model("cp2"), ConfigError);
}

TEST(Models, SphereChartKeepsAwayFromThePoles) {
  const auto s2 = make_s2(1.0);
  EXPECT_THROW(s2.require_interior(0, {1e-3, 1.0}), ChartDomainError);
  EXPECT_THROW(s2.require_interior(0, {kPi - 1e-3, 1.0}), ChartDomainError);
  EXPECT_NO_THROW(s2.require_interior(0, {0.01, 1.0}));
  EXPECT_NO_THROW(s2.require_closure(0, {0.0, 1.0}));
}
