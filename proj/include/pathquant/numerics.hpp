#pragma once

// Small dense linear algebra, finite-difference stencils and quadrature rules
// shared by every other header.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pathquant/errors.hpp"

namespace pathquant {

using Vec = std::vector<double>;
using Point = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Row-major square matrix; the sizes involved never exceed 6x6.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  [[nodiscard]] std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  [[nodiscard]] Matrix transposed() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline Vec matvec(const Matrix& m, const Vec& x) {
  Vec y(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) y[i] += m(i, j) * x[j];
  return y;
}

/// u^T M v
inline double bilinear(const Vec& u, const Matrix& m, const Vec& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) row += m(i, j) * v[j];
    s += u[i] * row;
  }
  return s;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vec axpy(double alpha, const Vec& x, const Vec& y) {
  Vec r(y);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += alpha * x[i];
  return r;
}

/// Gaussian elimination with partial pivoting. Throws DegenerateFormError when
/// a pivot drops below `rel_tol * max|A|`.
inline Vec solve(Matrix a, Vec b, double rel_tol = 1e-12) {
  const std::size_t n = a.size();
  if (b.size() != n) throw DimensionError("solve: right-hand side length mismatch");
  const double scale = a.max_abs();
  if (scale == 0.0) throw DegenerateFormError("solve: zero matrix");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < rel_tol * scale)
      throw DegenerateFormError("solve: pivot below singularity threshold");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

/// Reduces a coordinate difference into (-period/2, period/2]; period <= 0
/// means the coordinate is not periodic.
inline double wrap_difference(double d, double period) {
  if (period <= 0.0) return d;
  return d - period * std::round(d / period);
}

/// Fornberg's recursion: weights of the order-`m` derivative at `z` from
/// values at `x`.
inline std::vector<double> fd_weights(double z, std::span<const double> x, int m) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

/// First derivative of uniformly spaced vector samples.
///
/// `width` is the (odd) stencil size; near the ends the stencil is shifted
/// inwards so every node keeps the same formal order. With `periodic` set,
/// samples[0] and samples.back() are the same point and stencils wrap.
/// Components with a positive entry in `periods` are differenced modulo that
/// period, so angular coordinates may be stored unwrapped or wrapped.
class Differentiator {
 public:
  Differentiator(int width, bool periodic, std::vector<double> periods = {})
      : width_(width), periodic_(periodic), periods_(std::move(periods)) {
    if (width_ < 3 || width_ % 2 == 0) throw DimensionError("stencil width must be odd and >= 3");
  }

  [[nodiscard]] std::vector<Vec> operator()(std::span<const Vec> samples, double spacing) const {
    const std::size_t n = samples.size();
    if (n == 0) return {};
    const std::size_t dim = samples[0].size();
    std::vector<Vec> out(n, Vec(dim, 0.0));
    if (periodic_) {
      const std::size_t m = n - 1;  // distinct samples
      if (m < static_cast<std::size_t>(width_)) throw DimensionError("too few samples for stencil");
      const auto w = weights_for(-(width_ / 2));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < dim; ++c) {
          double acc = 0.0;
          for (int k = 0; k < width_; ++k) {
            const long off = static_cast<long>(k) - width_ / 2;
            const std::size_t j =
                static_cast<std::size_t>((static_cast<long>(i) + off + static_cast<long>(m)) % static_cast<long>(m));
            acc += w[k] * wrap_difference(samples[j][c] - samples[i][c], period(c));
          }
          out[i][c] = acc / spacing;
        }
      }
      out[m] = out[0];
      return out;
    }
    const int width = std::min<int>(width_, static_cast<int>(n) - ((static_cast<int>(n) % 2 == 0) ? 1 : 0));
    if (width < 3) throw DimensionError("too few samples for stencil");
    for (std::size_t i = 0; i < n; ++i) {
      long start = static_cast<long>(i) - width / 2;
      start = std::clamp<long>(start, 0, static_cast<long>(n) - width);
      const auto w = weights_for(start - static_cast<long>(i), width);
      for (std::size_t c = 0; c < dim; ++c) {
        double acc = 0.0;
        for (int k = 0; k < width; ++k)
          acc += w[k] * wrap_difference(samples[start + k][c] - samples[i][c], period(c));
        out[i][c] = acc / spacing;
      }
    }
    return out;
  }

 private:
  [[nodiscard]] double period(std::size_t c) const { return c < periods_.size() ? periods_[c] : 0.0; }

  [[nodiscard]] std::vector<double> weights_for(long first_offset, int width = -1) const {
    if (width < 0) width = width_;
    std::vector<double> x(width);
    for (int k = 0; k < width; ++k) x[k] = static_cast<double>(first_offset + k);
    return fd_weights(0.0, x, 1);
  }

  int width_;
  bool periodic_;
  std::vector<double> periods_;
};

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals finishes with the 3/8 rule on the last three.
inline double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size() - 1;  // intervals
  if (f.size() < 2) return 0.0;
  if (n == 1) return 0.5 * h * (f[0] + f[1]);
  std::size_t even_end = (n % 2 == 0) ? n : n - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even_end; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
  s *= h / 3.0;
  if (n % 2 == 1) {
    const std::size_t i = even_end;
    s += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return s;
}

/// Running integrals F[i] = int_{x_0}^{x_i} f on a uniform grid.
///
/// Even nodes carry the composite Simpson sums; each odd node adds a single
/// interval integrated with the cubic through four neighbouring samples, so
/// the value at the final node equals simpson(f, h) when the interval count is
/// even.
inline std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size() - 1;
  std::vector<double> out(f.size(), 0.0);
  if (f.size() < 2) return out;
  if (n < 3) {
    for (std::size_t i = 1; i <= n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    if (n == 2) {
      out[1] = h * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0;
      out[2] = h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
    }
    return out;
  }
  auto first = [&](std::size_t b) { return h * (9.0 * f[b] + 19.0 * f[b + 1] - 5.0 * f[b + 2] + f[b + 3]) / 24.0; };
  auto middle = [&](std::size_t b) { return h * (-f[b] + 13.0 * f[b + 1] + 13.0 * f[b + 2] - f[b + 3]) / 24.0; };
  auto last = [&](std::size_t b) { return h * (f[b] - 5.0 * f[b + 1] + 19.0 * f[b + 2] + 9.0 * f[b + 3]) / 24.0; };
  for (std::size_t i = 2; i <= n; i += 2)
    out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
  for (std::size_t i = 1; i <= n; i += 2) {
    if (i + 2 <= n) {
      out[i] = out[i - 1] + first(i - 1);
    } else if (i + 1 == n) {
      out[i] = out[i - 1] + middle(i - 2);
    } else {
      // odd interval count: the final node closes with a one-interval rule
      out[i] = out[i - 1] + last(i - 3);
    }
  }
  return out;
}

/// Trapezoid rule for one period of a periodic function sampled at `f.size()`
/// equispaced points (endpoint excluded).
inline double periodic_trapezoid(std::span<const double> f, double h) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * h;
}

/// Least-squares slope of log(y) against log(x); pairs with non-positive y are
/// skipped. Returns NaN with fewer than two usable points.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nan("");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(ly.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

/// Deterministic uniform draws from a 64-bit Mersenne twister; independent of
/// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  long integer(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

/// Wraps a phase difference into (-pi, pi].
inline double wrap_phase(double a) { return wrap_difference(a, kTwoPi); }

}  // namespace pathquant
