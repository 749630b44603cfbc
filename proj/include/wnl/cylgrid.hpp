#pragma once

// Discrete calculus on the cylinder [t_min, t_max] x S^1.
//
// Samples live on a uniform tensor grid: n_t stations in t (both ends
// included) and n_theta equispaced angles in [0, 2pi) with no duplicated seam
// column. theta-derivatives are spectral (Fourier differentiation matrices),
// t-derivatives are fourth-order finite differences, circle integrals use the
// trapezoid rule and t-integrals composite Simpson.

#include <wnl/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wnl {

enum class Direction { t, theta };

class CylinderGrid {
public:
  static constexpr int min_n_t = 9;
  static constexpr int min_n_theta = 16;

  CylinderGrid(double t_min, double t_max, int n_t, int n_theta)
      : t_min_(t_min), t_max_(t_max), n_t_(n_t), n_theta_(n_theta) {
    if (!(t_max > t_min) || !std::isfinite(t_min) || !std::isfinite(t_max))
      throw SizingError("cylinder grid needs finite t_max > t_min");
    if (n_t < min_n_t)
      throw SizingError("cylinder grid needs n_t >= 9, got " + std::to_string(n_t));
    if (n_theta < min_n_theta || n_theta % 2 != 0)
      throw SizingError("cylinder grid needs even n_theta >= 16, got " + std::to_string(n_theta));
  }

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  int n_t() const { return n_t_; }
  int n_theta() const { return n_theta_; }
  double h_t() const { return (t_max_ - t_min_) / (n_t_ - 1); }
  double h_theta() const { return 2.0 * std::numbers::pi / n_theta_; }
  std::size_t points() const { return static_cast<std::size_t>(n_t_) * n_theta_; }

  double t(int i) const { return i == n_t_ - 1 ? t_max_ : t_min_ + i * h_t(); }
  double theta(int j) const { return j * h_theta(); }

  // Index of the station at t; throws DomainError if t is not a station.
  int station_index(double t) const {
    const double x = (t - t_min_) / h_t();
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-7 || r < 0 || r > n_t_ - 1)
      throw DomainError("t = " + std::to_string(t) + " is not a grid station");
    return static_cast<int>(r);
  }

  bool same_as(const CylinderGrid& o) const {
    return n_t_ == o.n_t_ && n_theta_ == o.n_theta_ && t_min_ == o.t_min_ && t_max_ == o.t_max_;
  }

private:
  double t_min_;
  double t_max_;
  int n_t_;
  int n_theta_;
};

// Samples of a d-component field on a CylinderGrid, stored t-major:
// value(i, j, c) at offset (i * n_theta + j) * d + c.
class GridField {
public:
  GridField(const CylinderGrid& grid, int components)
      : grid_(grid), d_(components), values_(grid.points() * check_components(components), 0.0) {}

  GridField(const CylinderGrid& grid, int components, std::vector<double> values)
      : grid_(grid), d_(check_components(components)), values_(std::move(values)) {
    if (values_.size() != grid_.points() * static_cast<std::size_t>(d_))
      throw SizingError("grid field value count does not match grid shape");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) {
        const std::size_t p = k / d_;
        throw ParameterError("non-finite sample at station " + std::to_string(p / grid_.n_theta()) +
                             ", angle index " + std::to_string(p % grid_.n_theta()) +
                             ", component " + std::to_string(k % d_));
      }
    }
  }

  // Samples fn(t, theta, out) where out has d entries.
  template <typename Fn>
  static GridField sample(const CylinderGrid& grid, int components, Fn&& fn) {
    GridField f(grid, components);
    std::vector<double> buf(components);
    for (int i = 0; i < grid.n_t(); ++i)
      for (int j = 0; j < grid.n_theta(); ++j) {
        fn(grid.t(i), grid.theta(j), std::span<double>(buf));
        for (int c = 0; c < components; ++c) f(i, j, c) = buf[c];
      }
    return f;
  }

  template <typename Fn>
  static GridField sample_scalar(const CylinderGrid& grid, Fn&& fn) {
    GridField f(grid, 1);
    for (int i = 0; i < grid.n_t(); ++i)
      for (int j = 0; j < grid.n_theta(); ++j) f(i, j) = fn(grid.t(i), grid.theta(j));
    return f;
  }

  const CylinderGrid& grid() const { return grid_; }
  int components() const { return d_; }

  double& operator()(int i, int j, int c = 0) { return values_[offset(i, j) + c]; }
  double operator()(int i, int j, int c = 0) const { return values_[offset(i, j) + c]; }

  // The d components at one gridpoint.
  std::span<const double> at(int i, int j) const { return {values_.data() + offset(i, j), static_cast<std::size_t>(d_)}; }
  std::span<double> at(int i, int j) { return {values_.data() + offset(i, j), static_cast<std::size_t>(d_)}; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  GridField component(int c) const {
    GridField out(grid_, 1);
    for (std::size_t p = 0; p < grid_.points(); ++p) out.values_[p] = values_[p * d_ + c];
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  GridField& operator+=(const GridField& o) {
    check_compatible(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    check_compatible(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  GridField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double s, GridField a) { return a *= s; }

  // Pointwise product of a scalar field with this field.
  GridField scaled_by(const GridField& w) const {
    if (w.components() != 1 || !w.grid().same_as(grid_)) throw SizingError("weight must be a scalar field on the same grid");
    GridField out = *this;
    for (std::size_t p = 0; p < grid_.points(); ++p)
      for (int c = 0; c < d_; ++c) out.values_[p * d_ + c] *= w.values_[p];
    return out;
  }

  void check_compatible(const GridField& o) const {
    if (o.d_ != d_ || !o.grid_.same_as(grid_)) throw SizingError("grid fields have different shapes");
  }

private:
  static int check_components(int d) {
    if (d < 1) throw SizingError("grid field needs at least one component");
    return d;
  }
  std::size_t offset(int i, int j) const {
    return (static_cast<std::size_t>(i) * grid_.n_theta() + j) * static_cast<std::size_t>(d_);
  }

  CylinderGrid grid_;
  int d_;
  std::vector<double> values_;
};

namespace detail {

// Finite-difference weights for the derivative of order `order` at x0 on the
// given nodes (Fornberg's recursion).
inline std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

// Stencil (first node index, weights in units of h^-order) used at station i.
struct Stencil {
  int first;
  std::vector<double> weights;
};

// Interior: 5-point centred. Boundary: one-sided with 5 nodes for first
// derivatives and 6 nodes for second derivatives, so every station is
// fourth-order accurate.
inline Stencil t_stencil(int i, int n_t, int order) {
  const int width = order == 1 ? 5 : 6;
  int first;
  int count;
  if (i >= 2 && i <= n_t - 3) {
    first = i - 2;
    count = 5;
  } else {
    count = width;
    first = i < 2 ? 0 : n_t - width;
  }
  std::vector<double> nodes(count);
  for (int k = 0; k < count; ++k) nodes[k] = first + k;
  return {first, fd_weights(static_cast<double>(i), nodes, order)};
}

// Fourier differentiation matrices for even n on [0, 2pi).
inline std::vector<double> fourier_diff_matrix(int n, int order) {
  const double h = 2.0 * std::numbers::pi / n;
  std::vector<double> D(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const int d = j - k;
      const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
      double v;
      if (order == 1) {
        v = d == 0 ? 0.0 : 0.5 * sgn / std::tan(d * h / 2.0);
      } else {
        if (d == 0) {
          v = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
        } else {
          const double s = std::sin(d * h / 2.0);
          v = -0.5 * sgn / (s * s);
        }
      }
      D[static_cast<std::size_t>(j) * n + k] = v;
    }
  return D;
}

} // namespace detail

inline GridField differentiate(const GridField& field, Direction dir, int order) {
  if (order != 1 && order != 2) throw ParameterError("derivative order must be 1 or 2");
  const CylinderGrid& g = field.grid();
  const int d = field.components();
  const int nt = g.n_t();
  const int nth = g.n_theta();
  GridField out(g, d);

  if (dir == Direction::theta) {
    const std::vector<double> D = detail::fourier_diff_matrix(nth, order);
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < nth; ++j) {
        const double* row = D.data() + static_cast<std::size_t>(j) * nth;
        std::span<double> o = out.at(i, j);
        for (int k = 0; k < nth; ++k) {
          const double w = row[k];
          if (w == 0.0) continue;
          std::span<const double> v = field.at(i, k);
          for (int c = 0; c < d; ++c) o[c] += w * v[c];
        }
      }
    return out;
  }

  const int need = order == 1 ? 5 : 6;
  if (nt < need) throw SizingError("t-stencil does not fit: n_t = " + std::to_string(nt));
  const double scale = 1.0 / std::pow(g.h_t(), order);
  for (int i = 0; i < nt; ++i) {
    const detail::Stencil st = detail::t_stencil(i, nt, order);
    for (int j = 0; j < nth; ++j) {
      std::span<double> o = out.at(i, j);
      for (std::size_t s = 0; s < st.weights.size(); ++s) {
        const double w = st.weights[s] * scale;
        std::span<const double> v = field.at(st.first + static_cast<int>(s), j);
        for (int c = 0; c < d; ++c) o[c] += w * v[c];
      }
    }
  }
  return out;
}

// Trapezoid rule over the circle at one station (spectrally exact for
// trigonometric polynomials of degree < n_theta).
inline double circle_integral(const GridField& field, int station, int component = 0) {
  const CylinderGrid& g = field.grid();
  if (station < 0 || station >= g.n_t()) throw DomainError("circle station outside grid");
  double s = 0.0;
  for (int j = 0; j < g.n_theta(); ++j) s += field(station, j, component);
  return s * g.h_theta();
}

// Composite Simpson over equally spaced samples; three-eighths rule on the
// last three intervals when the interval count is odd.
inline double simpson(std::span<const double> y, double h) {
  const int n = static_cast<int>(y.size()) - 1;
  if (n < 2) throw SizingError("t-integration needs at least two intervals");
  int even_end = (n % 2 == 0) ? n : n - 3;
  double s = 0.0;
  if (even_end >= 2) {
    double acc = y[0] + y[even_end];
    for (int k = 1; k < even_end; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * y[k];
    s += acc * h / 3.0;
  }
  if (even_end != n) {
    const int a = even_end;
    s += 3.0 * h / 8.0 * (y[a] + 3.0 * y[a + 1] + 3.0 * y[a + 2] + y[a + 3]);
  }
  return s;
}

// Integral over the band [station i_lo, station i_hi] x S^1.
inline double band_integral(const GridField& field, int i_lo, int i_hi, int component = 0) {
  const CylinderGrid& g = field.grid();
  if (i_lo < 0 || i_hi >= g.n_t() || i_hi <= i_lo) throw DomainError("band outside grid");
  std::vector<double> rows(i_hi - i_lo + 1);
  for (int i = i_lo; i <= i_hi; ++i) rows[i - i_lo] = circle_integral(field, i, component);
  return simpson(rows, g.h_t());
}

// Band given by t-values; both ends must be grid stations.
inline double band_integral(const GridField& field, double t_lo, double t_hi, int component = 0) {
  const CylinderGrid& g = field.grid();
  if (t_lo < g.t_min() - 1e-12 || t_hi > g.t_max() + 1e-12) throw DomainError("band outside grid");
  return band_integral(field, g.station_index(t_lo), g.station_index(t_hi), component);
}

inline double cylinder_integral(const GridField& field, int component = 0) {
  return band_integral(field, 0, field.grid().n_t() - 1, component);
}

inline double weighted_cylinder_integral(const GridField& field, const GridField& weight, int component = 0) {
  return cylinder_integral(field.scaled_by(weight), component);
}

struct FourierModes {
  // field(t_station, theta) ~ cos_coeff[0] + sum_k cos_coeff[k] cos k theta + sin_coeff[k] sin k theta
  std::vector<double> cos_coeff;
  std::vector<double> sin_coeff; // sin_coeff[0] is always 0
  // RMS of the circle data not represented by modes 0..K.
  double remainder_rms = 0.0;
  // True when content exists outside the requested window.
  bool outside_window = false;
};

inline FourierModes fourier_modes(const GridField& field, int station, int K, int component = 0) {
  const CylinderGrid& g = field.grid();
  const int n = g.n_theta();
  if (K < 0 || 2 * K >= n)
    throw AliasingError("mode window K = " + std::to_string(K) + " reaches Nyquist for n_theta = " + std::to_string(n));
  if (station < 0 || station >= g.n_t()) throw DomainError("fourier station outside grid");
  FourierModes m;
  m.cos_coeff.assign(K + 1, 0.0);
  m.sin_coeff.assign(K + 1, 0.0);
  for (int j = 0; j < n; ++j) m.cos_coeff[0] += field(station, j, component);
  m.cos_coeff[0] /= n;
  for (int k = 1; k <= K; ++k) {
    double c = 0.0;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = field(station, j, component);
      c += v * std::cos(k * g.theta(j));
      s += v * std::sin(k * g.theta(j));
    }
    m.cos_coeff[k] = 2.0 * c / n;
    m.sin_coeff[k] = 2.0 * s / n;
  }
  double rss = 0.0;
  double norm = 0.0;
  for (int j = 0; j < n; ++j) {
    double rec = m.cos_coeff[0];
    for (int k = 1; k <= K; ++k) rec += m.cos_coeff[k] * std::cos(k * g.theta(j)) + m.sin_coeff[k] * std::sin(k * g.theta(j));
    const double v = field(station, j, component);
    rss += (v - rec) * (v - rec);
    norm += v * v;
  }
  m.remainder_rms = std::sqrt(rss / n);
  m.outside_window = m.remainder_rms > 1e-12 * std::max(1.0, std::sqrt(norm / n));
  return m;
}

} // namespace wnl
