#pragma once

// Closed-form test immersions with exact derivative jets, inversion in a
// sphere, normal perturbations, and the plain-text immersion file format.

#include <wnl/geometry.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wnl {

enum class ExampleKind { flat_cover, catenoid, sphere, inverted_catenoid, cylinder, harmonic_graph, from_file };

inline std::string to_string(ExampleKind k) {
  switch (k) {
  case ExampleKind::flat_cover: return "flat_cover";
  case ExampleKind::catenoid: return "catenoid";
  case ExampleKind::sphere: return "sphere";
  case ExampleKind::inverted_catenoid: return "inverted_catenoid";
  case ExampleKind::cylinder: return "cylinder";
  case ExampleKind::harmonic_graph: return "harmonic_graph";
  case ExampleKind::from_file: return "from_file";
  }
  return "?";
}

inline ExampleKind parse_example_kind(std::string_view s) {
  for (ExampleKind k : {ExampleKind::flat_cover, ExampleKind::catenoid, ExampleKind::sphere, ExampleKind::inverted_catenoid,
                        ExampleKind::cylinder, ExampleKind::harmonic_graph, ExampleKind::from_file})
    if (to_string(k) == s) return k;
  throw ParameterError("unknown example kind '" + std::string(s) + "'");
}

// phi(t, theta) = cos(k theta + phase) * bump((t - center) / width), where
// bump(s) = exp(1 - 1 / (1 - s^2)) on |s| < 1 and 0 elsewhere.
struct PerturbMode {
  int k = 1;
  double phase = 0.0;
  double center = 0.0;
  double width = 1.0;
};

struct Perturbation {
  double amplitude = 0.0;
  PerturbMode mode;
};

struct ExampleSpec {
  ExampleKind kind = ExampleKind::catenoid;
  int m = 1;                  // flat_cover winding
  double scale = 1.0;
  int ambient_dim = 3;
  std::vector<double> center; // inversion centre for inverted_catenoid (defaults to the origin)
  double graph_amplitude = 0.1; // harmonic_graph: f = (cos, sin, t, eps Re g, eps Im g), g = exp(sign k z)
  int graph_mode = 1;
  int graph_sign = 1;
  std::string path;           // from_file
  std::optional<Perturbation> perturbation;
};

namespace detail {

struct JetPoint {
  std::vector<double> f, ft, fh, ftt, fth, fhh;
  explicit JetPoint(int n) : f(n, 0.0), ft(n, 0.0), fh(n, 0.0), ftt(n, 0.0), fth(n, 0.0), fhh(n, 0.0) {}
  void clear() {
    for (auto* v : {&f, &ft, &fh, &ftt, &fth, &fhh}) std::fill(v->begin(), v->end(), 0.0);
  }
};

template <typename Fn>
ImmersionField from_closed_form(const CylinderGrid& grid, int n, Fn&& eval) {
  GridField f(grid, n), ft(grid, n), fh(grid, n), ftt(grid, n), fth(grid, n), fhh(grid, n);
  JetPoint p(n);
  for (int i = 0; i < grid.n_t(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) {
      p.clear();
      eval(grid.t(i), grid.theta(j), p);
      for (int c = 0; c < n; ++c) {
        f(i, j, c) = p.f[c];
        ft(i, j, c) = p.ft[c];
        fh(i, j, c) = p.fh[c];
        ftt(i, j, c) = p.ftt[c];
        fth(i, j, c) = p.fth[c];
        fhh(i, j, c) = p.fhh[c];
      }
    }
  return ImmersionField(std::move(f), DerivativeJets{std::move(ft), std::move(fh), std::move(ftt), std::move(fth), std::move(fhh)});
}

} // namespace detail

// e^{-mt}/m (cos m theta, sin m theta, 0, ...)
inline ImmersionField flat_cover(const CylinderGrid& grid, int m, int n = 3) {
  if (m == 0) throw ParameterError("flat cover needs m != 0");
  return detail::from_closed_form(grid, n, [m](double t, double th, detail::JetPoint& p) {
    const double e = std::exp(-m * t);
    const double c = std::cos(m * th), s = std::sin(m * th);
    p.f[0] = e / m * c;
    p.f[1] = e / m * s;
    p.ft[0] = -e * c;
    p.ft[1] = -e * s;
    p.fh[0] = -e * s;
    p.fh[1] = e * c;
    p.ftt[0] = m * e * c;
    p.ftt[1] = m * e * s;
    p.fth[0] = m * e * s;
    p.fth[1] = -m * e * c;
    p.fhh[0] = -m * e * c;
    p.fhh[1] = -m * e * s;
  });
}

// scale (cosh t cos theta, cosh t sin theta, t)
inline ImmersionField catenoid(const CylinderGrid& grid, double scale = 1.0, int n = 3) {
  return detail::from_closed_form(grid, n, [scale](double t, double th, detail::JetPoint& p) {
    const double ch = std::cosh(t), sh = std::sinh(t);
    const double c = std::cos(th), s = std::sin(th);
    p.f = {scale * ch * c, scale * ch * s, scale * t};
    p.f.resize(p.ft.size(), 0.0);
    p.ft[0] = scale * sh * c;
    p.ft[1] = scale * sh * s;
    p.ft[2] = scale;
    p.fh[0] = -scale * ch * s;
    p.fh[1] = scale * ch * c;
    p.ftt[0] = scale * ch * c;
    p.ftt[1] = scale * ch * s;
    p.fth[0] = -scale * sh * s;
    p.fth[1] = scale * sh * c;
    p.fhh[0] = -scale * ch * c;
    p.fhh[1] = -scale * ch * s;
  });
}

// scale (sech t cos theta, sech t sin theta, tanh t)
inline ImmersionField sphere(const CylinderGrid& grid, double scale = 1.0, int n = 3) {
  return detail::from_closed_form(grid, n, [scale](double t, double th, detail::JetPoint& p) {
    const double se = 1.0 / std::cosh(t), ta = std::tanh(t);
    const double c = std::cos(th), s = std::sin(th);
    const double r = scale * se;
    const double r_t = -scale * se * ta;
    const double r_tt = scale * se * (ta * ta - se * se);
    p.f[0] = r * c;
    p.f[1] = r * s;
    p.f[2] = scale * ta;
    p.ft[0] = r_t * c;
    p.ft[1] = r_t * s;
    p.ft[2] = scale * se * se;
    p.fh[0] = -r * s;
    p.fh[1] = r * c;
    p.ftt[0] = r_tt * c;
    p.ftt[1] = r_tt * s;
    p.ftt[2] = -2.0 * scale * se * se * ta;
    p.fth[0] = -r_t * s;
    p.fth[1] = r_t * c;
    p.fhh[0] = -r * c;
    p.fhh[1] = -r * s;
  });
}

// scale (cos theta, sin theta, t)
inline ImmersionField cylinder(const CylinderGrid& grid, double scale = 1.0, int n = 3) {
  return detail::from_closed_form(grid, n, [scale](double t, double th, detail::JetPoint& p) {
    const double c = std::cos(th), s = std::sin(th);
    p.f[0] = scale * c;
    p.f[1] = scale * s;
    p.f[2] = scale * t;
    p.ft[2] = scale;
    p.fh[0] = -scale * s;
    p.fh[1] = scale * c;
    p.fhh[0] = -scale * c;
    p.fhh[1] = -scale * s;
  });
}

// (cos theta, sin theta, t, eps Re g, eps Im g) with g = exp(sign k (t + i theta)).
// Exactly conformal because g is holomorphic.
inline ImmersionField harmonic_graph(const CylinderGrid& grid, double eps, int k, int sign = 1) {
  const double sk = sign * k;
  return detail::from_closed_form(grid, 5, [=](double t, double th, detail::JetPoint& p) {
    const double c = std::cos(th), s = std::sin(th);
    const double e = eps * std::exp(sk * t);
    const double gr = e * std::cos(sk * th), gi = e * std::sin(sk * th);
    p.f = {c, s, t, gr, gi};
    p.ft = {0.0, 0.0, 1.0, sk * gr, sk * gi};
    // d/dtheta of g = i sk g
    p.fh = {-s, c, 0.0, -sk * gi, sk * gr};
    p.ftt = {0.0, 0.0, 0.0, sk * sk * gr, sk * sk * gi};
    p.fth = {0.0, 0.0, 0.0, -sk * sk * gi, sk * sk * gr};
    p.fhh = {-c, -s, 0.0, -sk * sk * gr, -sk * sk * gi};
  });
}

// Inversion in the unit sphere about p, x -> p + (x - p) / |x - p|^2, with the
// jets pushed through the chain rule. It is an involution.
inline ImmersionField invert(const ImmersionField& imm, std::span<const double> center, double min_distance = 1e-3) {
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  std::vector<double> p(n, 0.0);
  if (!center.empty()) {
    if (static_cast<int>(center.size()) != n) throw ParameterError("inversion centre has the wrong dimension");
    std::copy(center.begin(), center.end(), p.begin());
  }
  const DerivativeJets& J = imm.jets();
  GridField f(g, n), ft(g, n), fh(g, n), ftt(g, n), fth(g, n), fhh(g, n);
  std::vector<double> y(n);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      auto x = imm.f().at(i, j);
      for (int c = 0; c < n; ++c) y[c] = x[c] - p[c];
      const double r2 = vec::norm2(y);
      if (!(std::sqrt(r2) > min_distance))
        throw ProximityError("surface passes within " + std::to_string(std::sqrt(r2)) + " of the inversion centre at station " +
                             std::to_string(i));
      // dI[v] = v / r2 - 2 (y.v) y / r2^2
      auto dI = [&](std::span<const double> v, std::span<double> out) {
        const double yv = vec::dot(y, v);
        for (int c = 0; c < n; ++c) out[c] += v[c] / r2 - 2.0 * yv * y[c] / (r2 * r2);
      };
      // d2I[v, w] = -2 ((y.w) v + (y.v) w + (v.w) y) / r2^2 + 8 (y.v)(y.w) y / r2^3
      auto d2I = [&](std::span<const double> v, std::span<const double> w, std::span<double> out) {
        const double yv = vec::dot(y, v), yw = vec::dot(y, w), vw = vec::dot(v, w);
        for (int c = 0; c < n; ++c)
          out[c] += -2.0 * (yw * v[c] + yv * w[c] + vw * y[c]) / (r2 * r2) + 8.0 * yv * yw * y[c] / (r2 * r2 * r2);
      };
      for (int c = 0; c < n; ++c) f(i, j, c) = p[c] + y[c] / r2;
      auto a = J.f_t.at(i, j);
      auto b = J.f_th.at(i, j);
      dI(a, ft.at(i, j));
      dI(b, fh.at(i, j));
      dI(J.f_tt.at(i, j), ftt.at(i, j));
      d2I(a, a, ftt.at(i, j));
      dI(J.f_tth.at(i, j), fth.at(i, j));
      d2I(a, b, fth.at(i, j));
      dI(J.f_thth.at(i, j), fhh.at(i, j));
      d2I(b, b, fhh.at(i, j));
    }
  return ImmersionField(std::move(f), DerivativeJets{std::move(ft), std::move(fh), std::move(ftt), std::move(fth), std::move(fhh)},
                        imm.exact_jets());
}

// x -> R x + d applied to samples and jets. R is row-major n x n; an empty R
// means the identity.
inline ImmersionField affine_image(const ImmersionField& imm, std::span<const double> R, std::span<const double> d) {
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  if (!R.empty() && static_cast<int>(R.size()) != n * n) throw ParameterError("rotation has the wrong size");
  if (!d.empty() && static_cast<int>(d.size()) != n) throw ParameterError("translation has the wrong size");
  auto apply = [&](const GridField& in, bool translate) {
    GridField out(g, n);
    for (int i = 0; i < g.n_t(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        auto x = in.at(i, j);
        auto y = out.at(i, j);
        for (int r = 0; r < n; ++r) {
          double s = 0.0;
          if (R.empty()) s = x[r];
          else
            for (int c = 0; c < n; ++c) s += R[r * n + c] * x[c];
          y[r] = s + (translate && !d.empty() ? d[r] : 0.0);
        }
      }
    return out;
  };
  const DerivativeJets& J = imm.jets();
  return ImmersionField(apply(imm.f(), true),
                        DerivativeJets{apply(J.f_t, false), apply(J.f_th, false), apply(J.f_tt, false), apply(J.f_tth, false),
                                       apply(J.f_thth, false)},
                        imm.exact_jets());
}

inline ImmersionField scaled(const ImmersionField& imm, double lambda) {
  const int n = imm.ambient_dim();
  std::vector<double> R(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) R[k * n + k] = lambda;
  return affine_image(imm, R, {});
}

inline ImmersionField translated(const ImmersionField& imm, std::span<const double> d) { return affine_image(imm, {}, d); }

inline double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

inline double perturb_profile(const PerturbMode& mode, double t, double theta) {
  return std::cos(mode.k * theta + mode.phase) * bump((t - mode.center) / mode.width);
}

// Unit normal field: f_t x f_theta for n = 3; otherwise the normalised normal
// part of the last coordinate axis.
inline GridField unit_normal(const ImmersionField& imm) {
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  const FundamentalForms F = fundamental_forms(imm);
  GridField nu(g, n);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      auto a = imm.jets().f_t.at(i, j);
      auto b = imm.jets().f_th.at(i, j);
      auto out = nu.at(i, j);
      if (n == 3) {
        out[0] = a[1] * b[2] - a[2] * b[1];
        out[1] = a[2] * b[0] - a[0] * b[2];
        out[2] = a[0] * b[1] - a[1] * b[0];
      } else {
        std::vector<double> x(n, 0.0);
        x[n - 1] = 1.0;
        const double xt = x[n - 1] * a[n - 1], xh = x[n - 1] * b[n - 1];
        const double ct = F.ginv_tt(i, j) * xt + F.ginv_tth(i, j) * xh;
        const double ch = F.ginv_tth(i, j) * xt + F.ginv_thth(i, j) * xh;
        for (int c = 0; c < n; ++c) out[c] = x[c] - ct * a[c] - ch * b[c];
      }
      const double r = vec::norm(out);
      if (!(r > 1e-12)) throw ParameterError("no usable normal direction at station " + std::to_string(i));
      for (int c = 0; c < n; ++c) out[c] /= r;
    }
  return nu;
}

// f + amplitude * phi * nu; the result carries grid-operator jets.
inline ImmersionField perturb(const ImmersionField& imm, double amplitude, const PerturbMode& mode) {
  if (amplitude == 0.0) return imm;
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  const GridField nu = unit_normal(imm);
  GridField f = imm.f();
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double phi = amplitude * perturb_profile(mode, g.t(i), g.theta(j));
      for (int c = 0; c < n; ++c) f(i, j, c) += phi * nu(i, j, c);
    }
  ImmersionField out(std::move(f));
  try {
    (void)fundamental_forms(out);
  } catch (const ImmersionError& e) {
    throw ParameterError(std::string("perturbation amplitude too large: ") + e.what());
  }
  // A fold shows up as the perturbed tangent frame turning against the base one.
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      auto a = imm.jets().f_t.at(i, j), b = imm.jets().f_th.at(i, j);
      auto pa = out.jets().f_t.at(i, j), pb = out.jets().f_th.at(i, j);
      const double d = vec::dot(pa, a) * vec::dot(pb, b) - vec::dot(pa, b) * vec::dot(pb, a);
      if (!(d > 1e-8 * vec::norm(a) * vec::norm(b) * vec::norm(pa) * vec::norm(pb)))
        throw ParameterError("perturbation amplitude too large: surface folds at station " + std::to_string(i));
    }
  return out;
}

// ---- immersion file format -------------------------------------------------
//
//   WNL1 n_t n_theta n t_min t_max
//   n_t * n_theta lines of n decimal floats, t-major (all angles of station 0 first)

inline std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline void save_immersion(const ImmersionField& imm, std::ostream& os) {
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  os << "WNL1 " << g.n_t() << ' ' << g.n_theta() << ' ' << n << ' ' << format_double(g.t_min()) << ' '
     << format_double(g.t_max()) << '\n';
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      for (int c = 0; c < n; ++c) os << (c ? " " : "") << format_double(imm.f()(i, j, c));
      os << '\n';
    }
}

inline void save_immersion(const ImmersionField& imm, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FileFormatError("cannot open '" + path + "' for writing");
  save_immersion(imm, os);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && (s[k] == ' ' || s[k] == '\t' || s[k] == '\r')) ++k;
    std::size_t e = k;
    while (e < s.size() && s[e] != ' ' && s[e] != '\t' && s[e] != '\r') ++e;
    if (e > k) out.push_back(s.substr(k, e - k));
    k = e;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& where) {
  T v{};
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
    throw FileFormatError(where + ": cannot parse '" + std::string(tok) + "'");
  return v;
}

} // namespace detail

inline ImmersionField load_immersion(std::istream& is, const std::optional<CylinderGrid>& expected = std::nullopt) {
  std::string line;
  if (!std::getline(is, line)) throw FileFormatError("empty immersion file");
  auto head = detail::split_ws(line);
  if (head.size() != 6 || head[0] != "WNL1") throw FileFormatError("line 1: expected header 'WNL1 n_t n_theta n t_min t_max'");
  const int nt = detail::parse_number<int>(head[1], "line 1");
  const int nth = detail::parse_number<int>(head[2], "line 1");
  const int n = detail::parse_number<int>(head[3], "line 1");
  const double a = detail::parse_number<double>(head[4], "line 1");
  const double b = detail::parse_number<double>(head[5], "line 1");
  if (n < 3) throw FileFormatError("line 1: ambient dimension must be at least 3");
  std::optional<CylinderGrid> grid;
  try {
    grid.emplace(a, b, nt, nth);
  } catch (const Error& e) {
    throw FileFormatError(std::string("line 1: ") + e.what());
  }
  if (expected && !expected->same_as(*grid)) throw FileFormatError("file grid does not match the requested grid");

  std::vector<double> values;
  values.reserve(grid->points() * n);
  for (std::size_t p = 0; p < grid->points(); ++p) {
    const std::string where = "line " + std::to_string(p + 2);
    if (!std::getline(is, line)) throw FileFormatError(where + ": unexpected end of file");
    auto toks = detail::split_ws(line);
    if (static_cast<int>(toks.size()) != n)
      throw FileFormatError(where + ": expected " + std::to_string(n) + " values, found " + std::to_string(toks.size()));
    for (int c = 0; c < n; ++c) {
      const double v = detail::parse_number<double>(toks[c], where);
      if (!std::isfinite(v))
        throw FileFormatError(where + " (station " + std::to_string(p / nth) + ", angle index " + std::to_string(p % nth) +
                              ", component " + std::to_string(c) + "): non-finite value");
      values.push_back(v);
    }
  }
  while (std::getline(is, line))
    if (!detail::split_ws(line).empty()) throw FileFormatError("trailing data after the last sample line");
  return ImmersionField(GridField(*grid, n, std::move(values)));
}

inline ImmersionField load_immersion(const std::string& path, const std::optional<CylinderGrid>& expected = std::nullopt) {
  std::ifstream is(path);
  if (!is) throw FileFormatError("cannot open '" + path + "'");
  return load_immersion(is, expected);
}

inline ImmersionField make_example(const ExampleSpec& spec, const CylinderGrid& grid) {
  if (spec.scale <= 0.0) throw ParameterError("scale must be positive");
  if (spec.ambient_dim < 3) throw ParameterError("ambient dimension must be at least 3");
  auto base = [&]() -> ImmersionField {
    switch (spec.kind) {
    case ExampleKind::flat_cover: {
      ImmersionField f = flat_cover(grid, spec.m, spec.ambient_dim);
      return spec.scale == 1.0 ? f : scaled(f, spec.scale);
    }
    case ExampleKind::catenoid: return catenoid(grid, spec.scale, spec.ambient_dim);
    case ExampleKind::sphere: return sphere(grid, spec.scale, spec.ambient_dim);
    case ExampleKind::cylinder: return cylinder(grid, spec.scale, spec.ambient_dim);
    case ExampleKind::inverted_catenoid: return invert(catenoid(grid, spec.scale, spec.ambient_dim), spec.center);
    case ExampleKind::harmonic_graph: return harmonic_graph(grid, spec.graph_amplitude, spec.graph_mode, spec.graph_sign);
    case ExampleKind::from_file: return load_immersion(spec.path, grid);
    }
    throw ParameterError("unknown example kind");
  }();
  if (spec.perturbation && spec.perturbation->amplitude != 0.0)
    return perturb(base, spec.perturbation->amplitude, spec.perturbation->mode);
  return base;
}

} // namespace wnl
