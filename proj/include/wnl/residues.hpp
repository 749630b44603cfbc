#pragma once

// Conservation-law residues on the circles {t} x S^1.
//
//   tau1(f, c) = ( -2 int dH/dt - 4 int (H.A_ti) g^ij d_j f + int |H|^2 f_t ) . c
//   tau2(f, S) =   2 int (H . S f_t - dH/dt . S f) - 4 int (H.A_ti) g^ij (d_j f . S f)
//                + int |H|^2 (f_t . S f)
//
// Both integrals are linear in c and S, so one pass over a circle produces a
// vector V (tau1 = V . c) and an n x n matrix M (tau2 = sum S_ab M_ab). The
// sweep evaluates the whole standard basis from those moments.

#include <wnl/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wnl {

struct ResidueOptions {
  double defect_tol = 1e-6; // conformal defect allowed on the circle
  double abs_tol = 1e-6;    // "zero" threshold, absolute part
  double rel_tol = 1e-4;    // "zero" threshold, relative to the station scale
  int margin = 4;           // stations kept clear of each end
};

struct CircleMoments {
  int station = 0;
  double t = 0.0;
  std::vector<double> V; // tau1 integrand integrated over the circle
  std::vector<double> M; // row-major n x n, tau2 = sum S_ab M_ab
  double scale = 0.0;    // int |H|^2 + |grad H| over the circle
};

namespace detail {

inline int residue_station(const FundamentalForms& forms, double t, const ResidueOptions& opt) {
  const CylinderGrid& g = forms.grid();
  const int i = g.station_index(t);
  if (i < opt.margin || i > g.n_t() - 1 - opt.margin)
    throw DomainError("residue station t = " + std::to_string(t) + " is within " + std::to_string(opt.margin) +
                      " stations of the grid boundary");
  double d = 0.0;
  for (int j = 0; j < g.n_theta(); ++j) d = std::max(d, forms.conformal_defect(i, j));
  if (d > opt.defect_tol)
    throw ConformalityError("residue circle t = " + std::to_string(t) + " has conformal defect " + std::to_string(d) +
                            " above " + std::to_string(opt.defect_tol));
  return i;
}

} // namespace detail

inline CircleMoments circle_moments(const ImmersionField& imm, const FundamentalForms& F, double t,
                                    const ResidueOptions& opt = {}) {
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  const int nth = g.n_theta();
  const int i = detail::residue_station(F, t, opt);
  const DerivativeJets& J = imm.jets();

  // dH/dt on this circle from the t stencil, dH/dtheta from the Fourier matrix.
  const detail::Stencil st = detail::t_stencil(i, g.n_t(), 1);
  const double inv_ht = 1.0 / g.h_t();
  std::vector<double> Ht(static_cast<std::size_t>(nth) * n, 0.0), Hth(static_cast<std::size_t>(nth) * n, 0.0);
  for (int j = 0; j < nth; ++j)
    for (std::size_t k = 0; k < st.weights.size(); ++k)
      for (int c = 0; c < n; ++c) Ht[j * n + c] += st.weights[k] * F.H(st.first + static_cast<int>(k), j, c) * inv_ht;
  const std::vector<double> D = detail::fourier_diff_matrix(nth, 1);
  for (int j = 0; j < nth; ++j)
    for (int l = 0; l < nth; ++l) {
      const double w = D[j * nth + l];
      if (w == 0.0) continue;
      for (int c = 0; c < n; ++c) Hth[j * n + c] += w * F.H(i, l, c);
    }

  CircleMoments out;
  out.station = i;
  out.t = g.t(i);
  out.V.assign(n, 0.0);
  out.M.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> W(n);
  const double h = g.h_theta();
  for (int j = 0; j < nth; ++j) {
    auto H = F.H.at(i, j);
    auto f = imm.f().at(i, j);
    auto ft = J.f_t.at(i, j);
    auto fh = J.f_th.at(i, j);
    const std::span<const double> ht(&Ht[j * n], n), hth(&Hth[j * n], n);
    const double itt = F.ginv_tt(i, j), ith = F.ginv_tth(i, j), ihh = F.ginv_thth(i, j);
    const double a = vec::dot(H, F.A_tt.at(i, j));
    const double b = vec::dot(H, F.A_tth.at(i, j));
    const double H2 = vec::norm2(H);
    for (int c = 0; c < n; ++c) W[c] = a * (itt * ft[c] + ith * fh[c]) + b * (ith * ft[c] + ihh * fh[c]);
    for (int c = 0; c < n; ++c) out.V[c] += h * (-2.0 * ht[c] - 4.0 * W[c] + H2 * ft[c]);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        out.M[p * n + q] += h * (2.0 * H[p] * ft[q] - 2.0 * ht[p] * f[q] - 4.0 * W[p] * f[q] + H2 * ft[p] * f[q]);
    out.scale += h * (H2 + std::sqrt(vec::norm2(ht) + vec::norm2(hth)));
  }
  return out;
}

inline double tau1(const CircleMoments& m, std::span<const double> c) {
  if (c.size() != m.V.size()) throw ParameterError("tau1: direction has the wrong dimension");
  return vec::dot(m.V, c);
}

inline double tau2(const CircleMoments& m, std::span<const double> S) {
  const std::size_t n = m.V.size();
  if (S.size() != n * n) throw ParameterError("tau2: S must be n x n");
  double norm = 0.0, asym = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      norm = std::max(norm, std::abs(S[a * n + b]));
      asym = std::max(asym, std::abs(S[a * n + b] + S[b * n + a]));
    }
  if (asym > 1e-12 * std::max(norm, 1.0)) throw ParameterError("tau2: S is not skew-symmetric");
  double s = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) s += S[k] * m.M[k];
  return s;
}

inline double tau1(const ImmersionField& imm, const FundamentalForms& F, std::span<const double> c, double t,
                   const ResidueOptions& opt = {}) {
  if (static_cast<int>(c.size()) != imm.ambient_dim()) throw ParameterError("tau1: direction has the wrong dimension");
  return tau1(circle_moments(imm, F, t, opt), c);
}

inline double tau2(const ImmersionField& imm, const FundamentalForms& F, std::span<const double> S, double t,
                   const ResidueOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(imm.ambient_dim());
  if (S.size() != n * n) throw ParameterError("tau2: S must be n x n");
  return tau2(circle_moments(imm, F, t, opt), S);
}

// E_ij - E_ji, row-major.
inline std::vector<double> rotation_generator(int i, int j, int n) {
  std::vector<double> S(static_cast<std::size_t>(n) * n, 0.0);
  S[i * n + j] = 1.0;
  S[j * n + i] = -1.0;
  return S;
}

inline bool residue_is_zero(double value, double scale, const ResidueOptions& opt = {}) {
  return std::abs(value) <= std::max(opt.abs_tol, opt.rel_tol * scale);
}

struct ResidueReport {
  int ambient_dim = 0;
  std::vector<double> stations;
  std::vector<double> scale; // per station
  double scale_used = 0.0;   // largest station scale
  // tau1[c][s]: basis vector e_c at station s.
  std::vector<std::vector<double>> tau1;
  // tau2[k][s]: generator pairs[k] = (i, j), i < j, at station s.
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<double>> tau2;
  std::vector<double> max_t_variation_tau1;
  std::vector<double> max_t_variation_tau2;

  double max_abs() const {
    double m = 0.0;
    for (const auto* arr : {&tau1, &tau2})
      for (const auto& row : *arr)
        for (double v : row) m = std::max(m, std::abs(v));
    return m;
  }
  double max_variation() const {
    double m = 0.0;
    for (double v : max_t_variation_tau1) m = std::max(m, v);
    for (double v : max_t_variation_tau2) m = std::max(m, v);
    return m;
  }
  // Every entry passes the zero test at its own station.
  bool all_zero(const ResidueOptions& opt = {}) const {
    for (const auto* arr : {&tau1, &tau2})
      for (const auto& row : *arr)
        for (std::size_t s = 0; s < row.size(); ++s)
          if (!residue_is_zero(row[s], scale[s], opt)) return false;
    return true;
  }
};

inline ResidueReport residue_sweep(const ImmersionField& imm, const FundamentalForms& F, const std::vector<double>& stations,
                                   const ResidueOptions& opt = {}) {
  if (stations.size() < 3) throw ParameterError("residue sweep needs at least three stations");
  for (std::size_t s = 1; s < stations.size(); ++s)
    if (!(stations[s] > stations[s - 1])) throw ParameterError("residue stations must be strictly increasing");
  const int n = imm.ambient_dim();
  ResidueReport r;
  r.ambient_dim = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) r.pairs.emplace_back(i, j);
  r.tau1.assign(n, std::vector<double>(stations.size()));
  r.tau2.assign(r.pairs.size(), std::vector<double>(stations.size()));
  for (std::size_t s = 0; s < stations.size(); ++s) {
    const CircleMoments m = circle_moments(imm, F, stations[s], opt);
    r.stations.push_back(m.t);
    r.scale.push_back(m.scale);
    r.scale_used = std::max(r.scale_used, m.scale);
    for (int c = 0; c < n; ++c) r.tau1[c][s] = m.V[c];
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
      const auto [i, j] = r.pairs[k];
      r.tau2[k][s] = m.M[i * n + j] - m.M[j * n + i];
    }
  }
  auto spread = [](const std::vector<double>& row) {
    auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    return *hi - *lo;
  };
  for (const auto& row : r.tau1) r.max_t_variation_tau1.push_back(spread(row));
  for (const auto& row : r.tau2) r.max_t_variation_tau2.push_back(spread(row));
  return r;
}

// Both sides of the Gauss-Bonnet flux identity on [t1, t2]:
//   int_{t1} u_t dtheta - int_{t2} u_t dtheta  and  int int_{[t1,t2]} K e^{2u} dt dtheta.
// For a smooth immersion the two agree (with this sign).
struct GaussBonnetFlux {
  double flux_difference = 0.0;
  double curvature_integral = 0.0;
};

inline GaussBonnetFlux gauss_bonnet_flux(const FundamentalForms& F, double t1, double t2) {
  if (!(t1 < t2)) throw DomainError("Gauss-Bonnet flux needs t1 < t2");
  const CylinderGrid& g = F.grid();
  const int i1 = g.station_index(t1), i2 = g.station_index(t2);
  GaussBonnetFlux out;
  out.flux_difference = circle_integral(F.u_t, i1) - circle_integral(F.u_t, i2);
  out.curvature_integral = band_integral(F.K.scaled_by(area_density(F)), i1, i2);
  return out;
}

} // namespace wnl
