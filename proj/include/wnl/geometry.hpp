#pragma once

// Second-order geometry of an immersion f : [t_min, t_max] x S^1 -> R^n.
//
// Everything pointwise is computed from the derivative jets (f_t, f_theta,
// f_tt, f_ttheta, f_thetatheta). Catalog surfaces supply exact jets; any other
// field gets jets from the grid operators in cylgrid.hpp.

#include <wnl/cylgrid.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wnl {

namespace vec {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}
inline double norm2(std::span<const double> a) { return dot(a, a); }
inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace vec

// Index of e_i ^ e_j (i < j) in the lexicographic basis of Lambda^2 R^n.
inline int wedge_index(int i, int j, int n) { return i * n - i * (i + 1) / 2 + (j - i - 1); }
inline int wedge_dim(int n) { return n * (n - 1) / 2; }

struct DerivativeJets {
  GridField f_t;
  GridField f_th;
  GridField f_tt;
  GridField f_tth;
  GridField f_thth;
};

inline DerivativeJets numeric_jets(const GridField& f) {
  GridField f_t = differentiate(f, Direction::t, 1);
  GridField f_th = differentiate(f, Direction::theta, 1);
  GridField f_tt = differentiate(f, Direction::t, 2);
  GridField f_tth = differentiate(f_t, Direction::theta, 1);
  GridField f_thth = differentiate(f, Direction::theta, 2);
  return {std::move(f_t), std::move(f_th), std::move(f_tt), std::move(f_tth), std::move(f_thth)};
}

class ImmersionField {
public:
  // Jets from the grid operators.
  explicit ImmersionField(GridField f) : f_(std::move(f)), jets_(numeric_jets(f_)), exact_jets_(false) { check(); }

  // Jets supplied by the caller; `exact` records whether they are closed-form.
  ImmersionField(GridField f, DerivativeJets jets, bool exact = true)
      : f_(std::move(f)), jets_(std::move(jets)), exact_jets_(exact) {
    check();
  }

  const CylinderGrid& grid() const { return f_.grid(); }
  int ambient_dim() const { return f_.components(); }
  const GridField& f() const { return f_; }
  const DerivativeJets& jets() const { return jets_; }
  bool exact_jets() const { return exact_jets_; }

  // Same samples with jets recomputed from the grid operators.
  ImmersionField with_numeric_jets() const { return ImmersionField(f_); }

private:
  void check() const {
    if (f_.components() < 3) throw ParameterError("ambient dimension must be at least 3");
    for (const GridField* g : {&jets_.f_t, &jets_.f_th, &jets_.f_tt, &jets_.f_tth, &jets_.f_thth}) f_.check_compatible(*g);
  }

  GridField f_;
  DerivativeJets jets_;
  bool exact_jets_;
};

struct FundamentalForms {
  GridField g_tt, g_tth, g_thth;
  GridField ginv_tt, ginv_tth, ginv_thth;
  GridField detg;
  GridField u;    // 1/4 log(g_tt g_thth); equals the log conformal factor in conformal gauge
  GridField u_t;  // exact derivatives of u from the jets
  GridField u_th;
  GridField conformal_defect;
  GridField A_tt, A_tth, A_thth; // normal parts of the second derivatives, R^n-valued
  GridField H;                   // g^{ij} A_ij
  GridField normA2;              // g^{ik} g^{jl} A_ij . A_kl
  GridField K;
  int winding = 0;          // m in u = -m t + v
  double winding_raw = 0.0; // -(1/2pi) circle integral of u_t at the midline
  bool winding_ambiguous = false;
  GridField v; // u + m t

  double max_defect() const { return conformal_defect.max_abs(); }
  const CylinderGrid& grid() const { return u.grid(); }
};

inline FundamentalForms fundamental_forms(const ImmersionField& imm) {
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  const DerivativeJets& J = imm.jets();
  FundamentalForms F{GridField(g, 1), GridField(g, 1), GridField(g, 1), GridField(g, 1), GridField(g, 1),
                     GridField(g, 1), GridField(g, 1), GridField(g, 1), GridField(g, 1), GridField(g, 1),
                     GridField(g, 1), GridField(g, n), GridField(g, n), GridField(g, n), GridField(g, n),
                     GridField(g, 1), GridField(g, 1), 0, 0.0, false, GridField(g, 1)};

  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      auto ft = J.f_t.at(i, j);
      auto fh = J.f_th.at(i, j);
      const double gtt = vec::dot(ft, ft);
      const double gth = vec::dot(ft, fh);
      const double ghh = vec::dot(fh, fh);
      const double det = gtt * ghh - gth * gth;
      if (!(det > 1e-13 * gtt * ghh) || !(gtt > 0.0))
        throw ImmersionError("degenerate metric at station " + std::to_string(i) + ", angle index " + std::to_string(j));
      const double itt = ghh / det;
      const double ith = -gth / det;
      const double ihh = gtt / det;
      F.g_tt(i, j) = gtt;
      F.g_tth(i, j) = gth;
      F.g_thth(i, j) = ghh;
      F.ginv_tt(i, j) = itt;
      F.ginv_tth(i, j) = ith;
      F.ginv_thth(i, j) = ihh;
      F.detg(i, j) = det;
      F.u(i, j) = 0.25 * std::log(gtt * ghh);
      F.conformal_defect(i, j) = std::max(std::abs(gtt - ghh), std::abs(gth)) / gtt;

      auto ftt = J.f_tt.at(i, j);
      auto fth = J.f_tth.at(i, j);
      auto fhh = J.f_thth.at(i, j);
      F.u_t(i, j) = 0.5 * (vec::dot(ft, ftt) / gtt + vec::dot(fh, fth) / ghh);
      F.u_th(i, j) = 0.5 * (vec::dot(ft, fth) / gtt + vec::dot(fh, fhh) / ghh);

      // A_ij = f_ij - g^{kl} (f_ij . f_k) f_l
      auto normal_part = [&](std::span<const double> x, std::span<double> out) {
        const double xt = vec::dot(x, ft);
        const double xh = vec::dot(x, fh);
        const double ct = itt * xt + ith * xh;
        const double ch = ith * xt + ihh * xh;
        for (int c = 0; c < n; ++c) out[c] = x[c] - ct * ft[c] - ch * fh[c];
      };
      normal_part(ftt, F.A_tt.at(i, j));
      normal_part(fth, F.A_tth.at(i, j));
      normal_part(fhh, F.A_thth.at(i, j));
      auto Att = F.A_tt.at(i, j);
      auto Ath = F.A_tth.at(i, j);
      auto Ahh = F.A_thth.at(i, j);
      auto H = F.H.at(i, j);
      for (int c = 0; c < n; ++c) H[c] = itt * Att[c] + 2.0 * ith * Ath[c] + ihh * Ahh[c];

      const double tt_tt = vec::dot(Att, Att);
      const double tt_th = vec::dot(Att, Ath);
      const double tt_hh = vec::dot(Att, Ahh);
      const double th_th = vec::dot(Ath, Ath);
      const double th_hh = vec::dot(Ath, Ahh);
      const double hh_hh = vec::dot(Ahh, Ahh);
      // |A|^2 = sum g^{ik} g^{jl} A_ij . A_kl, written out for the symmetric 2x2 case.
      F.normA2(i, j) = itt * itt * tt_tt + ihh * ihh * hh_hh + 2.0 * ith * ith * tt_hh +
                       4.0 * itt * ith * tt_th + 4.0 * ihh * ith * th_hh +
                       2.0 * (itt * ihh + ith * ith) * th_th;
      F.K(i, j) = (tt_hh - th_th) / det;
    }

  const int mid = (g.n_t() - 1) / 2;
  F.winding_raw = -circle_integral(F.u_t, mid) / (2.0 * std::numbers::pi);
  F.winding = static_cast<int>(std::lround(F.winding_raw));
  F.winding_ambiguous = std::abs(F.winding - F.winding_raw) > 0.2;
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) F.v(i, j) = F.u(i, j) + F.winding * g.t(i);
  return F;
}

struct GaussMapField {
  GridField N;      // e_t ^ e_theta in the lexicographic Lambda^2 basis
  GridField dN_t;   // d/dt of N, from the jets
  GridField dN_th;  // d/dtheta of N
  GridField energy_density; // |dN_t|^2 + |dN_th|^2
  GridField gap;            // |dN_t|^2 - |dN_th|^2
  GridField e_t;            // orthonormal tangent frame used for N
  GridField e_th;
};

// Orthonormal frame (e_t, e_theta) by Gram-Schmidt with e_t first, and its
// derivative along the jets. d_ft = derivative of f_t in the chosen direction,
// d_fh = derivative of f_theta.
namespace detail {

struct FramePoint {
  std::vector<double> e1, e2, de1, de2;
};

inline void frame_and_derivative(std::span<const double> ft, std::span<const double> fh, std::span<const double> d_ft,
                                 std::span<const double> d_fh, FramePoint& out) {
  const int n = static_cast<int>(ft.size());
  out.e1.assign(n, 0.0);
  out.e2.assign(n, 0.0);
  out.de1.assign(n, 0.0);
  out.de2.assign(n, 0.0);
  const double r1 = vec::norm(ft);
  for (int c = 0; c < n; ++c) out.e1[c] = ft[c] / r1;
  const double pe = vec::dot(d_ft, out.e1);
  for (int c = 0; c < n; ++c) out.de1[c] = (d_ft[c] - pe * out.e1[c]) / r1;

  const double s = vec::dot(fh, out.e1);
  std::vector<double> w(n), dw(n);
  for (int c = 0; c < n; ++c) w[c] = fh[c] - s * out.e1[c];
  const double ds = vec::dot(d_fh, out.e1) + vec::dot(fh, out.de1);
  for (int c = 0; c < n; ++c) dw[c] = d_fh[c] - ds * out.e1[c] - s * out.de1[c];
  const double r2 = vec::norm(w);
  for (int c = 0; c < n; ++c) out.e2[c] = w[c] / r2;
  const double pw = vec::dot(dw, out.e2);
  for (int c = 0; c < n; ++c) out.de2[c] = (dw[c] - pw * out.e2[c]) / r2;
}

inline void wedge_into(std::span<const double> a, std::span<const double> b, std::span<double> out, double scale) {
  const int n = static_cast<int>(a.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out[wedge_index(i, j, n)] += scale * (a[i] * b[j] - a[j] * b[i]);
}

} // namespace detail

inline GaussMapField gauss_map(const ImmersionField& imm, const FundamentalForms& forms) {
  (void)forms;
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  const int w = wedge_dim(n);
  const DerivativeJets& J = imm.jets();
  GaussMapField G{GridField(g, w), GridField(g, w), GridField(g, w), GridField(g, 1), GridField(g, 1),
                  GridField(g, n), GridField(g, n)};
  detail::FramePoint pt, ph;
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      detail::frame_and_derivative(J.f_t.at(i, j), J.f_th.at(i, j), J.f_tt.at(i, j), J.f_tth.at(i, j), pt);
      detail::frame_and_derivative(J.f_t.at(i, j), J.f_th.at(i, j), J.f_tth.at(i, j), J.f_thth.at(i, j), ph);
      detail::wedge_into(pt.e1, pt.e2, G.N.at(i, j), 1.0);
      detail::wedge_into(pt.de1, pt.e2, G.dN_t.at(i, j), 1.0);
      detail::wedge_into(pt.e1, pt.de2, G.dN_t.at(i, j), 1.0);
      detail::wedge_into(ph.de1, ph.e2, G.dN_th.at(i, j), 1.0);
      detail::wedge_into(ph.e1, ph.de2, G.dN_th.at(i, j), 1.0);
      const double a = vec::norm2(G.dN_t.at(i, j));
      const double b = vec::norm2(G.dN_th.at(i, j));
      G.energy_density(i, j) = a + b;
      G.gap(i, j) = a - b;
      for (int c = 0; c < n; ++c) {
        G.e_t(i, j, c) = pt.e1[c];
        G.e_th(i, j, c) = pt.e2[c];
      }
    }
  return G;
}

// Band of stations [i_lo, i_hi] for a t-interval; both ends must be stations.
struct Band {
  double t_lo;
  double t_hi;
};

inline GridField area_density(const FundamentalForms& forms) {
  GridField out(forms.grid(), 1);
  for (std::size_t p = 0; p < forms.grid().points(); ++p) out.values()[p] = std::sqrt(forms.detg.values()[p]);
  return out;
}

// W = integral of |H|^2 dV_g over the band.
inline double willmore_energy(const FundamentalForms& forms, std::optional<Band> band = std::nullopt) {
  const CylinderGrid& g = forms.grid();
  GridField dens(g, 1);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) dens(i, j) = vec::norm2(forms.H.at(i, j)) * std::sqrt(forms.detg(i, j));
  if (!band) return cylinder_integral(dens);
  return band_integral(dens, band->t_lo, band->t_hi);
}

// Integral of |A|^2 dV_g.
inline double total_curvature(const FundamentalForms& forms, std::optional<Band> band = std::nullopt) {
  GridField dens = forms.normA2.scaled_by(area_density(forms));
  if (!band) return cylinder_integral(dens);
  return band_integral(dens, band->t_lo, band->t_hi);
}

inline void require_conformal(const FundamentalForms& forms, double tol, const char* what) {
  const double d = forms.max_defect();
  if (d > tol)
    throw ConformalityError(std::string(what) + " needs a conformal immersion; conformal defect " + std::to_string(d) +
                            " exceeds " + std::to_string(tol));
}

struct ElResidual {
  GridField norm;     // pointwise |left side|, zero on excluded boundary stations
  int margin = 4;     // stations excluded at each end
  double max_interior = 0.0;
};

// Pointwise norm of 2 Lap H + 4 div(H.A_pq g^{ip} d_i f) - div(|H|^2 grad f),
// with flat Lap/div on the parameter domain (conformal gauge).
inline ElResidual el_residual(const ImmersionField& imm, const FundamentalForms& forms, double defect_tol = 1e-6,
                              int margin = 4) {
  require_conformal(forms, defect_tol, "el_residual");
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  const DerivativeJets& J = imm.jets();
  if (2 * margin >= g.n_t() - 1) throw SizingError("grid too short for the requested boundary margin");

  GridField Vt(g, n), Vh(g, n), Wt(g, n), Wh(g, n);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      auto H = forms.H.at(i, j);
      const double h_tt = vec::dot(H, forms.A_tt.at(i, j));
      const double h_th = vec::dot(H, forms.A_tth.at(i, j));
      const double h_hh = vec::dot(H, forms.A_thth.at(i, j));
      const double itt = forms.ginv_tt(i, j), ith = forms.ginv_tth(i, j), ihh = forms.ginv_thth(i, j);
      // V_q = sum_{p,i} (H.A_pq) g^{ip} d_i f
      const double vt_t = h_tt * itt + h_th * ith;
      const double vt_h = h_tt * ith + h_th * ihh;
      const double vh_t = h_th * itt + h_hh * ith;
      const double vh_h = h_th * ith + h_hh * ihh;
      const double H2 = vec::norm2(H);
      auto ft = J.f_t.at(i, j);
      auto fh = J.f_th.at(i, j);
      for (int c = 0; c < n; ++c) {
        Vt(i, j, c) = vt_t * ft[c] + vt_h * fh[c];
        Vh(i, j, c) = vh_t * ft[c] + vh_h * fh[c];
        Wt(i, j, c) = H2 * ft[c];
        Wh(i, j, c) = H2 * fh[c];
      }
    }
  GridField R = 2.0 * (differentiate(forms.H, Direction::t, 2) + differentiate(forms.H, Direction::theta, 2));
  R += 4.0 * (differentiate(Vt, Direction::t, 1) + differentiate(Vh, Direction::theta, 1));
  R -= differentiate(Wt, Direction::t, 1) + differentiate(Wh, Direction::theta, 1);

  ElResidual out{GridField(g, 1), margin, 0.0};
  for (int i = margin; i < g.n_t() - margin; ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double r = vec::norm(R.at(i, j));
      out.norm(i, j) = r;
      out.max_interior = std::max(out.max_interior, r);
    }
  return out;
}

struct GaussTension {
  GridField tension;    // tangential part of the flat Laplacian of N, in Lambda^2 R^n
  GridField dperpH_t;   // normal part of dH/dt
  GridField dperpH_th;  // normal part of dH/dtheta
  double max_tension = 0.0;
  double max_dperpH = 0.0;
  // max over interior points of |tension|_g / |grad-perp H|_g, where both are
  // measured in the induced metric; 0 when grad-perp H vanishes everywhere.
  double max_norm_ratio = 0.0;
  int margin = 4;
};

inline GaussTension gauss_tension(const ImmersionField& imm, const FundamentalForms& forms, const GaussMapField& gmap,
                                  double defect_tol = 1e-6, int margin = 4) {
  require_conformal(forms, defect_tol, "gauss_tension");
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  const int w = wedge_dim(n);
  GridField lapN = differentiate(gmap.dN_t, Direction::t, 1) + differentiate(gmap.dN_th, Direction::theta, 1);
  GridField dH_t = differentiate(forms.H, Direction::t, 1);
  GridField dH_th = differentiate(forms.H, Direction::theta, 1);

  GaussTension T{GridField(g, w), GridField(g, n), GridField(g, n), 0.0, 0.0, 0.0, margin};
  std::vector<double> x(n), y(n);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      auto e1 = gmap.e_t.at(i, j);
      auto e2 = gmap.e_th.at(i, j);
      auto perp = [&](std::span<double> z) {
        const double a = vec::dot(z, e1);
        const double b = vec::dot(z, e2);
        for (int c = 0; c < n; ++c) z[c] -= a * e1[c] + b * e2[c];
      };
      // P(X) = e1 ^ perp(X^T e1) + e2 ^ perp(X^T e2), X viewed as a skew matrix.
      auto X = lapN.at(i, j);
      auto contract = [&](std::span<const double> a, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int p = 0; p < n; ++p)
          for (int q = p + 1; q < n; ++q) {
            const double xv = X[wedge_index(p, q, n)];
            out[q] += a[p] * xv;
            out[p] -= a[q] * xv;
          }
      };
      contract(e1, x);
      perp(x);
      contract(e2, y);
      perp(y);
      auto out = T.tension.at(i, j);
      detail::wedge_into(e1, x, out, 1.0);
      detail::wedge_into(e2, y, out, 1.0);

      for (int c = 0; c < n; ++c) {
        T.dperpH_t(i, j, c) = dH_t(i, j, c);
        T.dperpH_th(i, j, c) = dH_th(i, j, c);
      }
      perp(T.dperpH_t.at(i, j));
      perp(T.dperpH_th.at(i, j));

      if (i < margin || i >= g.n_t() - margin) continue;
      const double e2u = std::sqrt(forms.detg(i, j));
      const double tn = vec::norm(out);
      const double dh = std::sqrt(vec::norm2(T.dperpH_t.at(i, j)) + vec::norm2(T.dperpH_th.at(i, j)));
      T.max_tension = std::max(T.max_tension, tn);
      T.max_dperpH = std::max(T.max_dperpH, dh);
      if (dh > 1e-12) T.max_norm_ratio = std::max(T.max_norm_ratio, (tn / e2u) / (dh / std::sqrt(e2u)));
    }
  return T;
}

} // namespace wnl
