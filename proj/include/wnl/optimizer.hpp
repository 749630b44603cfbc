#pragma once

// Steepest descent on the Willmore energy with clamped boundary rings.
//
// The gradient is the strong form of the first variation written for a
// general parametrization,
//
//   G = 2 d_j( sqrt(g) g^{ij} d_i H )
//     + 4 d_q( sqrt(g) (H.A_ij) g^{ip} g^{jq} d_p f )
//     -   d_q( sqrt(g) |H|^2 g^{pq} d_p f ),
//
// so that dW(f)[phi] = int G . phi dt dtheta for phi vanishing near both ends.
// In conformal gauge sqrt(g) g^{ij} = delta^{ij} and this reduces to the
// Euler-Lagrange operator used by el_residual.

#include <wnl/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace wnl {

// Rows kept fixed at each end of the grid during descent.
inline constexpr int clamp_rows = 2;

// Gradient of W as an R^n-valued field; zero on the clamped rows.
// `defect_tol` bounds the conformal defect accepted on input.
inline GridField willmore_gradient(const ImmersionField& imm, const FundamentalForms& F,
                                   double defect_tol = std::numeric_limits<double>::infinity()) {
  if (F.max_defect() > defect_tol)
    throw ConformalityError("willmore_gradient: conformal defect " + std::to_string(F.max_defect()) + " exceeds " +
                            std::to_string(defect_tol));
  const CylinderGrid& g = imm.grid();
  const int n = imm.ambient_dim();
  if (g.n_t() < 2 * clamp_rows + 1) throw SizingError("grid too short for clamped descent");
  const DerivativeJets& J = imm.jets();
  const GridField Ht = differentiate(F.H, Direction::t, 1);
  const GridField Hh = differentiate(F.H, Direction::theta, 1);

  GridField Xt(g, n), Xh(g, n);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double sg = std::sqrt(F.detg(i, j));
      const double itt = F.ginv_tt(i, j), ith = F.ginv_tth(i, j), ihh = F.ginv_thth(i, j);
      auto H = F.H.at(i, j);
      const double h_tt = vec::dot(H, F.A_tt.at(i, j));
      const double h_th = vec::dot(H, F.A_tth.at(i, j));
      const double h_hh = vec::dot(H, F.A_thth.at(i, j));
      // B = g^{-1} (H.A) g^{-1}
      const double a_tt = itt * h_tt + ith * h_th, a_th = itt * h_th + ith * h_hh;
      const double a_ht = ith * h_tt + ihh * h_th, a_hh = ith * h_th + ihh * h_hh;
      const double B_tt = a_tt * itt + a_th * ith;
      const double B_th = a_tt * ith + a_th * ihh;
      const double B_hh = a_ht * ith + a_hh * ihh;
      const double H2 = vec::norm2(H);
      auto ft = J.f_t.at(i, j);
      auto fh = J.f_th.at(i, j);
      auto dt = Ht.at(i, j);
      auto dh = Hh.at(i, j);
      for (int c = 0; c < n; ++c) {
        Xt(i, j, c) = sg * (2.0 * (itt * dt[c] + ith * dh[c]) + 4.0 * (B_tt * ft[c] + B_th * fh[c]) -
                            H2 * (itt * ft[c] + ith * fh[c]));
        Xh(i, j, c) = sg * (2.0 * (ith * dt[c] + ihh * dh[c]) + 4.0 * (B_th * ft[c] + B_hh * fh[c]) -
                            H2 * (ith * ft[c] + ihh * fh[c]));
      }
    }
  GridField G = differentiate(Xt, Direction::t, 1) + differentiate(Xh, Direction::theta, 1);
  for (int i = 0; i < g.n_t(); ++i) {
    if (i >= clamp_rows && i < g.n_t() - clamp_rows) continue;
    for (int j = 0; j < g.n_theta(); ++j)
      for (int c = 0; c < n; ++c) G(i, j, c) = 0.0;
  }
  return G;
}

// int a . b dt dtheta with the grid quadrature.
inline double l2_inner(const GridField& a, const GridField& b) {
  a.check_compatible(b);
  const CylinderGrid& g = a.grid();
  GridField d(g, 1);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) d(i, j) = vec::dot(a.at(i, j), b.at(i, j));
  return cylinder_integral(d);
}

enum class DescentStatus { converged, max_iterations, gauge_drift, stalled, immersion_lost };

inline std::string to_string(DescentStatus s) {
  switch (s) {
  case DescentStatus::converged: return "converged";
  case DescentStatus::max_iterations: return "max-iterations";
  case DescentStatus::gauge_drift: return "gauge-drift";
  case DescentStatus::stalled: return "stalled";
  case DescentStatus::immersion_lost: return "immersion-lost";
  }
  return "unknown";
}

struct TraceRow {
  int iteration = 0;
  double W = 0.0;
  double grad_norm = 0.0;
  double step = 0.0; // step accepted to reach this row (0 for the seed)
  double defect = 0.0;
};

struct DescentOptions {
  int max_iter = 500;
  double grad_tol = 1e-8;         // absolute, on the L2 gradient norm
  double armijo = 1e-4;
  int max_halvings = 40;
  double drift_tol = 1e-3;        // allowed growth of the conformal defect over the seed's
  double initial_step_factor = 1e-2;
  bool grow_step = true;          // double the trial step after every accepted step
};

struct DescentState {
  ImmersionField imm;
  double W = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int iteration = 0;
  double conformal_defect = 0.0;
  DescentStatus status = DescentStatus::max_iterations;
  std::string message;
  std::vector<TraceRow> trace;
};

inline void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os) {
  os << "iteration,W,gradnorm,step,defect\n";
  os.precision(17);
  for (const TraceRow& r : trace) os << r.iteration << ',' << r.W << ',' << r.grad_norm << ',' << r.step << ',' << r.defect << '\n';
}

namespace detail {

struct Evaluated {
  ImmersionField imm;
  FundamentalForms F;
  double W;
};

inline Evaluated evaluate(GridField f) {
  ImmersionField imm(std::move(f));
  FundamentalForms F = fundamental_forms(imm);
  const double W = willmore_energy(F);
  return {std::move(imm), std::move(F), W};
}

// Throws ImmersionError where the tangent frame of `next` turns against that of
// `prev`; a step through a fold leaves det g positive on the grid but flips
// the orientation.
inline void require_same_orientation(const ImmersionField& prev, const ImmersionField& next) {
  const CylinderGrid& g = prev.grid();
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      auto a = prev.jets().f_t.at(i, j), b = prev.jets().f_th.at(i, j);
      auto pa = next.jets().f_t.at(i, j), pb = next.jets().f_th.at(i, j);
      const double d = vec::dot(pa, a) * vec::dot(pb, b) - vec::dot(pa, b) * vec::dot(pb, a);
      if (!(d > 1e-8 * vec::norm(a) * vec::norm(b) * vec::norm(pa) * vec::norm(pb)))
        throw ImmersionError("descent step folds the surface at station " + std::to_string(i) + ", angle index " +
                             std::to_string(j));
    }
}

} // namespace detail

// Armijo backtracking descent on W along -G. The seed's samples are used with
// grid-operator jets so that every iterate is measured the same way.
inline DescentState synthesize_neck(const ImmersionField& seed, const DescentOptions& opt = {}) {
  if (opt.max_iter < 0 || !(opt.armijo > 0.0 && opt.armijo < 1.0) || opt.max_halvings < 1)
    throw ParameterError("invalid descent options");
  const CylinderGrid& g = seed.grid();
  detail::Evaluated cur = detail::evaluate(seed.f());
  const double seed_defect = cur.F.max_defect();

  DescentState st{cur.imm, cur.W, 0.0, 0.0, 0, seed_defect, DescentStatus::max_iterations, "", {}};
  GridField G = willmore_gradient(cur.imm, cur.F);
  double gg = l2_inner(G, G);
  st.grad_norm = std::sqrt(gg);
  st.trace.push_back({0, cur.W, st.grad_norm, 0.0, seed_defect});

  double sup = G.max_abs();
  double step = sup > 0.0 ? opt.initial_step_factor * std::pow(g.h_t(), 4) / sup : 0.0;
  for (int it = 1;; ++it) {
    if (st.grad_norm <= opt.grad_tol) {
      st.status = DescentStatus::converged;
      st.message = "gradient norm below tolerance";
      return st;
    }
    if (it > opt.max_iter) {
      st.status = DescentStatus::max_iterations;
      st.message = "iteration limit reached";
      return st;
    }
    bool accepted = false;
    std::string last_failure = "Armijo condition not met";
    bool degenerate = false;
    for (int h = 0; h <= opt.max_halvings; ++h, step *= 0.5) {
      GridField f = cur.imm.f();
      f -= step * G;
      try {
        detail::Evaluated trial = detail::evaluate(std::move(f));
        detail::require_same_orientation(cur.imm, trial.imm);
        if (trial.W <= cur.W - opt.armijo * step * gg) {
          cur = std::move(trial);
          accepted = true;
          break;
        }
        last_failure = "Armijo condition not met";
        degenerate = false;
      } catch (const ImmersionError& e) {
        last_failure = e.what();
        degenerate = true;
      }
    }
    if (!accepted) {
      st.status = degenerate ? DescentStatus::immersion_lost : DescentStatus::stalled;
      st.message = "line search failed after " + std::to_string(opt.max_halvings) + " halvings: " + last_failure;
      return st;
    }
    const double defect = cur.F.max_defect();
    if (defect - seed_defect > opt.drift_tol) {
      st.status = DescentStatus::gauge_drift;
      st.message = "conformal defect grew from " + std::to_string(seed_defect) + " to " + std::to_string(defect);
      return st;
    }
    G = willmore_gradient(cur.imm, cur.F);
    gg = l2_inner(G, G);
    st.imm = cur.imm;
    st.W = cur.W;
    st.grad_norm = std::sqrt(gg);
    st.step = step;
    st.iteration = it;
    st.conformal_defect = defect;
    st.trace.push_back({it, cur.W, st.grad_norm, step, defect});
    if (opt.grow_step) step *= 2.0;
  }
}

} // namespace wnl
