#pragma once

// Segment energies on a neck and what can be read off them: three-circle
// verdicts, the two-sided decay bound obtained by escalation, a fitted decay
// rate, the Pohozaev gap of the Gauss map and the H-versus-A dichotomy.
//
// Segments are Q_i = [t_start + (i-1)L, t_start + iL] x S^1, i = 1..k. Every
// endpoint must be a grid station.

#include <wnl/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wnl {

enum class EnergyKind { A, H };

inline const char* to_string(EnergyKind w) { return w == EnergyKind::A ? "A" : "H"; }

struct SegmentProfile {
  double L = 0.0;
  int k = 0;
  double t_start = 0.0;
  std::vector<double> phi_A;          // int_{Q_i} |A|^2 dV
  std::vector<double> phi_H;          // int_{Q_i} |H|^2 dV
  std::vector<double> ratio_H_over_A; // 0 when both vanish, +inf when only phi_A does
  std::vector<double> sup_grad_v;     // max over Q_i of |grad v|, v = u + m t

  const std::vector<double>& phi(EnergyKind w) const { return w == EnergyKind::A ? phi_A : phi_H; }
};

inline SegmentProfile segment_energies(const FundamentalForms& F, double L, int k, double t_start) {
  const CylinderGrid& g = F.grid();
  if (!(L > 0.0)) throw ParameterError("segment length L must be positive");
  if (k < 1) throw ParameterError("segment count must be positive");
  const double t_end = t_start + k * L;
  if (t_start < g.t_min() - 1e-9 || t_end > g.t_max() + 1e-9)
    throw DomainError("segments [" + std::to_string(t_start) + ", " + std::to_string(t_end) + "] leave the grid");

  GridField dA(g, 1), dH(g, 1), gradv(g, 1);
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double e2u = std::sqrt(F.detg(i, j));
      dA(i, j) = F.normA2(i, j) * e2u;
      dH(i, j) = vec::norm2(F.H.at(i, j)) * e2u;
      const double vt = F.u_t(i, j) + F.winding;
      gradv(i, j) = std::hypot(vt, F.u_th(i, j));
    }

  SegmentProfile p;
  p.L = L;
  p.k = k;
  p.t_start = t_start;
  for (int s = 1; s <= k; ++s) {
    const int lo = g.station_index(t_start + (s - 1) * L);
    const int hi = g.station_index(t_start + s * L);
    const double a = band_integral(dA, lo, hi);
    const double h = band_integral(dH, lo, hi);
    p.phi_A.push_back(a);
    p.phi_H.push_back(h);
    p.ratio_H_over_A.push_back(a > 0.0 ? h / a : (h > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
    double sup = 0.0;
    for (int i = lo; i <= hi; ++i)
      for (int j = 0; j < g.n_theta(); ++j) sup = std::max(sup, gradv(i, j));
    p.sup_grad_v.push_back(sup);
  }
  return p;
}

struct SegmentVerdict {
  int i = 0; // 1-based segment index, 2..k-1
  bool holds = false;
  double lhs = 0.0; // Phi_i
  double rhs = 0.0; // e^{-qL} (Phi_{i-1} + Phi_{i+1})
  double margin = 0.0;
};

// Phi_i <= e^{-qL} (Phi_{i-1} + Phi_{i+1}) at every interior segment.
inline std::vector<SegmentVerdict> three_circle_verdict(std::span<const double> phi, double L, double q) {
  if (phi.size() < 3) throw ParameterError("three-circle verdicts need at least three segments");
  const double w = std::exp(-q * L);
  std::vector<SegmentVerdict> out;
  for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
    SegmentVerdict v;
    v.i = static_cast<int>(i) + 1;
    v.lhs = phi[i];
    v.rhs = w * (phi[i - 1] + phi[i + 1]);
    v.margin = v.rhs - v.lhs;
    v.holds = v.lhs <= v.rhs;
    out.push_back(v);
  }
  return out;
}

inline std::vector<SegmentVerdict> three_circle_verdict(const SegmentProfile& p, EnergyKind which, double q) {
  return three_circle_verdict(p.phi(which), p.L, q);
}

// Smallest i0 such that every verdict with index i > i0 holds; -1 when the
// last interior verdict fails.
inline int onset_index(const std::vector<SegmentVerdict>& v) {
  if (v.empty()) return -1;
  if (!v.back().holds) return -1;
  int i0 = v.front().i - 1;
  for (const auto& x : v)
    if (!x.holds) i0 = x.i;
  return i0;
}

struct LadderBound {
  bool ok = false;
  int violating_index = -1; // first interior segment whose verdict fails (1-based)
  double C = 0.0;           // constant in Phi_i <= C (e^{-(i-1)q'L} Phi_1 + e^{-(k-i)q'L} Phi_k)
  double C_observed = 0.0;  // smallest constant that works for this sequence
  bool verified = false;    // bound re-checked on every segment
  std::vector<double> bound;
};

// Escalation: with Phi_i <= e^{-qL}(Phi_{i-1} + Phi_{i+1}) and 2 e^{-qL} < e^{-q'L},
// each interior Phi_i is beaten by a factor e^{q'L} on one side, and once the
// sequence grows to the right it keeps growing. Hence Phi decays from Phi_1 at
// rate q' up to some index and from Phi_k afterwards, which gives C = 1.
inline LadderBound ladder_decay(std::span<const double> phi, double L, double q, double q_prime) {
  if (!(q_prime < q)) throw ParameterError("ladder needs q' < q");
  if (!(q_prime > 0.0)) throw ParameterError("ladder needs q' > 0");
  if (!(std::exp(-(q - q_prime) * L) < 0.5))
    throw ParameterError("ladder needs e^{-(q - q')L} < 1/2; increase L or the gap q - q'");
  LadderBound r;
  for (const auto& v : three_circle_verdict(phi, L, q))
    if (!v.holds) {
      r.violating_index = v.i;
      return r;
    }
  const int k = static_cast<int>(phi.size());
  r.C = 1.0;
  r.verified = true;
  for (int i = 1; i <= k; ++i) {
    const double base = std::exp(-(i - 1) * q_prime * L) * phi[0] + std::exp(-(k - i) * q_prime * L) * phi[k - 1];
    r.bound.push_back(r.C * base);
    if (phi[i - 1] > r.C * base * (1.0 + 1e-12) + 1e-300) r.verified = false;
    if (base > 0.0) r.C_observed = std::max(r.C_observed, phi[i - 1] / base);
    else if (phi[i - 1] > 0.0) r.C_observed = std::numeric_limits<double>::infinity();
  }
  r.ok = r.verified;
  return r;
}

inline LadderBound ladder_decay(const SegmentProfile& p, EnergyKind which, double q, double q_prime) {
  return ladder_decay(p.phi(which), p.L, q, q_prime);
}

// Random sequence satisfying Phi_i <= e^{-qL}(Phi_{i-1} + Phi_{i+1}) for all
// interior i. Proposal: a few exponentials decaying from either end at rates
// in [q, q + 1.5] (each satisfies the inequality, and it is linear), times 5%
// multiplicative noise; proposals failing the inequality are rejected.
template <typename Rng>
std::vector<double> random_three_circle_sequence(int k, double L, double q, Rng& rng, int max_attempts = 100000) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<int> terms(1, 3);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<double> phi(k, 0.0);
    for (int side = 0; side < 2; ++side) {
      const int n = terms(rng);
      for (int t = 0; t < n; ++t) {
        const double rate = q + 1.5 * U(rng);
        const double amp = std::exp(4.0 * (U(rng) - 0.5));
        for (int i = 1; i <= k; ++i) {
          const double d = side == 0 ? (i - 1) : (k - i);
          phi[i - 1] += amp * std::exp(-rate * d * L);
        }
      }
    }
    for (double& x : phi) x *= 1.0 + 0.05 * (2.0 * U(rng) - 1.0);
    bool good = true;
    for (const auto& v : three_circle_verdict(phi, L, q))
      if (!v.holds) {
        good = false;
        break;
      }
    if (good) return phi;
  }
  throw ParameterError("could not draw a sequence satisfying the three-circle inequality");
}

struct DecayFit {
  double q_hat = 0.0;
  double C_left = 0.0;
  double C_right = 0.0;
  double rms_log_residual = 0.0;
  double rss = 0.0;
  int i_lo = 0;
  int i_hi = 0;
};

// Grid search q in (0, 2] at step 1e-3; for each q, nonnegative least squares
// for Phi_i ~ C_left e^{-q i L} + C_right e^{-q (k-i) L} over i in [i_lo, i_hi]
// (1-based, inclusive).
inline DecayFit decay_fit(std::span<const double> phi, double L, int i_lo, int i_hi) {
  const int k = static_cast<int>(phi.size());
  if (i_lo < 1 || i_hi > k || i_hi - i_lo + 1 < 5) throw ParameterError("decay fit window needs at least 5 segments");
  int positive = 0;
  for (int i = i_lo; i <= i_hi; ++i) positive += phi[i - 1] > 0.0;
  if (positive < 5) throw ParameterError("decay fit window needs at least 5 segments with positive energy");

  const int n = i_hi - i_lo + 1;
  std::vector<double> x(n), y(n), d(n);
  for (int s = 0; s < n; ++s) d[s] = phi[i_lo - 1 + s];

  DecayFit best;
  best.rss = std::numeric_limits<double>::infinity();
  best.i_lo = i_lo;
  best.i_hi = i_hi;
  for (int step = 1; step <= 2000; ++step) {
    const double q = 1e-3 * step;
    double xx = 0, yy = 0, xy = 0, xd = 0, yd = 0;
    for (int s = 0; s < n; ++s) {
      const int i = i_lo + s;
      x[s] = std::exp(-q * i * L);
      y[s] = std::exp(-q * (k - i) * L);
      xx += x[s] * x[s];
      yy += y[s] * y[s];
      xy += x[s] * y[s];
      xd += x[s] * d[s];
      yd += y[s] * d[s];
    }
    auto rss_of = [&](double cl, double cr) {
      double r = 0.0;
      for (int s = 0; s < n; ++s) r += (d[s] - cl * x[s] - cr * y[s]) * (d[s] - cl * x[s] - cr * y[s]);
      return r;
    };
    // Candidates: the unconstrained solution if feasible, and both one-sided fits.
    double cand_cl[3] = {std::max(0.0, xd / xx), 0.0, -1.0};
    double cand_cr[3] = {0.0, std::max(0.0, yd / yy), -1.0};
    const double det = xx * yy - xy * xy;
    if (det > 1e-14 * xx * yy) {
      const double cl = (yy * xd - xy * yd) / det, cr = (xx * yd - xy * xd) / det;
      if (cl >= 0.0 && cr >= 0.0) {
        cand_cl[2] = cl;
        cand_cr[2] = cr;
      }
    }
    for (int c = 0; c < 3; ++c) {
      if (cand_cl[c] < 0.0) continue;
      const double r = rss_of(cand_cl[c], cand_cr[c]);
      if (r < best.rss) {
        best.rss = r;
        best.q_hat = q;
        best.C_left = cand_cl[c];
        best.C_right = cand_cr[c];
      }
    }
  }
  double sum = 0.0;
  int cnt = 0;
  for (int s = 0; s < n; ++s) {
    const int i = i_lo + s;
    const double model = best.C_left * std::exp(-best.q_hat * i * L) + best.C_right * std::exp(-best.q_hat * (k - i) * L);
    if (d[s] > 0.0 && model > 0.0) {
      const double r = std::log(d[s]) - std::log(model);
      sum += r * r;
      ++cnt;
    }
  }
  best.rms_log_residual = cnt ? std::sqrt(sum / cnt) : 0.0;
  return best;
}

inline DecayFit decay_fit(const SegmentProfile& p, EnergyKind which, int i_lo, int i_hi) {
  return decay_fit(p.phi(which), p.L, i_lo, i_hi);
}

struct PohozaevGap {
  GridField gap;   // |d_t N|^2 - |d_theta N|^2
  GridField bound; // e^{2u} |A| |H|
  double max_ratio = 0.0;      // max |gap| / bound where bound > 1e-14
  double identity_error = 0.0; // max |gap - e^{-2u} (|A_tt|^2 - |A_thth|^2)|
};

// In conformal gauge |A_tt|^2 - |A_thth|^2 = (A_tt + A_thth).(A_tt - A_thth),
// so the ratio never exceeds sqrt 2.
inline PohozaevGap pohozaev_gap(const FundamentalForms& F, const GaussMapField& G) {
  const CylinderGrid& g = F.grid();
  PohozaevGap out{G.gap, GridField(g, 1), 0.0, 0.0};
  for (int i = 0; i < g.n_t(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double e2u = std::sqrt(F.detg(i, j));
      const double b = e2u * std::sqrt(F.normA2(i, j)) * vec::norm(F.H.at(i, j));
      out.bound(i, j) = b;
      const double gap = G.gap(i, j);
      if (b > 1e-14) out.max_ratio = std::max(out.max_ratio, std::abs(gap) / b);
      const double ident = (vec::norm2(F.A_tt.at(i, j)) - vec::norm2(F.A_thth.at(i, j))) / e2u;
      out.identity_error = std::max(out.identity_error, std::abs(gap - ident));
    }
  return out;
}

enum class Dominance { H_dominated, A_dominated, both_zero };

inline const char* to_string(Dominance d) {
  switch (d) {
  case Dominance::H_dominated: return "H-dominated";
  case Dominance::A_dominated: return "A-dominated";
  case Dominance::both_zero: return "both-zero";
  }
  return "?";
}

struct DominanceLabel {
  int i = 0; // interior segment, 1-based
  Dominance label = Dominance::both_zero;
  double sum_A = 0.0; // over Q_{i-1} u Q_i u Q_{i+1}
  double sum_H = 0.0;
};

// H-dominated when int|A|^2 <= (1/delta) int|H|^2 on the triple, A-dominated otherwise.
inline std::vector<DominanceLabel> h_vs_a_ratio(const SegmentProfile& p, double delta = 0.1, double zero_tol = 1e-14) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  if (p.k < 3) throw ParameterError("dominance labels need at least three segments");
  std::vector<DominanceLabel> out;
  for (int i = 2; i < p.k; ++i) {
    DominanceLabel d;
    d.i = i;
    d.sum_A = p.phi_A[i - 2] + p.phi_A[i - 1] + p.phi_A[i];
    d.sum_H = p.phi_H[i - 2] + p.phi_H[i - 1] + p.phi_H[i];
    if (d.sum_A <= zero_tol && d.sum_H <= zero_tol) d.label = Dominance::both_zero;
    else d.label = d.sum_A <= d.sum_H / delta ? Dominance::H_dominated : Dominance::A_dominated;
    out.push_back(d);
  }
  return out;
}

} // namespace wnl
