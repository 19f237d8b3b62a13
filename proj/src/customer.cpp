#include "ievrp/customer.hpp"

#include <algorithm>
#include <cmath>

namespace ievrp {

namespace {

constexpr double kTieTol = 1e-11;     // objective ties on the envelope
constexpr double kActiveTol = 1e-9;   // active-segment detection

// Vertices of the piecewise objective: interval ends plus every pairwise
// segment crossing inside (0, delta_cap). A convex piecewise-affine function
// attains its minimum on a face spanned by such points.
std::vector<double> envelope_vertices(const InconvenienceProfile& p) {
  std::vector<double> vs{0.0, p.delay_cap};
  const int n = p.segment_count();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      double dg = p.slopes[b] - p.slopes[a];
      if (dg == 0.0) continue;
      double cross = (p.intercepts[a] - p.intercepts[b]) / dg;
      if (cross > 0.0 && cross < p.delay_cap) vs.push_back(cross);
    }
  std::sort(vs.begin(), vs.end());
  return vs;
}

FollowerSolution response_at(const InconvenienceProfile& p, double q, double delay) {
  FollowerSolution sol;
  sol.delay = delay;
  sol.epigraph = inconvenience_value(p, delay);
  sol.objective = sol.epigraph - q * delay;
  sol.zeta.assign(p.segment_count(), 0.0);

  int lo = -1, hi = -1;
  for (int m = 0; m < p.segment_count(); ++m) {
    double slack = sol.epigraph - (p.slopes[m] * delay + p.intercepts[m]);
    if (slack <= kActiveTol) {
      if (lo < 0 || p.slopes[m] < p.slopes[lo]) lo = m;
      if (hi < 0 || p.slopes[m] > p.slopes[hi]) hi = m;
    }
  }

  // Multipliers: u only when pinned at the cap, v only at zero; zeta is a
  // convex combination over active segments whose mean slope matches the
  // stationarity target. Among valid choices u and v are kept minimal.
  double target;
  bool at_cap = delay >= p.delay_cap - kActiveTol;
  bool at_zero = delay <= kActiveTol;
  double gamma_lo = p.slopes[lo], gamma_hi = p.slopes[hi];
  if (at_cap) {
    target = std::clamp(q, gamma_lo, gamma_hi);
    sol.u = q - target;
    sol.v = 0.0;
  } else if (at_zero) {
    target = std::clamp(q, gamma_lo, gamma_hi);
    sol.u = 0.0;
    sol.v = target - q;
  } else {
    target = std::clamp(q, gamma_lo, gamma_hi);
    sol.u = 0.0;
    sol.v = 0.0;
  }
  if (hi == lo) {
    sol.zeta[lo] = 1.0;
  } else {
    double share = (target - gamma_lo) / (gamma_hi - gamma_lo);
    sol.zeta[hi] = share;
    sol.zeta[lo] = 1.0 - share;
  }
  return sol;
}

}  // namespace

double inconvenience_value(const InconvenienceProfile& profile, double delay) {
  if (delay < -1e-12 || delay > profile.delay_cap + 1e-12)
    throw Error("inconvenience_value: delay " + std::to_string(delay) +
                " outside [0, " + std::to_string(profile.delay_cap) + "]");
  double best = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < profile.segment_count(); ++m)
    best = std::max(best, profile.slopes[m] * delay + profile.intercepts[m]);
  return best;
}

FollowerSolution best_response(const InconvenienceProfile& profile, double q) {
  auto vs = envelope_vertices(profile);
  double fmin = std::numeric_limits<double>::infinity();
  for (double d : vs)
    fmin = std::min(fmin, inconvenience_value(profile, d) - q * d);
  double pick = 0.0;
  for (double d : vs)
    if (inconvenience_value(profile, d) - q * d <= fmin + kTieTol)
      pick = std::max(pick, d);
  return response_at(profile, q, pick);
}

double pessimistic_response(const InconvenienceProfile& profile, double q) {
  auto vs = envelope_vertices(profile);
  double fmin = std::numeric_limits<double>::infinity();
  for (double d : vs)
    fmin = std::min(fmin, inconvenience_value(profile, d) - q * d);
  double pick = profile.delay_cap;
  for (double d : vs)
    if (inconvenience_value(profile, d) - q * d <= fmin + kTieTol)
      pick = std::min(pick, d);
  return pick;
}

double KktResiduals::max() const {
  return std::max({stationarity_delta, stationarity_eps, comp_u, comp_v, comp_zeta,
                   primal_feasibility, dual_feasibility});
}

KktResiduals kkt_residuals(const InconvenienceProfile& profile, double q,
                           const FollowerSolution& sol) {
  KktResiduals r;
  double zeta_sum = 0.0, slope_dot = 0.0;
  for (int m = 0; m < profile.segment_count(); ++m) {
    zeta_sum += sol.zeta[m];
    slope_dot += profile.slopes[m] * sol.zeta[m];
  }
  r.stationarity_delta = std::abs(-q + sol.u - sol.v + slope_dot);
  r.stationarity_eps = std::abs(1.0 - zeta_sum);
  r.comp_u = std::abs(sol.u * (profile.delay_cap - sol.delay));
  r.comp_v = std::abs(sol.v * sol.delay);
  r.comp_zeta = 0.0;
  double primal = std::max(-sol.delay, sol.delay - profile.delay_cap);
  double dual = std::max(-sol.u, -sol.v);
  for (int m = 0; m < profile.segment_count(); ++m) {
    double slack = sol.epigraph - (profile.slopes[m] * sol.delay + profile.intercepts[m]);
    r.comp_zeta = std::max(r.comp_zeta, std::abs(sol.zeta[m] * slack));
    primal = std::max(primal, -slack);
    dual = std::max(dual, -sol.zeta[m]);
  }
  r.primal_feasibility = std::max(0.0, primal);
  r.dual_feasibility = std::max(0.0, dual);
  return r;
}

double strong_duality_gap(const InconvenienceProfile& profile, double q,
                          const FollowerSolution& sol) {
  double dual = -sol.u * profile.delay_cap;
  for (int m = 0; m < profile.segment_count(); ++m)
    dual += sol.zeta[m] * profile.intercepts[m];
  return (sol.epigraph - q * sol.delay) - dual;
}

}  // namespace ievrp
