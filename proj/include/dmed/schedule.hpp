// Decaying gain and clipping-threshold schedules
//
//   alpha_t = alpha0 / (t+1)^tau1      innovation gain
//   beta_t  = beta0  / (t+1)^tau2      consensus gain
//   gamma_t = gamma0 / (t+1)^tau3      clipping threshold
//
// together with the admissibility rules tying (tau1, tau2, tau3) to the bias
// decay delta through delta0:
//
//   delta0 = 1 - eps_bar and mu = delta0        if delta >= 1
//   delta0 = delta       and delta <= mu < 1    otherwise
//   0 < tau2 < tau1 < 1
//   0 < tau3 < min(1 - tau1, 0.5 * delta0)

#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmed {

struct ScheduleParams {
  double alpha0 = 1.0;
  double tau1 = 0.6;
  double beta0 = 0.1;
  double tau2 = 0.2;
  double gamma0 = 20.0;
  double tau3 = 0.3;
  double c_mu = 10.0;
  double mu = 0.9;
  double delta = 1.0;    // bias decay exponent of the observation model
  double eps_bar = 0.1;  // used only when delta >= 1; 0 admits delta0 = 1

  friend bool operator==(const ScheduleParams&, const ScheduleParams&) = default;
};

inline double delta0(const ScheduleParams& p) {
  return p.delta >= 1.0 ? 1.0 - p.eps_bar : p.delta;
}

// Returns the list of violated admissibility constraints, empty when ok.
inline std::vector<std::string> validate(const ScheduleParams& p) {
  std::vector<std::string> v;
  auto fail = [&v](const std::string& msg) { v.push_back(msg); };
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return std::string(buf);
  };

  if (!(p.alpha0 > 0.0)) fail("alpha0 > 0 fails: alpha0=" + num(p.alpha0));
  if (!(p.beta0 > 0.0)) fail("beta0 > 0 fails: beta0=" + num(p.beta0));
  if (!(p.gamma0 > 0.0)) fail("gamma0 > 0 fails: gamma0=" + num(p.gamma0));
  if (!(p.c_mu > 0.0)) fail("c_mu > 0 fails: c_mu=" + num(p.c_mu));
  if (!(p.delta > 0.0)) fail("delta > 0 fails: delta=" + num(p.delta));

  if (!(p.tau2 > 0.0 && p.tau2 < p.tau1 && p.tau1 < 1.0))
    fail("0 < tau2 < tau1 < 1 fails: tau1=" + num(p.tau1) + ", tau2=" + num(p.tau2));

  bool d0_ok = true;
  if (p.delta >= 1.0) {
    if (!(p.eps_bar >= 0.0 && p.eps_bar < 1.0)) {
      fail("eps_bar in [0, 1) fails: eps_bar=" + num(p.eps_bar));
      d0_ok = false;
    }
    if (std::abs(p.mu - (1.0 - p.eps_bar)) > 1e-12)
      fail("mu = delta0 = 1 - eps_bar fails (delta >= 1): mu=" + num(p.mu) +
           ", 1 - eps_bar=" + num(1.0 - p.eps_bar));
  } else if (p.delta > 0.0) {
    if (!(p.mu >= p.delta && p.mu < 1.0))
      fail("delta <= mu < 1 fails (delta < 1): mu=" + num(p.mu) + ", delta=" + num(p.delta));
  }
  if (!(p.mu > 0.0 && p.mu <= 1.0)) fail("0 < mu <= 1 fails: mu=" + num(p.mu));

  if (d0_ok && p.delta > 0.0) {
    const double d0 = delta0(p);
    const double bound = std::min(1.0 - p.tau1, 0.5 * d0);
    if (!(p.tau3 < bound))
      fail("tau3 < min(1 - tau1, 0.5*delta0) fails: tau3=" + num(p.tau3) +
           ", bound=" + num(bound) + " (delta0=" + num(d0) + ")");
  }
  if (!(p.tau3 > 0.0)) fail("tau3 > 0 fails: tau3=" + num(p.tau3));

  return v;
}

inline bool is_valid(const ScheduleParams& p) { return validate(p).empty(); }

inline void require_valid(const ScheduleParams& p) {
  const auto v = validate(p);
  if (v.empty()) return;
  std::string msg = "schedule parameters inadmissible:";
  for (const auto& s : v) msg += "\n  " + s;
  throw std::invalid_argument(msg);
}

inline double alpha(const ScheduleParams& p, long t) {
  return p.alpha0 * std::pow(static_cast<double>(t + 1), -p.tau1);
}

inline double beta(const ScheduleParams& p, long t) {
  return p.beta0 * std::pow(static_cast<double>(t + 1), -p.tau2);
}

inline double gamma(const ScheduleParams& p, long t) {
  return p.gamma0 * std::pow(static_cast<double>(t + 1), -p.tau3);
}

}  // namespace dmed
