// Noisy local observation streams and the recursive local average.
//
// Agent n observes  theta_n(t) = theta_n + w_n(t) + nu_n(t)  where w is
// zero-mean white noise and |nu_n(t)| <= v0 * (t+1)^-delta surely.  The
// local average follows
//
//   theta_bar(t+1) = (1 - rho_t) * theta_bar(t) + rho_t * theta(t),
//   rho_t = min(1, c_mu / (t+1)^mu).
//
// Also hosts the scalar-recursion verifier used to check the averaging
// error empirically: z_{t+1} = (1 - r1(t)) z_t + r1(t) (r2(t) + w(t)).

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmed/log.hpp"
#include "dmed/rng.hpp"

namespace dmed {

enum class BiasKind {
  kDeterministicPowerLaw,  // nu = +v0 * (t+1)^-delta exactly (worst case)
  kCustomBounded,          // user-supplied, checked against the bound per draw
};

struct ObservationParams {
  std::vector<double> theta;  // one distinct local value per agent
  double v0 = 0.0;
  double delta = 1.0;
  double noise_sigma = 0.0;
  BiasKind bias_kind = BiasKind::kDeterministicPowerLaw;
  std::function<double(int n, long t)> custom_bias;

  int n_agents() const { return static_cast<int>(theta.size()); }
};

inline void check_observation_params(const ObservationParams& p) {
  if (p.theta.empty()) throw std::invalid_argument("observation: theta must be nonempty");
  for (std::size_t i = 0; i < p.theta.size(); ++i)
    for (std::size_t j = i + 1; j < p.theta.size(); ++j)
      if (p.theta[i] == p.theta[j])
        throw std::invalid_argument("observation: theta values must be pairwise distinct (theta[" +
                                    std::to_string(i) + "] == theta[" + std::to_string(j) + "])");
  if (!(p.delta > 0.0)) throw std::invalid_argument("observation: delta must be > 0");
  if (!(p.v0 >= 0.0)) throw std::invalid_argument("observation: v0 must be >= 0");
  if (!(p.noise_sigma >= 0.0)) throw std::invalid_argument("observation: noise_sigma must be >= 0");
  if (p.bias_kind == BiasKind::kCustomBounded && !p.custom_bias)
    throw std::invalid_argument("observation: custom_bounded bias needs a bias function");
}

inline double bias_bound(const ObservationParams& p, long t) {
  return p.v0 * std::pow(static_cast<double>(t + 1), -p.delta);
}

// One observation of agent n at step t.  Fresh noise is drawn from `stream`;
// repeated calls on the same stream yield independent draws.
inline double observe(const ObservationParams& p, int n, long t, rng::Stream& stream) {
  if (n < 0 || n >= p.n_agents()) throw std::invalid_argument("observe: agent index out of range");
  if (t < 0) throw std::invalid_argument("observe: t must be >= 0");
  const double bound = bias_bound(p, t);
  double nu = bound;
  if (p.bias_kind == BiasKind::kCustomBounded) {
    nu = p.custom_bias(n, t);
    if (!(std::abs(nu) <= bound))
      throw std::domain_error("observe: custom bias " + std::to_string(nu) +
                              " exceeds bound " + std::to_string(bound) + " at t=" +
                              std::to_string(t));
  }
  const double w = p.noise_sigma > 0.0 ? p.noise_sigma * stream.next_normal() : 0.0;
  return p.theta[static_cast<std::size_t>(n)] + w + nu;
}

struct LocalAverageState {
  Eigen::VectorXd theta_bar;
  long t = 0;
  double c_mu = 1.0;
  double mu = 0.5;
};

// Applies the averaging recursion once, advancing t.  The effective weight is
// clamped to 1 so the update stays a convex combination even for c_mu > 1
// (the clamp is reported once per process).
inline LocalAverageState update_local_average(LocalAverageState state,
                                              const Eigen::VectorXd& observations) {
  if (state.t < 0) throw std::invalid_argument("update_local_average: t must be >= 0");
  if (observations.size() != state.theta_bar.size())
    throw std::invalid_argument("update_local_average: dimension mismatch");
  const double raw = state.c_mu * std::pow(static_cast<double>(state.t + 1), -state.mu);
  const double rho = std::min(1.0, raw);
  if (raw > 1.0) {
    log::warn_once("local-average-clamp",
                   "local average weight c_mu/(t+1)^mu = " + std::to_string(raw) +
                       " clamped to 1 at t=" + std::to_string(state.t));
  }
  // delta form of (1 - rho) theta_bar + rho theta: constant inputs are an
  // exact fixed point in floating point
  state.theta_bar += rho * (observations - state.theta_bar);
  state.t += 1;
  return state;
}

// Scalar comparison process z_{t+1} = (1 - r1) z_t + r1 (r2 + w) with
// r1(t) = min(1, a1 (t+1)^-mu), |r2(t)| = a2 (t+1)^-delta, w ~ N(0, sigma^2).
// Returns the full trajectory z_0 .. z_{t_max}.
inline std::vector<double> lemma1_recursion(double a1, double mu, double a2, double delta,
                                            double sigma, long t_max, rng::Stream& stream,
                                            double z0 = 1.0) {
  if (!(mu > 0.0 && mu < 1.0))
    throw std::invalid_argument("lemma1_recursion: mu must be in (0, 1), got " + std::to_string(mu));
  if (!(a1 > 0.0)) throw std::invalid_argument("lemma1_recursion: a1 must be > 0");
  if (!(a2 >= 0.0)) throw std::invalid_argument("lemma1_recursion: a2 must be >= 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("lemma1_recursion: sigma must be >= 0");
  if (t_max < 0) throw std::invalid_argument("lemma1_recursion: t_max must be >= 0");

  std::vector<double> z;
  z.reserve(static_cast<std::size_t>(t_max) + 1);
  z.push_back(z0);
  double zt = z0;
  for (long t = 0; t < t_max; ++t) {
    const double r1 = std::min(1.0, a1 * std::pow(static_cast<double>(t + 1), -mu));
    const double r2 = a2 * std::pow(static_cast<double>(t + 1), -delta);
    const double w = sigma > 0.0 ? sigma * stream.next_normal() : 0.0;
    zt = (1.0 - r1) * zt + r1 * (r2 + w);
    z.push_back(zt);
  }
  return z;
}

}  // namespace dmed
