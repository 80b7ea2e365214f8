// The synchronous update engine.  One step over all agents:
//
//   x(t+1) = (I - beta_t L(t)) x(t) - alpha_t K_t (x(t) - theta_bar(t))
//
// where L(t) is the Laplacian of the sampled realization and K_t the
// diagonal of per-agent clip gains
//
//   k_n(t) = 1                                 if |x_n - theta_bar_n| <= gamma_t
//   k_n(t) = gamma_t / |x_n - theta_bar_n|     otherwise
//
// so every clipped innovation has magnitude at most gamma_t.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmed/graph.hpp"
#include "dmed/metrics.hpp"
#include "dmed/observation.hpp"
#include "dmed/rng.hpp"
#include "dmed/schedule.hpp"

namespace dmed {

struct NetworkState {
  Eigen::VectorXd x;          // estimates x_n(t)
  Eigen::VectorXd theta_bar;  // local averages theta_bar_n(t), snapshot for this step
  long t = 0;
};

inline double clip_gain(double x_n, double theta_bar_n, double gamma_t) {
  if (!(gamma_t > 0.0)) throw std::invalid_argument("clip_gain: gamma_t must be > 0");
  const double mag = std::abs(x_n - theta_bar_n);
  if (mag <= gamma_t) return 1.0;
  return gamma_t / mag;
}

struct ClipDiagnostics {
  Eigen::VectorXd k;  // per-agent gains in (0, 1]
  int num_clipped = 0;
};

inline ClipDiagnostics clip_diagnostics(const Eigen::VectorXd& x, const Eigen::VectorXd& theta_bar,
                                        double gamma_t) {
  if (x.size() != theta_bar.size())
    throw std::invalid_argument("clip_diagnostics: dimension mismatch");
  ClipDiagnostics d;
  d.k.resize(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    d.k(n) = clip_gain(x(n), theta_bar(n), gamma_t);
    if (d.k(n) < 1.0) ++d.num_clipped;
  }
  return d;
}

// One synchronous update at step t.  Every agent reads only time-t values of
// itself and its active neighbors; equals the stacked matrix form up to
// accumulation-order rounding.
inline NetworkState step(const NetworkState& state, const GraphRealization& realization,
                         const ScheduleParams& sched, long t) {
  const Eigen::Index n = state.x.size();
  if (state.theta_bar.size() != n)
    throw std::invalid_argument("step: x and theta_bar dimensions disagree");
  if (realization.base->n_nodes() != n)
    throw std::invalid_argument("step: state has " + std::to_string(n) + " agents, realization has " +
                                std::to_string(realization.base->n_nodes()) + " nodes");
  if (realization.active.size() != realization.base->n_edges())
    throw std::invalid_argument("step: realization mask does not match base graph");

  const double alpha_t = alpha(sched, t);
  const double beta_t = beta(sched, t);
  const double gamma_t = gamma(sched, t);

  Eigen::VectorXd consensus = Eigen::VectorXd::Zero(n);
  const auto& edges = realization.base->edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!realization.active[e]) continue;
    const double diff = state.x(edges[e].a) - state.x(edges[e].b);
    consensus(edges[e].a) += diff;
    consensus(edges[e].b) -= diff;
  }

  NetworkState next;
  next.x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double innov = state.x(i) - state.theta_bar(i);
    const double k = clip_gain(state.x(i), state.theta_bar(i), gamma_t);
    next.x(i) = state.x(i) - beta_t * consensus(i) - alpha_t * k * innov;
    if (!std::isfinite(next.x(i)))
      throw std::runtime_error("step: non-finite estimate for agent " + std::to_string(i) +
                               " at t=" + std::to_string(t));
  }
  next.theta_bar = state.theta_bar;
  next.t = t + 1;
  return next;
}

struct RunConfig {
  double p_drop = 0.0;
  ObservationParams obs;
  ScheduleParams sched;
  std::vector<double> x0;    // per-agent initial estimates; empty -> x0_fill
  double x0_fill = 0.0;
  long t_max = 1;
  long record_every = 10;
  double eps1 = std::numeric_limits<double>::quiet_NaN();  // NaN -> default_eps1
};

struct RunResult {
  std::vector<MetricsRecord> records;
  NetworkState final_state;
};

// Drives one full trial: per step, draw observations at t, advance the local
// average to t+1, sample the realization at t, then apply the estimate update
// using theta_bar(t).  theta_bar(0) is initialized to the first observation.
// Deterministic given (config, trial_seed).
inline RunResult run_detailed(const StaticGraph& graph, const RunConfig& cfg,
                              std::uint64_t trial_seed) {
  check_observation_params(cfg.obs);
  require_valid(cfg.sched);
  if (cfg.t_max < 1) throw std::invalid_argument("run: t_max must be >= 1");
  if (cfg.record_every < 1) throw std::invalid_argument("run: record_every must be >= 1");
  const int n = cfg.obs.n_agents();
  if (graph.n_nodes() != n)
    throw std::invalid_argument("run: graph has " + std::to_string(graph.n_nodes()) +
                                " nodes but theta has " + std::to_string(n) + " entries");
  if (!cfg.x0.empty() && static_cast<int>(cfg.x0.size()) != n)
    throw std::invalid_argument("run: x0 must be empty (scalar fill) or one entry per agent");

  const MedianSet med = median_set(cfg.obs.theta);
  const double eps1 = std::isnan(cfg.eps1) ? default_eps1(cfg.sched) : cfg.eps1;

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, cfg.x0_fill);
  if (!cfg.x0.empty()) x = Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), n);

  LocalAverageState avg;
  avg.c_mu = cfg.sched.c_mu;
  avg.mu = cfg.sched.mu;

  RunResult out;
  out.records.reserve(static_cast<std::size_t>(cfg.t_max / cfg.record_every) + 2);
  Eigen::VectorXd obs_t(n);

  for (long t = 0; t < cfg.t_max; ++t) {
    for (int a = 0; a < n; ++a) {
      rng::Stream s(rng::derive(trial_seed, {rng::to_word(rng::Purpose::kObservation),
                                             static_cast<std::uint64_t>(a),
                                             static_cast<std::uint64_t>(t)}));
      obs_t(a) = observe(cfg.obs, a, t, s);
    }
    if (t == 0) {
      avg.theta_bar = obs_t;
      avg.t = 0;
    }
    const Eigen::VectorXd theta_bar_t = avg.theta_bar;

    if (t % cfg.record_every == 0) {
      const ClipDiagnostics cd = clip_diagnostics(x, theta_bar_t, gamma(cfg.sched, t));
      out.records.push_back(make_record(t, x, med, cfg.sched, eps1, cd.num_clipped));
    }

    avg = update_local_average(std::move(avg), obs_t);

    rng::Stream gs(rng::derive(trial_seed, {rng::to_word(rng::Purpose::kDropout),
                                            static_cast<std::uint64_t>(t)}));
    const GraphRealization realization = sample_dropout(graph, cfg.p_drop, gs);

    const NetworkState st = step({std::move(x), theta_bar_t, t}, realization, cfg.sched, t);
    x = st.x;
  }

  const ClipDiagnostics cd = clip_diagnostics(x, avg.theta_bar, gamma(cfg.sched, cfg.t_max));
  out.records.push_back(make_record(cfg.t_max, x, med, cfg.sched, eps1, cd.num_clipped));
  out.final_state = {std::move(x), avg.theta_bar, cfg.t_max};
  return out;
}

inline std::vector<MetricsRecord> run(const StaticGraph& graph, const RunConfig& cfg,
                                      std::uint64_t trial_seed) {
  return run_detailed(graph, cfg, trial_seed).records;
}

}  // namespace dmed
