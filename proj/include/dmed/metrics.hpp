// Median set, distances, consensus error and the scaled-rate diagnostics.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmed/schedule.hpp"

namespace dmed {

// The set of medians of N distinct values: a point for odd N, the closed
// interval between the two middle order statistics for even N.
struct MedianSet {
  enum class Kind { kPoint, kInterval };
  Kind kind;
  double lo;
  double hi;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Minimum pairwise gap; errors on duplicates.
inline double d_min(std::vector<double> theta) {
  if (theta.size() < 2) throw std::invalid_argument("d_min: need at least 2 values");
  std::sort(theta.begin(), theta.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < theta.size(); ++i) {
    const double gap = theta[i + 1] - theta[i];
    if (gap == 0.0)
      throw std::invalid_argument("d_min: duplicate value " + std::to_string(theta[i]));
    best = std::min(best, gap);
  }
  return best;
}

inline MedianSet median_set(std::vector<double> theta) {
  const std::size_t n = theta.size();
  if (n == 0) throw std::invalid_argument("median_set: empty input");
  if (n >= 2) d_min(theta);  // enforces distinctness
  std::sort(theta.begin(), theta.end());
  if (n % 2 == 1) {
    const double m = theta[n / 2];
    return {MedianSet::Kind::kPoint, m, m};
  }
  return {MedianSet::Kind::kInterval, theta[n / 2 - 1], theta[n / 2]};
}

inline double dist_to_set(double x, const MedianSet& m) {
  if (x < m.lo) return m.lo - x;
  if (x > m.hi) return x - m.hi;
  return 0.0;
}

// || x - P_N x ||_2: Euclidean deviation from the all-agents mean vector.
inline double consensus_error(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw std::invalid_argument("consensus_error: empty vector");
  return (x.array() - x.mean()).matrix().norm();
}

struct MetricsRecord {
  long t = 0;
  double rms_dist = 0.0;         // N^{-1} sqrt(sum_n dist^2(x_n, Theta))
  double mean_dist = 0.0;        // dist(mean(x), Theta)
  double consensus_err = 0.0;    // ||x - P_N x||_2
  double scaled_dist = 0.0;      // (t+1)^{tau3} * rms_dist
  double scaled_consensus = 0.0; // (t+1)^{tau1-tau2+tau3-eps1} * consensus_err
  int num_clipped = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

// Default diagnostic exponent offset, strictly inside the admissible range.
inline double default_eps1(const ScheduleParams& p) { return 0.5 * (p.tau1 - p.tau2); }

inline MetricsRecord make_record(long t, const Eigen::VectorXd& x, const MedianSet& m,
                                 const ScheduleParams& sched, double eps1, int num_clipped) {
  MetricsRecord r;
  r.t = t;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = dist_to_set(x(i), m);
    sq += d * d;
  }
  const double n = static_cast<double>(x.size());
  r.rms_dist = std::sqrt(sq) / n;
  r.mean_dist = dist_to_set(x.mean(), m);
  r.consensus_err = consensus_error(x);
  const double tp1 = static_cast<double>(t + 1);
  r.scaled_dist = std::pow(tp1, sched.tau3) * r.rms_dist;
  r.scaled_consensus = std::pow(tp1, sched.tau1 - sched.tau2 + sched.tau3 - eps1) * r.consensus_err;
  r.num_clipped = num_clipped;
  if (!std::isfinite(r.rms_dist) || !std::isfinite(r.consensus_err) ||
      !std::isfinite(r.scaled_dist) || !std::isfinite(r.scaled_consensus))
    throw std::runtime_error("metrics: non-finite record at t=" + std::to_string(t));
  return r;
}

}  // namespace dmed
