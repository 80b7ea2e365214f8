// Experiment orchestration: config files, Monte-Carlo trial loops with
// reproducible seeding, aggregation across trials, and CSV emission.
//
// Config files are a flat sectioned key=value format:
//
//   [graph]
//   source = generate          # or: file
//   nodes = 40
//   target_lambda2 = 1.8       # or: radius = 0.35
//   p_drop = 0.1
//
//   [observation]
//   theta = 1:40               # integer range, or a comma list
//   v0 = 10
//   delta = 1
//   noise_sigma = 2
//
//   [schedule]
//   alpha0 = 1.0
//   tau1 = 0.6
//   ...
//
//   [run]
//   x0 = 0
//   t_max = 10000
//   n_trials = 20
//   base_seed = 42
//   record_every = 10

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmed/engine.hpp"
#include "dmed/graph.hpp"
#include "dmed/log.hpp"

namespace dmed {

// Malformed or inconsistent config-file content (not I/O failures).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphSource {
  enum class Kind { kGenerate, kFile };
  Kind kind = Kind::kGenerate;
  int nodes = 0;
  std::optional<double> target_lambda2;
  std::optional<double> radius;
  std::string path;

  friend bool operator==(const GraphSource&, const GraphSource&) = default;
};

struct ExperimentConfig {
  GraphSource graph;
  double p_drop = 0.0;
  ObservationParams obs;
  ScheduleParams sched;
  std::vector<double> x0;
  double x0_fill = 0.0;
  long t_max = 1;
  int n_trials = 1;
  std::uint64_t base_seed = 0;
  long record_every = 10;
  std::optional<double> eps1;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.graph == b.graph && a.p_drop == b.p_drop && a.obs.theta == b.obs.theta &&
           a.obs.v0 == b.obs.v0 && a.obs.delta == b.obs.delta &&
           a.obs.noise_sigma == b.obs.noise_sigma && a.obs.bias_kind == b.obs.bias_kind &&
           a.sched == b.sched && a.x0 == b.x0 && a.x0_fill == b.x0_fill && a.t_max == b.t_max &&
           a.n_trials == b.n_trials && a.base_seed == b.base_seed &&
           a.record_every == b.record_every && a.eps1 == b.eps1;
  }
};

// --- config parsing -------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + v + "'");
  }
}

inline long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::uint64_t d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad unsigned integer for " + key + ": '" + v + "'");
  }
}

// "lo:hi" inclusive integer range, or a comma-separated list of reals.
inline std::vector<double> parse_real_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  const auto colon = v.find(':');
  if (colon != std::string::npos && v.find(',') == std::string::npos) {
    const long lo = parse_long(trim(v.substr(0, colon)), key);
    const long hi = parse_long(trim(v.substr(colon + 1)), key);
    if (hi < lo) throw ConfigError("config: empty range for " + key + ": '" + v + "'");
    for (long i = lo; i <= hi; ++i) out.push_back(static_cast<double>(i));
    return out;
  }
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), key));
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

inline std::string format_double(double d) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return std::string(buf);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: line " + std::to_string(lineno) + ": bad section header");
      current = detail::trim(line.substr(1, line.size() - 2));
      if (current != "graph" && current != "observation" && current != "schedule" && current != "run")
        throw ConfigError("config: line " + std::to_string(lineno) + ": unknown section [" +
                                 current + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || current.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (!sections[current].emplace(key, val).second)
      throw ConfigError("config: line " + std::to_string(lineno) + ": duplicate key '" + key +
                               "' in [" + current + "]");
  }

  ExperimentConfig cfg;
  auto take = [&sections](const std::string& sec, const std::string& key) -> std::optional<std::string> {
    auto s = sections.find(sec);
    if (s == sections.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    std::string v = k->second;
    s->second.erase(k);
    return v;
  };
  auto require = [&take](const std::string& sec, const std::string& key) -> std::string {
    auto v = take(sec, key);
    if (!v) throw ConfigError("config: missing required key '" + key + "' in [" + sec + "]");
    return *v;
  };

  // [graph]
  const std::string source = require("graph", "source");
  if (source == "generate") {
    cfg.graph.kind = GraphSource::Kind::kGenerate;
    cfg.graph.nodes = static_cast<int>(detail::parse_long(require("graph", "nodes"), "nodes"));
    if (auto v = take("graph", "target_lambda2"))
      cfg.graph.target_lambda2 = detail::parse_double(*v, "target_lambda2");
    if (auto v = take("graph", "radius")) cfg.graph.radius = detail::parse_double(*v, "radius");
    if (cfg.graph.target_lambda2.has_value() == cfg.graph.radius.has_value())
      throw ConfigError("config: [graph] needs exactly one of target_lambda2 / radius");
  } else if (source == "file") {
    cfg.graph.kind = GraphSource::Kind::kFile;
    cfg.graph.path = require("graph", "path");
  } else {
    throw ConfigError("config: [graph] source must be 'generate' or 'file', got '" + source +
                             "'");
  }
  cfg.p_drop = detail::parse_double(require("graph", "p_drop"), "p_drop");

  // [observation]
  cfg.obs.theta = detail::parse_real_list(require("observation", "theta"), "theta");
  cfg.obs.v0 = detail::parse_double(require("observation", "v0"), "v0");
  cfg.obs.delta = detail::parse_double(require("observation", "delta"), "delta");
  cfg.obs.noise_sigma = detail::parse_double(require("observation", "noise_sigma"), "noise_sigma");
  if (auto v = take("observation", "bias_kind")) {
    if (*v != "deterministic_power_law")
      throw ConfigError("config: bias_kind must be deterministic_power_law in files "
                               "(custom_bounded is API-only)");
  }

  // [schedule]
  cfg.sched.alpha0 = detail::parse_double(require("schedule", "alpha0"), "alpha0");
  cfg.sched.tau1 = detail::parse_double(require("schedule", "tau1"), "tau1");
  cfg.sched.beta0 = detail::parse_double(require("schedule", "beta0"), "beta0");
  cfg.sched.tau2 = detail::parse_double(require("schedule", "tau2"), "tau2");
  cfg.sched.gamma0 = detail::parse_double(require("schedule", "gamma0"), "gamma0");
  cfg.sched.tau3 = detail::parse_double(require("schedule", "tau3"), "tau3");
  cfg.sched.c_mu = detail::parse_double(require("schedule", "c_mu"), "c_mu");
  cfg.sched.mu = detail::parse_double(require("schedule", "mu"), "mu");
  cfg.sched.delta = cfg.obs.delta;
  if (auto v = take("schedule", "eps_bar")) cfg.sched.eps_bar = detail::parse_double(*v, "eps_bar");

  // [run]
  const std::string x0 = require("run", "x0");
  {
    const auto vals = detail::parse_real_list(x0, "x0");
    if (vals.size() == 1) {
      cfg.x0_fill = vals[0];
    } else {
      cfg.x0 = vals;
    }
  }
  cfg.t_max = detail::parse_long(require("run", "t_max"), "t_max");
  cfg.n_trials = static_cast<int>(detail::parse_long(require("run", "n_trials"), "n_trials"));
  cfg.base_seed = detail::parse_u64(require("run", "base_seed"), "base_seed");
  if (auto v = take("run", "record_every")) cfg.record_every = detail::parse_long(*v, "record_every");
  if (auto v = take("run", "eps1")) cfg.eps1 = detail::parse_double(*v, "eps1");

  for (const auto& [sec, kv] : sections)
    for (const auto& [key, val] : kv)
      throw ConfigError("config: unknown key '" + key + "' in [" + sec + "]");

  if (cfg.n_trials < 1) throw ConfigError("config: n_trials must be >= 1");
  if (cfg.t_max < 1) throw ConfigError("config: t_max must be >= 1");
  if (!(cfg.p_drop >= 0.0 && cfg.p_drop < 1.0))
    throw ConfigError("config: p_drop must be in [0, 1)");
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  return parse_config(in);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto num = detail::format_double;
  out << "[graph]\n";
  if (cfg.graph.kind == GraphSource::Kind::kGenerate) {
    out << "source = generate\n";
    out << "nodes = " << cfg.graph.nodes << "\n";
    if (cfg.graph.target_lambda2) out << "target_lambda2 = " << num(*cfg.graph.target_lambda2) << "\n";
    if (cfg.graph.radius) out << "radius = " << num(*cfg.graph.radius) << "\n";
  } else {
    out << "source = file\n";
    out << "path = " << cfg.graph.path << "\n";
  }
  out << "p_drop = " << num(cfg.p_drop) << "\n\n";

  out << "[observation]\n";
  out << "theta = ";
  for (std::size_t i = 0; i < cfg.obs.theta.size(); ++i)
    out << (i ? "," : "") << num(cfg.obs.theta[i]);
  out << "\n";
  out << "v0 = " << num(cfg.obs.v0) << "\n";
  out << "delta = " << num(cfg.obs.delta) << "\n";
  out << "noise_sigma = " << num(cfg.obs.noise_sigma) << "\n\n";

  out << "[schedule]\n";
  out << "alpha0 = " << num(cfg.sched.alpha0) << "\n";
  out << "tau1 = " << num(cfg.sched.tau1) << "\n";
  out << "beta0 = " << num(cfg.sched.beta0) << "\n";
  out << "tau2 = " << num(cfg.sched.tau2) << "\n";
  out << "gamma0 = " << num(cfg.sched.gamma0) << "\n";
  out << "tau3 = " << num(cfg.sched.tau3) << "\n";
  out << "c_mu = " << num(cfg.sched.c_mu) << "\n";
  out << "mu = " << num(cfg.sched.mu) << "\n";
  out << "eps_bar = " << num(cfg.sched.eps_bar) << "\n\n";

  out << "[run]\n";
  out << "x0 = ";
  if (cfg.x0.empty()) {
    out << num(cfg.x0_fill);
  } else {
    for (std::size_t i = 0; i < cfg.x0.size(); ++i) out << (i ? "," : "") << num(cfg.x0[i]);
  }
  out << "\n";
  out << "t_max = " << cfg.t_max << "\n";
  out << "n_trials = " << cfg.n_trials << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
  out << "record_every = " << cfg.record_every << "\n";
  if (cfg.eps1) out << "eps1 = " << num(*cfg.eps1) << "\n";
  return out.str();
}

// --- orchestration --------------------------------------------------------

inline StaticGraph resolve_graph(const ExperimentConfig& cfg) {
  if (cfg.graph.kind == GraphSource::Kind::kFile) {
    std::ifstream in(cfg.graph.path);
    if (!in) throw std::runtime_error("graph: cannot open '" + cfg.graph.path + "'");
    return read_edge_list(in);
  }
  const std::uint64_t seed = rng::derive(cfg.base_seed, {rng::to_word(rng::Purpose::kGraphGen)});
  if (cfg.graph.target_lambda2) {
    auto res = generate_with_target_lambda2(cfg.graph.nodes, *cfg.graph.target_lambda2, seed);
    log::info("generated graph: n=" + std::to_string(res.graph.n_nodes()) +
              " |E|=" + std::to_string(res.graph.n_edges()) + " lambda2=" +
              std::to_string(res.lambda2) + " radius=" + std::to_string(res.radius));
    return std::move(res.graph);
  }
  rng::Stream s(seed);
  return generate_random_geometric(cfg.graph.nodes, *cfg.graph.radius, s);
}

inline RunConfig to_run_config(const ExperimentConfig& cfg) {
  RunConfig rc;
  rc.p_drop = cfg.p_drop;
  rc.obs = cfg.obs;
  rc.sched = cfg.sched;
  rc.x0 = cfg.x0;
  rc.x0_fill = cfg.x0_fill;
  rc.t_max = cfg.t_max;
  rc.record_every = cfg.record_every;
  if (cfg.eps1) rc.eps1 = *cfg.eps1;
  return rc;
}

inline std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index) {
  return rng::derive(base_seed, {rng::to_word(rng::Purpose::kTrial),
                                 static_cast<std::uint64_t>(trial_index)});
}

inline std::vector<MetricsRecord> run_trial(const ExperimentConfig& cfg, const StaticGraph& graph,
                                            int trial_index) {
  return run(graph, to_run_config(cfg), trial_seed(cfg.base_seed, trial_index));
}

struct AggregatePoint {
  long t = 0;
  long n_trials = 0;
  double rms_dist_mean = 0, rms_dist_std = 0;
  double mean_dist_mean = 0;
  double consensus_err_mean = 0;
  double scaled_dist_mean = 0;
  double scaled_consensus_mean = 0;
  double num_clipped_mean = 0;
};

struct AggregateSeries {
  std::vector<AggregatePoint> points;
};

// Reduces per-trial record series (all sharing the same recorded steps) in
// canonical trial order, so the result is independent of completion order.
inline AggregateSeries aggregate_trials(const std::vector<std::vector<MetricsRecord>>& trials) {
  AggregateSeries out;
  if (trials.empty()) return out;
  const std::size_t n_steps = trials.front().size();
  for (const auto& tr : trials)
    if (tr.size() != n_steps)
      throw std::invalid_argument("aggregate_trials: trials disagree on recorded steps");
  const double n = static_cast<double>(trials.size());
  out.points.resize(n_steps);
  for (std::size_t s = 0; s < n_steps; ++s) {
    AggregatePoint& p = out.points[s];
    p.t = trials.front()[s].t;
    p.n_trials = static_cast<long>(trials.size());
    double sum = 0;
    for (const auto& tr : trials) {
      if (tr[s].t != p.t) throw std::invalid_argument("aggregate_trials: trials disagree on t");
      sum += tr[s].rms_dist;
      p.mean_dist_mean += tr[s].mean_dist;
      p.consensus_err_mean += tr[s].consensus_err;
      p.scaled_dist_mean += tr[s].scaled_dist;
      p.scaled_consensus_mean += tr[s].scaled_consensus;
      p.num_clipped_mean += tr[s].num_clipped;
    }
    p.rms_dist_mean = sum / n;
    double devsq = 0;  // second pass, immune to cancellation
    for (const auto& tr : trials) {
      const double d = tr[s].rms_dist - p.rms_dist_mean;
      devsq += d * d;
    }
    p.rms_dist_std = n > 1 ? std::sqrt(devsq / (n - 1)) : 0.0;
    p.mean_dist_mean /= n;
    p.consensus_err_mean /= n;
    p.scaled_dist_mean /= n;
    p.scaled_consensus_mean /= n;
    p.num_clipped_mean /= n;
  }
  return out;
}

// Runs all trials of an experiment with per-trial derived seeds.
inline AggregateSeries run_experiment(const ExperimentConfig& cfg) {
  const StaticGraph graph = resolve_graph(cfg);
  std::vector<std::vector<MetricsRecord>> trials;
  trials.reserve(static_cast<std::size_t>(cfg.n_trials));
  for (int i = 0; i < cfg.n_trials; ++i) trials.push_back(run_trial(cfg, graph, i));
  return aggregate_trials(trials);
}

// --- CSV ------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "t,rms_dist_mean,rms_dist_std,mean_dist_mean,consensus_err_mean,scaled_dist_mean,"
    "scaled_consensus_mean,num_clipped_mean,n_trials";

inline void emit_csv(const AggregateSeries& series, std::ostream& out) {
  out << kCsvHeader << "\n";
  char buf[64];
  auto num = [&buf](double d) {
    std::snprintf(buf, sizeof(buf), "%.15g", d);
    return std::string(buf);
  };
  for (const AggregatePoint& p : series.points) {
    out << p.t << "," << num(p.rms_dist_mean) << "," << num(p.rms_dist_std) << ","
        << num(p.mean_dist_mean) << "," << num(p.consensus_err_mean) << ","
        << num(p.scaled_dist_mean) << "," << num(p.scaled_consensus_mean) << ","
        << num(p.num_clipped_mean) << "," << p.n_trials << "\n";
  }
}

inline void emit_csv(const AggregateSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  emit_csv(series, out);
  out.flush();
  if (!out) throw std::runtime_error("csv: write to '" + path + "' failed");
}

// --- scalar-recursion experiment (CLI `lemma1`) ----------------------------

struct ScalarRecursionConfig {
  double a1 = 1.0;
  double mu = 0.9;
  double a2 = 10.0;
  double delta = 1.0;
  double sigma = 2.0;
  double z0 = 1.0;
  double eps0 = 0.1;
  long t_max = 100000;
  int n_trials = 100;
  std::uint64_t base_seed = 0;
  long record_every = 10;
};

struct ScalarRecursionPoint {
  long t = 0;
  double scaled_z2_mean = 0;
  double scaled_z2_median = 0;
};

// delta0 under which the scaled series (t+1)^{delta0 - eps0} z_t^2 vanishes.
inline double scalar_recursion_delta0(double delta, double mu) {
  return delta >= 1.0 ? mu : delta;
}

inline std::vector<ScalarRecursionPoint> run_scalar_recursion(const ScalarRecursionConfig& cfg) {
  const double d0 = scalar_recursion_delta0(cfg.delta, cfg.mu);
  if (!(cfg.eps0 > 0.0 && cfg.eps0 < d0))
    throw std::invalid_argument("scalar recursion: eps0 must be in (0, delta0)");
  if (cfg.n_trials < 1) throw std::invalid_argument("scalar recursion: n_trials must be >= 1");
  const double expo = d0 - cfg.eps0;

  std::vector<long> ts;
  for (long t = 0; t <= cfg.t_max; t += cfg.record_every) ts.push_back(t);
  if (ts.back() != cfg.t_max) ts.push_back(cfg.t_max);

  std::vector<std::vector<double>> scaled(ts.size(), std::vector<double>());
  for (auto& v : scaled) v.reserve(static_cast<std::size_t>(cfg.n_trials));
  for (int i = 0; i < cfg.n_trials; ++i) {
    rng::Stream s(rng::derive(cfg.base_seed, {rng::to_word(rng::Purpose::kLemma1),
                                              static_cast<std::uint64_t>(i)}));
    const std::vector<double> z =
        lemma1_recursion(cfg.a1, cfg.mu, cfg.a2, cfg.delta, cfg.sigma, cfg.t_max, s, cfg.z0);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double zt = z[static_cast<std::size_t>(ts[k])];
      scaled[k].push_back(std::pow(static_cast<double>(ts[k] + 1), expo) * zt * zt);
    }
  }

  std::vector<ScalarRecursionPoint> out(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out[k].t = ts[k];
    double sum = 0;
    for (double v : scaled[k]) sum += v;
    out[k].scaled_z2_mean = sum / static_cast<double>(cfg.n_trials);
    std::vector<double> v = scaled[k];
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    out[k].scaled_z2_median = v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  }
  return out;
}

inline void emit_scalar_recursion_csv(const std::vector<ScalarRecursionPoint>& series,
                                      int n_trials, std::ostream& out) {
  out << "t,scaled_z2_mean,scaled_z2_median,n_trials\n";
  char buf[64];
  auto num = [&buf](double d) {
    std::snprintf(buf, sizeof(buf), "%.15g", d);
    return std::string(buf);
  };
  for (const auto& p : series)
    out << p.t << "," << num(p.scaled_z2_mean) << "," << num(p.scaled_z2_median) << "," << n_trials
        << "\n";
}

}  // namespace dmed
