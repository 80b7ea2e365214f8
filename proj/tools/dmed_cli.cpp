// Experiment CLI.
//
//   dmed simulate <config> --out series.csv
//   dmed graph gen --nodes 40 --target-lambda2 1.8 --seed 7 --out g.edges
//   dmed graph info g.edges
//   dmed lemma1 --a1 1 --mu 0.9 --a2 10 --delta 1 --sigma 2 --tmax 100000
//               --trials 100 --out z.csv
//   dmed validate <config>
//
// Exit codes: 0 ok, 1 usage / inadmissible configuration, 2 runtime error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "dmed/dmed.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
  const dmed::ExperimentConfig cfg = dmed::parse_config_file(config_path);
  const auto violations = dmed::validate(cfg.sched);
  if (!violations.empty()) {
    std::cerr << "inadmissible schedule in '" << config_path << "':\n";
    for (const auto& v : violations) std::cerr << "  " << v << "\n";
    return kExitUsage;
  }
  const dmed::AggregateSeries series = dmed::run_experiment(cfg);
  dmed::emit_csv(series, out_path);
  std::cout << "wrote " << series.points.size() << " rows (" << cfg.n_trials << " trials, t_max="
            << cfg.t_max << ") to " << out_path << "\n";
  return kExitOk;
}

int cmd_graph_gen(int nodes, double target_lambda2, double radius, std::uint64_t seed,
                  const std::string& out_path) {
  dmed::StaticGraph g(1, {});
  if (target_lambda2 > 0.0) {
    auto res = dmed::generate_with_target_lambda2(nodes, target_lambda2, seed);
    std::cout << "generated n=" << res.graph.n_nodes() << " |E|=" << res.graph.n_edges()
              << " lambda2=" << res.lambda2 << " radius=" << res.radius << "\n";
    g = std::move(res.graph);
  } else {
    dmed::rng::Stream s(seed);
    g = dmed::generate_random_geometric(nodes, radius, s);
    std::cout << "generated n=" << g.n_nodes() << " |E|=" << g.n_edges()
              << " lambda2=" << dmed::lambda2(dmed::build_laplacian(g)) << " radius=" << radius
              << "\n";
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  dmed::write_edge_list(out, g);
  return kExitOk;
}

int cmd_graph_info(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const dmed::StaticGraph g = dmed::read_edge_list(in);
  std::printf("n_nodes=%d\n", g.n_nodes());
  std::printf("n_edges=%zu\n", g.n_edges());
  std::printf("lambda2=%.12g\n", dmed::lambda2(dmed::build_laplacian(g)));
  return kExitOk;
}

int cmd_lemma1(const dmed::ScalarRecursionConfig& cfg, const std::string& out_path) {
  const auto series = dmed::run_scalar_recursion(cfg);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  dmed::emit_scalar_recursion_csv(series, cfg.n_trials, out);
  std::cout << "wrote " << series.size() << " rows to " << out_path << " (exponent delta0-eps0 = "
            << dmed::scalar_recursion_delta0(cfg.delta, cfg.mu) - cfg.eps0 << ")\n";
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const dmed::ExperimentConfig cfg = dmed::parse_config_file(config_path);
  const auto violations = dmed::validate(cfg.sched);
  if (!violations.empty()) {
    std::cout << "inadmissible:\n";
    for (const auto& v : violations) std::cout << "  violation: " << v << "\n";
    return kExitUsage;
  }
  const double d0 = dmed::delta0(cfg.sched);
  std::printf("ok\n");
  std::printf("delta0 = %g\n", d0);
  std::printf("tau3 bound: tau3 < min(1 - tau1, 0.5*delta0) = min(%g, %g) = %g; tau3 = %g\n",
              1.0 - cfg.sched.tau1, 0.5 * d0, std::min(1.0 - cfg.sched.tau1, 0.5 * d0),
              cfg.sched.tau3);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DMED: distributed median estimation over random networks"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out;
  auto* sim = app.add_subcommand("simulate", "run a Monte-Carlo experiment from a config file");
  sim->add_option("config", sim_config, "experiment config file")->required();
  sim->add_option("--out", sim_out, "output CSV path")->required();

  // graph gen / info
  auto* graph = app.add_subcommand("graph", "graph utilities");
  graph->require_subcommand(1);
  int gen_nodes = 0;
  double gen_target = 0.0, gen_radius = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = graph->add_subcommand("gen", "generate a connected random geometric graph");
  gen->add_option("--nodes", gen_nodes, "node count")->required();
  auto* opt_target = gen->add_option("--target-lambda2", gen_target, "target algebraic connectivity");
  auto* opt_radius = gen->add_option("--radius", gen_radius, "connection radius in (0, sqrt(2)]");
  opt_target->excludes(opt_radius);
  gen->add_option("--seed", gen_seed, "generation seed")->default_val(0);
  gen->add_option("--out", gen_out, "output edge-list path")->required();
  std::string info_path;
  auto* info = graph->add_subcommand("info", "print n_nodes, |E| and lambda2 of an edge list");
  info->add_option("edgelist", info_path, "edge-list file")->required();

  // lemma1
  dmed::ScalarRecursionConfig rec;
  std::string rec_out;
  auto* lem = app.add_subcommand("lemma1", "scalar averaging-recursion verifier");
  lem->add_option("--a1", rec.a1, "weight coefficient")->default_val(1.0);
  lem->add_option("--mu", rec.mu, "weight exponent in (0,1)")->default_val(0.9);
  lem->add_option("--a2", rec.a2, "bias coefficient")->default_val(10.0);
  lem->add_option("--delta", rec.delta, "bias decay exponent")->default_val(1.0);
  lem->add_option("--sigma", rec.sigma, "noise std dev")->default_val(2.0);
  lem->add_option("--z0", rec.z0, "initial value")->default_val(1.0);
  lem->add_option("--eps0", rec.eps0, "scaling exponent offset in (0, delta0)")->default_val(0.1);
  lem->add_option("--tmax", rec.t_max, "steps")->default_val(100000);
  lem->add_option("--trials", rec.n_trials, "trial count")->default_val(100);
  lem->add_option("--seed", rec.base_seed, "base seed")->default_val(0);
  lem->add_option("--record-every", rec.record_every, "record decimation")->default_val(10);
  lem->add_option("--out", rec_out, "output CSV path")->required();

  // validate
  std::string val_config;
  auto* val = app.add_subcommand("validate", "schedule admissibility report for a config file");
  val->add_option("config", val_config, "experiment config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out);
    if (graph->parsed()) {
      if (gen->parsed()) {
        if (opt_target->count() == 0 && opt_radius->count() == 0)
          throw CLI::ValidationError("graph gen", "one of --target-lambda2 / --radius is required");
        return cmd_graph_gen(gen_nodes, opt_target->count() ? gen_target : 0.0,
                             opt_radius->count() ? gen_radius : 0.0, gen_seed, gen_out);
      }
      if (info->parsed()) return cmd_graph_info(info_path);
    }
    if (lem->parsed()) return cmd_lemma1(rec, rec_out);
    if (val->parsed()) return cmd_validate(val_config);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dmed::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
