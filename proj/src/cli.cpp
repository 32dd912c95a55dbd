#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aggvi/bench.hpp"
#include "aggvi/model_io.hpp"

namespace aggvi {

namespace {

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find('x', pos);
    if (next == std::string::npos) next = text.size();
    dims.push_back(std::stoi(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  if (dims.empty()) throw CLI::ValidationError("--dims", "expected e.g. 100x100");
  return dims;
}

void write_meta_sidecar(const EnvMetadata& meta, const std::string& model_path) {
  nlohmann::json j = {{"dims", meta.dims},       {"seed", meta.seed},
                      {"p", meta.p},             {"sigma", meta.sigma},
                      {"cost_scale", meta.cost_scale}, {"vmax", meta.vmax}};
  std::ofstream out(model_path + ".meta.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + model_path + ".meta.json");
  out << j.dump(2) << '\n';
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Tabular MDP benchmarks for value iteration with adaptive state aggregation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "Defaults follow the benchmark configuration: gamma=0.95 epsilon=0.5\n"
      "agg-len=5 global-len=2 alpha=invsqrt iters=1000 reps=20, mazes 100x100\n"
      "normalized to max cost-to-go 100. Flags override --config values.");

  std::uint64_t seed = 1;
  double gamma = 0.95, epsilon = 0.5;
  int agg_len = 5, global_len = 2, reps = 20;
  long long iters = 1000;
  std::string alpha = "invsqrt", out_path, config_path;
  bool full = false, fixed_instance = false;
  std::string env_type = "terrain", dims_text = "100x100", model_path;
  double p = 0.95, sigma = 0.0, target_vmax = 100.0;
  int bumps = 10;
  int bins_per_dim = 0, episodes = 100, eval_every = 1, decision_steps = 4;
  long long vi_iters = 400, agg_iters = 600;

  auto* o_seed = app.add_option("--seed", seed, "Master seed");
  auto* o_gamma = app.add_option("--gamma", gamma, "Discount factor");
  auto* o_eps = app.add_option("--epsilon", epsilon, "Aggregation bucket width");
  auto* o_agg = app.add_option("--agg-len", agg_len, "Aggregated interval length |A_i|");
  auto* o_glob = app.add_option("--global-len", global_len, "Global interval length |B_i|");
  auto* o_alpha = app.add_option("--alpha", alpha, "Step size: const:C, invsqrt or poly:B");
  auto* o_iters = app.add_option("--iters", iters, "Solver iterations per run");
  auto* o_reps = app.add_option("--reps", reps, "Repetitions per experiment cell");
  auto* o_out = app.add_option("--out", out_path, "Output file (CSV, or JSON for gen-maze)");
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  auto* o_full = app.add_flag("--full", full, "Use the large scaling grids");
  auto* o_fixed = app.add_flag("--fixed-instance", fixed_instance,
                               "Share one maze instance across repetitions");

  auto* o_env = app.add_option("--env", env_type, "Maze type: standard or terrain");
  auto* o_dims = app.add_option("--dims", dims_text, "Grid dimensions, e.g. 100x100 or 10x10x10");
  auto* o_p = app.add_option("--p", p, "Intended-move probability");
  auto* o_sigma = app.add_option("--sigma", sigma, "Cost noise standard deviation");
  auto* o_bumps = app.add_option("--bumps", bumps, "Gaussian bumps in terrain height field");
  auto* o_vmax = app.add_option("--target-vmax", target_vmax, "Normalization target for max cost-to-go");

  CLI::App* c_solve = app.add_subcommand(
      "solve", "One adaptive run; writes the per-iteration trace CSV");
  c_solve->add_option("--model", model_path,
                      "Solve this MDP JSON file instead of generating a maze");
  CLI::App* c_gen = app.add_subcommand(
      "gen-maze", "Emit a maze as MDP JSON plus a .meta.json sidecar");
  CLI::App* c_sweep = app.add_subcommand(
      "sweep-eps", "Final error vs epsilon (fresh instance per repetition)");
  CLI::App* c_eff = app.add_subcommand(
      "efficiency", "Error-vs-updates curves, adaptive vs plain value iteration");
  CLI::App* c_scale = app.add_subcommand(
      "scaling", "Final-error summaries across grid sizes, both maze types");
  CLI::App* c_robust = app.add_subcommand(
      "robustness", "Final-error summaries over the (p, sigma) grid, both maze types");
  CLI::App* c_cart = app.add_subcommand(
      "cartpole", "Reward-vs-updates curves on the discretized cart-pole task");
  auto* o_bins = c_cart->add_option("--bins-per-dim", bins_per_dim, "Bins per state dimension");
  auto* o_dsteps = c_cart->add_option("--decision-steps", decision_steps,
                                      "Physics steps per tabular transition");
  auto* o_epis = c_cart->add_option("--episodes", episodes, "Rollout episodes per evaluation");
  auto* o_evev = c_cart->add_option("--eval-every", eval_every, "Iterations between evaluations");
  auto* o_viit = c_cart->add_option("--vi-iters", vi_iters, "Value-iteration sweeps");
  auto* o_agit = c_cart->add_option("--agg-iters", agg_iters, "Aggregated iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::from_json_file(config_path);

    if (o_seed->count()) cfg.seed = seed;
    if (o_gamma->count()) cfg.solver.gamma = gamma;
    if (o_eps->count()) cfg.solver.epsilon = epsilon;
    if (o_agg->count()) cfg.solver.agg_len = agg_len;
    if (o_glob->count()) cfg.solver.global_len = global_len;
    if (o_alpha->count()) cfg.solver.alpha = alpha;
    if (o_iters->count()) cfg.solver.iters = iters;
    if (o_reps->count()) cfg.repetitions = reps;
    if (o_out->count()) cfg.out = out_path;
    if (o_full->count()) cfg.full = full;
    if (o_fixed->count()) cfg.fixed_instance = fixed_instance;
    if (o_env->count()) cfg.env.type = env_type;
    if (o_dims->count()) cfg.env.dims = parse_dims(dims_text);
    if (o_p->count()) cfg.env.p = p;
    if (o_sigma->count()) cfg.env.sigma = sigma;
    if (o_bumps->count()) cfg.env.bumps = bumps;
    if (o_vmax->count()) cfg.env.target_vmax = target_vmax;
    if (o_bins->count()) cfg.cartpole.bins_per_dim = bins_per_dim;
    if (o_dsteps->count()) cfg.cartpole.decision_steps = decision_steps;
    if (o_epis->count()) cfg.cartpole.episodes = episodes;
    if (o_evev->count()) cfg.cartpole.eval_every = eval_every;
    if (o_viit->count()) cfg.cartpole.vi_iters = vi_iters;
    if (o_agit->count()) cfg.cartpole.agg_iters = agg_iters;
    cfg.cartpole.gamma = o_gamma->count() ? gamma : 0.99;
    cfg.cartpole.epsilon = o_eps->count() ? epsilon : 0.2;
    cfg.cartpole.seed = cfg.seed;

    if (c_solve->parsed()) {
      cfg.experiment = "solve";
      if (cfg.out.empty()) cfg.out = "solve_trace.csv";
      const std::uint64_t rs = run_seed(cfg.seed, ExperimentId::Solve, 0, 0);
      GeneratedEnv env;
      if (!model_path.empty()) {
        env.model = load_model(model_path);
        env.meta.v_star = ground_truth(env.model);
      } else {
        env = make_env(cfg.env, cfg.solver.gamma, derive_stream(rs, 1));
      }
      Rng rng(derive_stream(rs, 2));
      const AviaResult res = avia(
          env.model, cfg.solver.epsilon,
          PhaseSchedule::constant(cfg.solver.agg_len, cfg.solver.global_len),
          parse_alpha(cfg.solver.alpha), cfg.solver.iters, rng, &env.meta.v_star);
      std::ofstream trace_out(cfg.out, std::ios::binary);
      if (!trace_out) throw std::runtime_error("cannot write " + cfg.out);
      res.trace.write_csv(trace_out);
      std::printf("final linf error: %.10g (%lld update units) -> %s\n",
                  linf_distance(res.v, env.meta.v_star),
                  res.trace.rows.back().cum_updates, cfg.out.c_str());
    } else if (c_gen->parsed()) {
      cfg.experiment = "gen-maze";
      if (cfg.out.empty()) cfg.out = "maze.json";
      const GeneratedEnv env = make_env(cfg.env, cfg.solver.gamma, cfg.seed);
      save_model(env.model, cfg.out);
      write_meta_sidecar(env.meta, cfg.out);
      std::printf("%s maze %s -> %s (+.meta.json)\n", cfg.env.type.c_str(),
                  dims_label(cfg.env.dims).c_str(), cfg.out.c_str());
    } else if (c_sweep->parsed()) {
      cfg.experiment = "sweep-eps";
      if (cfg.out.empty()) cfg.out = "sweep_eps.csv";
      run_eps_sweep(cfg);
      std::printf("wrote %s\n", cfg.out.c_str());
    } else if (c_eff->parsed()) {
      cfg.experiment = "efficiency";
      if (cfg.out.empty()) cfg.out = "efficiency.csv";
      run_efficiency(cfg);
      std::printf("wrote %s\n", cfg.out.c_str());
    } else if (c_scale->parsed()) {
      cfg.experiment = "scaling";
      if (cfg.out.empty()) cfg.out = "scaling.csv";
      run_scaling(cfg);
      std::printf("wrote %s\n", cfg.out.c_str());
    } else if (c_robust->parsed()) {
      cfg.experiment = "robustness";
      if (cfg.out.empty()) cfg.out = "robustness.csv";
      run_robustness(cfg);
      std::printf("wrote %s\n", cfg.out.c_str());
    } else if (c_cart->parsed()) {
      cfg.experiment = "cartpole";
      if (cfg.out.empty()) cfg.out = "cartpole.csv";
      write_cartpole_csv(run_cartpole_benchmark(cfg.cartpole), cfg.out);
      std::printf("wrote %s\n", cfg.out.c_str());
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace aggvi
