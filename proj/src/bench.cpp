#include "aggvi/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace aggvi {

using nlohmann::json;

namespace {

double wall_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_summary_header(std::ofstream& out) {
  out << "type,dims,p,sigma,epsilon,reps,mean_error,ci95\n";
}

void write_summary_row(std::ofstream& out, const SummaryRow& r) {
  out << r.key.env_type << ',' << r.key.dims << ',' << fmt(r.key.p) << ','
      << fmt(r.key.sigma) << ',' << fmt(r.key.epsilon) << ',' << r.repetitions
      << ',' << fmt(r.mean_error) << ',' << fmt(r.ci95) << '\n';
  out.flush();  // keep partial results on disk if a later group throws
}

void get_if_present(const json& j, const char* key, auto& field) {
  if (j.contains(key)) field = j[key].template get<std::decay_t<decltype(field)>>();
}

}  // namespace

StepSizeSchedule parse_alpha(const std::string& text) {
  if (text == "invsqrt") return StepSizeSchedule::inv_sqrt();
  if (text.rfind("const:", 0) == 0)
    return StepSizeSchedule::constant(std::stod(text.substr(6)));
  if (text.rfind("poly:", 0) == 0)
    return StepSizeSchedule::polynomial(std::stod(text.substr(5)));
  throw std::invalid_argument("alpha: expected const:C, invsqrt or poly:B, got '" +
                              text + "'");
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  ExperimentConfig cfg;
  get_if_present(j, "experiment", cfg.experiment);
  get_if_present(j, "repetitions", cfg.repetitions);
  get_if_present(j, "seed", cfg.seed);
  get_if_present(j, "out", cfg.out);
  get_if_present(j, "fixed_instance", cfg.fixed_instance);
  get_if_present(j, "full", cfg.full);
  get_if_present(j, "eps_list", cfg.eps_list);
  get_if_present(j, "p_list", cfg.p_list);
  get_if_present(j, "sigma_list", cfg.sigma_list);
  get_if_present(j, "sizes", cfg.sizes);
  if (j.contains("env")) {
    const json& e = j["env"];
    get_if_present(e, "type", cfg.env.type);
    get_if_present(e, "dims", cfg.env.dims);
    get_if_present(e, "p", cfg.env.p);
    get_if_present(e, "sigma", cfg.env.sigma);
    get_if_present(e, "bumps", cfg.env.bumps);
    get_if_present(e, "target_vmax", cfg.env.target_vmax);
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    get_if_present(s, "gamma", cfg.solver.gamma);
    get_if_present(s, "epsilon", cfg.solver.epsilon);
    get_if_present(s, "agg_len", cfg.solver.agg_len);
    get_if_present(s, "global_len", cfg.solver.global_len);
    get_if_present(s, "alpha", cfg.solver.alpha);
    get_if_present(s, "iters", cfg.solver.iters);
  }
  if (j.contains("cartpole")) {
    const json& c = j["cartpole"];
    get_if_present(c, "bins_per_dim", cfg.cartpole.bins_per_dim);
    get_if_present(c, "decision_steps", cfg.cartpole.decision_steps);
    get_if_present(c, "resolve_iters", cfg.cartpole.resolve_iters);
    if (c.contains("bins")) {
      const auto b = c["bins"].get<std::vector<int>>();
      if (b.size() != 4)
        throw std::invalid_argument("cartpole.bins: expected 4 entries");
      std::copy(b.begin(), b.end(), cfg.cartpole.bins.begin());
    }
    get_if_present(c, "episodes", cfg.cartpole.episodes);
    get_if_present(c, "eval_every", cfg.cartpole.eval_every);
    get_if_present(c, "vi_iters", cfg.cartpole.vi_iters);
    get_if_present(c, "agg_iters", cfg.cartpole.agg_iters);
  }
  return cfg;
}

SummaryRow summarize(const std::vector<double>& final_errors,
                     const SummaryKey& key) {
  if (final_errors.empty())
    throw std::invalid_argument("summarize: need at least one record");
  SummaryRow row;
  row.key = key;
  row.repetitions = static_cast<int>(final_errors.size());
  double sum = 0.0;
  for (double e : final_errors) sum += e;
  row.mean_error = sum / static_cast<double>(final_errors.size());
  if (final_errors.size() > 1) {
    double ss = 0.0;
    for (double e : final_errors)
      ss += (e - row.mean_error) * (e - row.mean_error);
    const double sd = std::sqrt(ss / static_cast<double>(final_errors.size() - 1));
    row.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(final_errors.size()));
  }
  return row;
}

std::uint64_t run_seed(std::uint64_t master, ExperimentId id,
                       std::uint64_t group, std::uint64_t rep) {
  return derive_stream(derive_stream(master, static_cast<std::uint64_t>(id), group),
                       rep);
}

GeneratedEnv make_env(const EnvConfig& env, double gamma, std::uint64_t env_seed) {
  if (env.type == "standard") {
    MazeSpec spec{env.dims, env.p, env_seed, env.target_vmax, gamma};
    GeneratedEnv out = gen_standard_maze(spec);
    if (env.sigma > 0.0) {
      Rng noise = Rng(env_seed).fork(2);  // same slot terrain uses internally
      out.model = add_cost_noise(out.model, env.sigma, noise);
      out.meta.sigma = env.sigma;
    }
    return out;
  }
  if (env.type == "terrain") {
    TerrainSpec spec{env.dims, env.p,     env_seed, env.target_vmax,
                     gamma,    env.sigma, env.bumps};
    return gen_terrain_maze(spec);
  }
  throw std::invalid_argument("env type must be 'standard' or 'terrain', got '" +
                              env.type + "'");
}

RunRecord run_avia_on_env(const GeneratedEnv& env, const SolverConfig& solver,
                          std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_stream(seed, 2));
  const AviaResult res =
      avia(env.model, solver.epsilon,
           PhaseSchedule::constant(solver.agg_len, solver.global_len),
           parse_alpha(solver.alpha), solver.iters, rng, &env.meta.v_star);

  RunRecord rec;
  rec.seed = seed;
  rec.final_error = linf_distance(res.v, env.meta.v_star);
  rec.curve.reserve(res.trace.rows.size());
  for (const TraceRow& r : res.trace.rows)
    rec.curve.emplace_back(r.cum_updates, r.linf_error);
  rec.cum_updates = res.trace.rows.empty() ? 0 : res.trace.rows.back().cum_updates;
  rec.wall_seconds = wall_since(t0);
  return rec;
}

RunRecord run_vi_on_env(const GeneratedEnv& env, long long iters) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.curve.reserve(static_cast<std::size_t>(iters));
  ValueFunction v(env.model.num_states, 0.0);
  long long cum = 0;
  for (long long t = 1; t <= iters; ++t) {
    v = bellman_sweep(env.model, v);
    cum += env.model.num_states;
    rec.curve.emplace_back(cum, linf_distance(v, env.meta.v_star));
  }
  rec.final_error = rec.curve.empty() ? 0.0 : rec.curve.back().second;
  rec.cum_updates = cum;
  rec.wall_seconds = wall_since(t0);
  return rec;
}

std::string dims_label(const std::vector<int>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s;
}

std::vector<SummaryRow> run_eps_sweep(const ExperimentConfig& cfg) {
  if (cfg.eps_list.empty())
    throw std::invalid_argument("sweep-eps: eps_list must be nonempty");
  std::ofstream out;
  if (!cfg.out.empty()) {
    out = open_out(cfg.out);
    write_summary_header(out);
  }
  std::vector<SummaryRow> rows;
  for (std::size_t gi = 0; gi < cfg.eps_list.size(); ++gi) {
    SolverConfig solver = cfg.solver;
    solver.epsilon = cfg.eps_list[gi];
    std::vector<double> errors;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t rs =
          run_seed(cfg.seed, ExperimentId::EpsSweep, gi, static_cast<std::uint64_t>(rep));
      const std::uint64_t env_seed =
          cfg.fixed_instance ? run_seed(cfg.seed, ExperimentId::EpsSweep, gi, 0)
                             : rs;
      const GeneratedEnv env =
          make_env(cfg.env, solver.gamma, derive_stream(env_seed, 1));
      errors.push_back(run_avia_on_env(env, solver, rs).final_error);
    }
    SummaryRow row = summarize(
        errors, {cfg.env.type, dims_label(cfg.env.dims), cfg.env.p, cfg.env.sigma,
                 solver.epsilon});
    if (out.is_open()) write_summary_row(out, row);
    rows.push_back(std::move(row));
  }
  return rows;
}

EfficiencyResult run_efficiency(const ExperimentConfig& cfg) {
  EfficiencyResult result;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const std::uint64_t rs =
        run_seed(cfg.seed, ExperimentId::Efficiency, 0, static_cast<std::uint64_t>(rep));
    const std::uint64_t env_seed =
        cfg.fixed_instance ? run_seed(cfg.seed, ExperimentId::Efficiency, 0, 0) : rs;
    const GeneratedEnv env =
        make_env(cfg.env, cfg.solver.gamma, derive_stream(env_seed, 1));
    result.adaptive_runs.push_back(run_avia_on_env(env, cfg.solver, rs));
    result.vi_runs.push_back(run_vi_on_env(env, cfg.solver.iters));
  }
  if (!cfg.out.empty()) write_efficiency_csv(result, cfg.out);
  return result;
}

std::vector<SummaryRow> run_scaling(const ExperimentConfig& cfg) {
  std::vector<std::vector<int>> sizes = cfg.sizes;
  if (sizes.empty()) {
    sizes = cfg.full ? std::vector<std::vector<int>>{{100, 100},
                                                     {200, 200},
                                                     {300, 300},
                                                     {500, 500},
                                                     {1000, 1000}}
                     : std::vector<std::vector<int>>{{50, 50}, {100, 100}};
  }
  std::ofstream out;
  if (!cfg.out.empty()) {
    out = open_out(cfg.out);
    write_summary_header(out);
  }
  std::vector<SummaryRow> rows;
  std::uint64_t group = 0;
  for (const std::string type : {"terrain", "standard"}) {
    for (const auto& dims : sizes) {
      EnvConfig env_cfg = cfg.env;
      env_cfg.type = type;
      env_cfg.dims = dims;
      std::vector<double> errors;
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t rs = run_seed(cfg.seed, ExperimentId::Scaling, group,
                                          static_cast<std::uint64_t>(rep));
        const std::uint64_t env_seed =
            cfg.fixed_instance ? run_seed(cfg.seed, ExperimentId::Scaling, group, 0)
                               : rs;
        const GeneratedEnv env =
            make_env(env_cfg, cfg.solver.gamma, derive_stream(env_seed, 1));
        errors.push_back(run_avia_on_env(env, cfg.solver, rs).final_error);
      }
      SummaryRow row = summarize(errors, {type, dims_label(dims), env_cfg.p,
                                          env_cfg.sigma, cfg.solver.epsilon});
      if (out.is_open()) write_summary_row(out, row);
      rows.push_back(std::move(row));
      ++group;
    }
  }
  return rows;
}

std::vector<SummaryRow> run_robustness(const ExperimentConfig& cfg) {
  if (cfg.p_list.empty() || cfg.sigma_list.empty())
    throw std::invalid_argument("robustness: p_list and sigma_list must be nonempty");
  std::ofstream out;
  if (!cfg.out.empty()) {
    out = open_out(cfg.out);
    write_summary_header(out);
  }
  std::vector<SummaryRow> rows;
  std::uint64_t group = 0;
  for (const std::string type : {"terrain", "standard"}) {
    for (double p : cfg.p_list) {
      for (double sigma : cfg.sigma_list) {
        EnvConfig env_cfg = cfg.env;
        env_cfg.type = type;
        env_cfg.p = p;
        env_cfg.sigma = sigma;
        std::vector<double> errors;
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
          const std::uint64_t rs = run_seed(cfg.seed, ExperimentId::Robustness,
                                            group, static_cast<std::uint64_t>(rep));
          const std::uint64_t env_seed =
              cfg.fixed_instance
                  ? run_seed(cfg.seed, ExperimentId::Robustness, group, 0)
                  : rs;
          const GeneratedEnv env =
              make_env(env_cfg, cfg.solver.gamma, derive_stream(env_seed, 1));
          errors.push_back(run_avia_on_env(env, cfg.solver, rs).final_error);
        }
        SummaryRow row =
            summarize(errors, {type, dims_label(env_cfg.dims), p, sigma,
                               cfg.solver.epsilon});
        if (out.is_open()) write_summary_row(out, row);
        rows.push_back(std::move(row));
        ++group;
      }
    }
  }
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path) {
  std::ofstream out = open_out(path);
  write_summary_header(out);
  for (const SummaryRow& r : rows) write_summary_row(out, r);
}

void write_efficiency_csv(const EfficiencyResult& result,
                          const std::string& path) {
  std::ofstream out = open_out(path);
  out << "variant,iter,mean_cum_updates,mean_error,ci95\n";
  auto emit = [&](const char* variant, const std::vector<RunRecord>& runs) {
    if (runs.empty()) return;
    std::size_t iters = runs[0].curve.size();
    for (const RunRecord& r : runs) iters = std::min(iters, r.curve.size());
    for (std::size_t i = 0; i < iters; ++i) {
      double upd = 0.0;
      std::vector<double> errs;
      errs.reserve(runs.size());
      for (const RunRecord& r : runs) {
        upd += static_cast<double>(r.curve[i].first);
        errs.push_back(r.curve[i].second);
      }
      const SummaryRow s = summarize(errs, {});
      out << variant << ',' << (i + 1) << ','
          << fmt(upd / static_cast<double>(runs.size())) << ','
          << fmt(s.mean_error) << ',' << fmt(s.ci95) << '\n';
    }
    out.flush();
  };
  emit("adaptive", result.adaptive_runs);
  emit("vi", result.vi_runs);
}

}  // namespace aggvi
