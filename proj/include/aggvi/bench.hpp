#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aggvi/aggregation.hpp"
#include "aggvi/cartpole.hpp"
#include "aggvi/envs.hpp"
#include "aggvi/mdp.hpp"

namespace aggvi {

struct EnvConfig {
  std::string type = "terrain";  // "standard" | "terrain"
  std::vector<int> dims{100, 100};
  double p = 0.95;
  double sigma = 0.0;
  int bumps = 10;
  double target_vmax = 100.0;
};

struct SolverConfig {
  double gamma = 0.95;
  double epsilon = 0.5;
  int agg_len = 5;
  int global_len = 2;
  std::string alpha = "invsqrt";  // "const:C" | "invsqrt" | "poly:B"
  long long iters = 1000;
};

/// Parses the CLI/config step-size syntax above.
StepSizeSchedule parse_alpha(const std::string& text);

/// Experiment description; the JSON config file mirrors these fields
/// (nested objects "env", "solver", "cartpole"; see README).
struct ExperimentConfig {
  std::string experiment;
  EnvConfig env;
  SolverConfig solver;
  int repetitions = 20;
  std::uint64_t seed = 1;
  std::string out;
  bool fixed_instance = false;  // one maze shared by all repetitions
  bool full = false;            // enable the large scaling grids
  std::vector<double> eps_list{0.05, 0.1, 0.5};
  std::vector<double> p_list{0.92, 0.95, 0.98};
  std::vector<double> sigma_list{0.0, 0.01, 0.05, 0.1};
  std::vector<std::vector<int>> sizes;  // scaling sizes; defaults by `full`
  CartPoleBenchConfig cartpole;

  static ExperimentConfig from_json_file(const std::string& path);
};

struct RunRecord {
  std::uint64_t seed = 0;
  double final_error = 0.0;
  long long cum_updates = 0;
  std::vector<std::pair<long long, double>> curve;  // (updates, error) per iter
  double wall_seconds = 0.0;
};

struct SummaryKey {
  std::string env_type;
  std::string dims;  // "100x100"
  double p = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;
};

struct SummaryRow {
  SummaryKey key;
  double mean_error = 0.0;
  double ci95 = 0.0;  // 1.96 * sd / sqrt(reps); 0 for a single record
  int repetitions = 0;
};

SummaryRow summarize(const std::vector<double>& final_errors,
                     const SummaryKey& key);

/// Fixed stream ids per subcommand; run i of group g of experiment e
/// draws from derive(derive(master, e, g), i), so no two runs anywhere
/// share a stream.
enum class ExperimentId : std::uint64_t {
  Solve = 1,
  GenMaze = 2,
  EpsSweep = 3,
  Efficiency = 4,
  Scaling = 5,
  Robustness = 6,
  CartPole = 7,
};

std::uint64_t run_seed(std::uint64_t master, ExperimentId id,
                       std::uint64_t group, std::uint64_t rep);

/// Builds one benchmark instance: maze type dispatch, slip, normalization
/// and (for sigma > 0) cost noise; metadata keeps the noiseless truth.
GeneratedEnv make_env(const EnvConfig& env, double gamma, std::uint64_t env_seed);

/// One adaptive run on a prepared instance; errors are measured against
/// the instance's noiseless ground truth every iteration.
RunRecord run_avia_on_env(const GeneratedEnv& env, const SolverConfig& solver,
                          std::uint64_t seed);

/// Plain value-iteration reference with the same per-iteration error
/// checkpoints (one synchronous sweep per iteration).
RunRecord run_vi_on_env(const GeneratedEnv& env, long long iters);

std::string dims_label(const std::vector<int>& dims);

/// Final-error summaries per epsilon in eps_list on fresh instances.
std::vector<SummaryRow> run_eps_sweep(const ExperimentConfig& config);

struct EfficiencyResult {
  std::vector<RunRecord> adaptive_runs;
  std::vector<RunRecord> vi_runs;
};

/// Paired adaptive-vs-VI curves on identical instances and seeds.
EfficiencyResult run_efficiency(const ExperimentConfig& config);

/// Final-error summaries over grid sizes for both maze types.
std::vector<SummaryRow> run_scaling(const ExperimentConfig& config);

/// Final-error summaries over the (p, sigma) grid for both maze types;
/// errors are always against the noiseless truth.
std::vector<SummaryRow> run_robustness(const ExperimentConfig& config);

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path);
void write_efficiency_csv(const EfficiencyResult& result,
                          const std::string& path);

int cli_main(int argc, char** argv);

}  // namespace aggvi
