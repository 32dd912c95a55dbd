#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aggvi/mdp.hpp"
#include "aggvi/rng.hpp"

namespace aggvi {

/// Cart-pole balancing task constants. Dynamics follow the classic
/// benchmark formulation (explicit Euler); failure thresholds are 12
/// degrees of pole angle and 2.4 units of cart travel, with episodes
/// truncated at 200 steps.
struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double force_mag = 10.0;
  double dt = 0.02;
  double fail_angle = 12.0 * 3.14159265358979323846 / 180.0;
  double fail_position = 2.4;
  int max_steps = 200;
};

struct ContState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
};

enum class CartAction : std::uint32_t { Left = 0, Right = 1 };

struct CartStepResult {
  ContState s;
  bool done;
};

/// One Euler step with force -F (Left) or +F (Right); done when the new
/// state violates a failure threshold.
CartStepResult cartpole_step(const CartPoleParams& params, const ContState& s,
                             CartAction a);

/// Equidistant binning of the 4-dimensional state space plus one
/// absorbing terminal bin for failure states. Velocity components beyond
/// their bounds clamp into the edge bins.
struct Discretization {
  std::array<double, 4> lo, hi;
  std::array<int, 4> bins;

  std::uint32_t grid_bins() const {
    return static_cast<std::uint32_t>(bins[0]) * bins[1] * bins[2] * bins[3];
  }
  std::uint32_t total_bins() const { return grid_bins() + 1; }
  std::uint32_t terminal_bin() const { return grid_bins(); }

  std::uint32_t bin_of(const CartPoleParams& params, const ContState& s) const;
  ContState center_of(std::uint32_t bin) const;
};

/// Default bounds: x and theta at their failure thresholds, velocities
/// clamped to [-3, 3] and [-3.5, 3.5].
Discretization build_discretization(const CartPoleParams& params,
                                    const std::array<int, 4>& bins_per_dim);
Discretization build_discretization(const CartPoleParams& params,
                                    int bins_per_dim);

/// Deterministic tabular model over the bins: each non-terminal bin
/// simulates `decision_steps` consecutive Euler steps from its center per
/// action (point-mass row; failure anywhere along the way leads to the
/// terminal bin), cost -1 per decision; the terminal bin self-loops at
/// cost 0. A single dt=0.02 step rarely leaves a bin at usable bin
/// counts, which fills the model with absorbing self-loops and makes its
/// greedy policies worthless, so decisions span several physics steps by
/// default.
MdpModel build_tabular_mdp(const CartPoleParams& params,
                           const Discretization& d, double gamma,
                           int decision_steps = 5);

/// Rewards of `episodes` continuous rollouts acting through pi on the
/// binned state; +1 per surviving step, truncated at max_steps. Initial
/// states are uniform in [-0.05, 0.05]^4.
std::vector<double> rollout_episodes(const CartPoleParams& params,
                                     const Discretization& d, const Policy& pi,
                                     int episodes, Rng& rng);
double rollout_policy(const CartPoleParams& params, const Discretization& d,
                      const Policy& pi, int episodes, Rng& rng);

struct CartPoleBenchConfig {
  CartPoleParams params;
  std::array<int, 4> bins{5, 5, 9, 9};  // 2025 + 1 terminal bin
  int bins_per_dim = 0;                 // > 0 overrides all four axes
  double gamma = 0.99;
  double epsilon = 0.2;
  int decision_steps = 4;
  int resolve_iters = 3;  // leading exact sweeps of the aggregated variant
  int episodes = 100;
  int eval_every = 1;  // iterations between rollout evaluations
  long long vi_iters = 400;
  long long agg_iters = 600;
  std::uint64_t seed = 0;
};

struct CartPoleCurvePoint {
  std::string variant;  // "vi" or "agg"
  long long cum_updates;
  double mean_reward;
  double ci95;
};

/// Update-efficiency comparison on the discretized cart-pole model:
///   vi   - synchronous value iteration, |S| units per iteration.
///   agg  - the aggregated solver: `resolve_iters` leading iterations run
///          on the identity partition at alpha = 1 (exact sweeps, |S|
///          units; a constant vector buckets into one group, so values
///          must separate before bucketing means anything). Every later
///          iteration re-buckets the current vector by value (width
///          epsilon), samples one member per bucket, and mixes that
///          member's backup into every member's own value,
///              v[s] <- (1 - a_t) v[s] + a_t T_{s_j}(v),  s in bucket j,
///          costing K units (K backup evaluations). a_t = 1/sqrt(t).
/// At the evaluation cadence both variants roll out their greedy policy
/// with shared per-checkpoint episode streams.
std::vector<CartPoleCurvePoint> run_cartpole_benchmark(
    const CartPoleBenchConfig& config);

void write_cartpole_csv(const std::vector<CartPoleCurvePoint>& curve,
                        const std::string& path);

}  // namespace aggvi
