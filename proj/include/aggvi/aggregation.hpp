#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "aggvi/mdp.hpp"
#include "aggvi/rng.hpp"

namespace aggvi {

/// Grouping of states into mega-states (blocks). Both directions of the
/// map are kept; blocks are disjoint, nonempty and cover all states.
struct Partition {
  std::vector<std::uint32_t> block_of_state;
  std::vector<std::vector<std::uint32_t>> states_of_block;

  std::uint32_t num_states() const {
    return static_cast<std::uint32_t>(block_of_state.size());
  }
  std::uint32_t num_blocks() const {
    return static_cast<std::uint32_t>(states_of_block.size());
  }

  static Partition identity(std::uint32_t n);
  static Partition single_block(std::uint32_t n);
  static Partition from_blocks(std::vector<std::vector<std::uint32_t>> blocks);

  /// Throws std::invalid_argument if the two representations are not a
  /// consistent disjoint cover with nonempty blocks.
  void validate() const;
};

/// Aggregated cost-to-go vector, one entry per block.
using AggValues = std::vector<double>;

struct Aggregation {
  Partition partition;
  AggValues w;
};

/// Buckets states by value into half-open intervals of width eps starting
/// at min(v); the last bucket is closed on the right so max(v) is always
/// assigned. Empty buckets are removed (order kept) and each surviving
/// bucket's W is the midpoint of its pre-deletion interval. A constant v
/// yields a single block with W = (that constant).
Aggregation value_based_aggregation(double eps, const ValueFunction& v);

/// Piecewise-constant expansion: out[s] = w[block_of_state[s]].
ValueFunction lift(const Partition& p, const AggValues& w);

/// One stochastic aggregated sweep. For each block j a member state s is
/// sampled uniformly and
///     w'[j] = (1 - alpha) w[j] + alpha T_s(lift(p, w)),
/// with every backup reading the input w (synchronous). Each block draws
/// from its own counter-based substream keyed off one draw from rng, so
/// the result does not depend on block evaluation order. Costs exactly
/// p.num_blocks() update units.
AggValues aggregated_sweep(const MdpModel& model, const Partition& p,
                           const AggValues& w, double alpha, Rng& rng);

struct StepSizeSchedule {
  enum class Kind { Constant, InvSqrt, Polynomial };
  Kind kind = Kind::InvSqrt;
  double value = 1.0;  // c for Constant, beta (> 0) for Polynomial

  static StepSizeSchedule constant(double c);
  static StepSizeSchedule inv_sqrt() { return {Kind::InvSqrt, 1.0}; }
  static StepSizeSchedule polynomial(double beta);

  /// alpha at aggregated-iteration counter t_sa >= 1; always in (0, 1].
  double at(long long t_sa) const;
};

/// Largest constant step size compatible with the stable-field condition
/// alpha < eps / ((1 - gamma) * sup|A_i|), times a 0.99 margin, clamped
/// into the valid step-size range (0, 1].
double prop2_alpha(double eps, double gamma, int agg_len);

/// Lengths of the alternating global (B_i) and aggregated (A_i) intervals.
/// Each sequence repeats its last element once exhausted, so a single
/// entry means a constant length.
struct PhaseSchedule {
  std::vector<int> global_lens{2};  // |B_i| >= 1
  std::vector<int> agg_lens{5};     // |A_i| >= 0

  static PhaseSchedule constant(int agg_len, int global_len);

  int global_len(std::size_t phase) const;
  int agg_len(std::size_t phase) const;
  void validate() const;
};

struct TraceRow {
  long long iter;          // 1-based
  char phase;              // 'G' global sweep, 'A' aggregated sweep
  long long cum_updates;   // running sum of update units
  std::uint32_t k;         // units this iteration: |S| for 'G', blocks for 'A'
  double linf_error;       // vs ground truth; NaN when not supplied
};

struct SolveTrace {
  std::vector<TraceRow> rows;

  /// CSV with header `iter,phase,cum_updates,K,linf_error`; the error
  /// field is left blank for NaN.
  void write_csv(std::ostream& os) const;
};

struct RviaResult {
  AggValues w;
  SolveTrace trace;
};

/// Random value iteration on a fixed partition: W_0 = 0, then n
/// aggregated sweeps with alpha from the schedule (t_sa = 1..n).
RviaResult rvia(const MdpModel& model, const Partition& p,
                const StepSizeSchedule& steps, long long n, Rng& rng);

struct AggFixedPoint {
  AggValues w;
  long iters = 0;
  bool converged = false;
};

/// Deterministic fixed point of the block-averaged operator
///     F(w)(j) = mean over s in block j of T_s(lift(p, w)),
/// iterated from 0 until the sup-norm change drops to tol. F is a
/// gamma-contraction, so this terminates for any tol > 0.
AggFixedPoint aggregate_fixed_point(const MdpModel& model, const Partition& p,
                                    double tol, long max_iters = 1000000);

/// Per-block max spread of v_star: e[j] = max_{s1,s2 in block j}
/// |v_star(s1) - v_star(s2)|.
std::vector<double> aggregation_error_vector(const Partition& p,
                                             const ValueFunction& v_star);

struct AviaResult {
  ValueFunction v;
  SolveTrace trace;
};

/// Value iteration with adaptive aggregation. Iterations 1..n walk the
/// intervals B_1, A_1, B_2, A_2, ... of the phase schedule:
///   - global iteration: on interval entry the working vector becomes the
///     lift of the current (partition, W); then one synchronous
///     bellman_sweep (|S| units).
///   - aggregated iteration: on interval entry the working vector is
///     re-bucketed by value_based_aggregation(eps, .), whose output
///     replaces (partition, W); then one aggregated_sweep with alpha at
///     t_sa (K units). t_sa counts aggregated iterations across the whole
///     run and never resets.
/// Returns the working vector after iteration n: the global vector when n
/// fell in a B interval, lift(partition, W) otherwise. When ground_truth
/// is given, every trace row carries the sup-norm error of the current
/// full-space iterate.
AviaResult avia(const MdpModel& model, double eps, const PhaseSchedule& phases,
                const StepSizeSchedule& steps, long long n, Rng& rng,
                const ValueFunction* ground_truth = nullptr);

}  // namespace aggvi
