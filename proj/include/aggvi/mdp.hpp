#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aggvi {

/// Dense cost-to-go vector, one entry per state.
using ValueFunction = std::vector<double>;

/// Per-state chosen action index.
using Policy = std::vector<std::uint32_t>;

struct Transition {
  std::uint32_t dest;
  double prob;
};

/// One action of one state: immediate cost plus a sparse transition row.
struct ActionEntry {
  double cost = 0.0;
  std::vector<Transition> transitions;
};

/// Sparse tabular MDP. Minimization convention: solvers compute the
/// per-state minimum of cost + gamma * expected next value.
///
/// Invariants (checked by validate()):
///   - every state has at least one action
///   - each transition row: probs in (0,1], no duplicate destinations,
///     destinations < num_states, row sums to 1 within 1e-9
///   - gamma in [0,1), all costs finite
///   - initial_dist, when present, has length num_states and sums to 1
struct MdpModel {
  std::uint32_t num_states = 0;
  double gamma = 0.0;
  std::vector<std::vector<ActionEntry>> actions;  // actions[s]
  std::vector<double> initial_dist;               // optional; empty if unused

  std::uint32_t num_actions(std::uint32_t s) const {
    return static_cast<std::uint32_t>(actions[s].size());
  }

  /// Throws std::invalid_argument with a field-path diagnostic on the
  /// first violated invariant.
  void validate() const;
};

struct BackupResult {
  double value;
  std::uint32_t best_action;
};

/// T_s(v): minimum over actions of cost + gamma * row . v, with ties
/// broken toward the lowest action index.
BackupResult bellman_backup(const MdpModel& model, const ValueFunction& v,
                            std::uint32_t s);

/// One synchronous application of T; every output entry reads the input v.
ValueFunction bellman_sweep(const MdpModel& model, const ValueFunction& v);

struct ViResult {
  ValueFunction v;
  long iters = 0;
  long long updates = 0;  // iters * num_states
  bool converged = false;
};

/// Repeats bellman_sweep until the sup-norm change drops to tol or
/// max_iters is hit (converged=false in that case).
ViResult value_iteration(const MdpModel& model, ValueFunction v0,
                         long max_iters, double tol);

/// Per-state argmin of the backup, lowest index on ties.
Policy greedy_policy(const MdpModel& model, const ValueFunction& v);

/// Iterates the policy-restricted operator v <- r_pi + gamma P_pi v to a
/// sup-norm change of tol.
ViResult policy_evaluation(const MdpModel& model, const Policy& pi, double tol,
                           long max_iters = 1000000);

/// max_s |a(s) - b(s)|; throws on length mismatch.
double linf_distance(const ValueFunction& a, const ValueFunction& b);

/// Copy of the model with every cost multiplied by c > 0.
MdpModel scale_costs(const MdpModel& model, double c);

}  // namespace aggvi
