#include "aggvi/mdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace aggvi {

void MdpModel::validate() const {
  auto fail = [](const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": " + what);
  };
  if (actions.size() != num_states)
    fail("states", "expected " + std::to_string(num_states) + " entries, got " +
                       std::to_string(actions.size()));
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma", "must lie in [0, 1)");
  for (std::uint32_t s = 0; s < num_states; ++s) {
    const std::string sp = "states[" + std::to_string(s) + "]";
    if (actions[s].empty()) fail(sp, "state has no actions");
    for (std::size_t a = 0; a < actions[s].size(); ++a) {
      const std::string ap = sp + ".actions[" + std::to_string(a) + "]";
      const ActionEntry& act = actions[s][a];
      if (!std::isfinite(act.cost)) fail(ap + ".cost", "not finite");
      if (act.transitions.empty()) fail(ap + ".transitions", "empty row");
      double sum = 0.0;
      std::unordered_set<std::uint32_t> seen;
      for (std::size_t k = 0; k < act.transitions.size(); ++k) {
        const std::string tp = ap + ".transitions[" + std::to_string(k) + "]";
        const Transition& tr = act.transitions[k];
        if (tr.dest >= num_states) fail(tp, "destination out of range");
        if (!(tr.prob > 0.0 && tr.prob <= 1.0)) fail(tp, "probability not in (0, 1]");
        if (!seen.insert(tr.dest).second) fail(tp, "duplicate destination");
        sum += tr.prob;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        fail(ap + ".transitions", "row sums to " + std::to_string(sum));
    }
  }
  if (!initial_dist.empty()) {
    if (initial_dist.size() != num_states)
      fail("initial_dist", "length mismatch");
    double sum = 0.0;
    for (std::size_t s = 0; s < initial_dist.size(); ++s) {
      if (!(initial_dist[s] >= 0.0))
        fail("initial_dist[" + std::to_string(s) + "]", "negative probability");
      sum += initial_dist[s];
    }
    if (std::abs(sum - 1.0) > 1e-9)
      fail("initial_dist", "sums to " + std::to_string(sum));
  }
}

BackupResult bellman_backup(const MdpModel& model, const ValueFunction& v,
                            std::uint32_t s) {
  const auto& acts = model.actions[s];
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_a = 0;
  for (std::uint32_t a = 0; a < acts.size(); ++a) {
    double ev = 0.0;
    for (const Transition& tr : acts[a].transitions) ev += tr.prob * v[tr.dest];
    double q = acts[a].cost + model.gamma * ev;
    if (q < best) {
      best = q;
      best_a = a;
    }
  }
  return {best, best_a};
}

ValueFunction bellman_sweep(const MdpModel& model, const ValueFunction& v) {
  ValueFunction out(model.num_states);
  for (std::uint32_t s = 0; s < model.num_states; ++s)
    out[s] = bellman_backup(model, v, s).value;
  return out;
}

ViResult value_iteration(const MdpModel& model, ValueFunction v0,
                         long max_iters, double tol) {
  ViResult res;
  res.v = std::move(v0);
  ValueFunction next(model.num_states);
  for (long it = 0; it < max_iters; ++it) {
    double change = 0.0;
    for (std::uint32_t s = 0; s < model.num_states; ++s) {
      next[s] = bellman_backup(model, res.v, s).value;
      change = std::max(change, std::abs(next[s] - res.v[s]));
    }
    res.v.swap(next);
    ++res.iters;
    res.updates += model.num_states;
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Policy greedy_policy(const MdpModel& model, const ValueFunction& v) {
  Policy pi(model.num_states);
  for (std::uint32_t s = 0; s < model.num_states; ++s)
    pi[s] = bellman_backup(model, v, s).best_action;
  return pi;
}

ViResult policy_evaluation(const MdpModel& model, const Policy& pi, double tol,
                           long max_iters) {
  ViResult res;
  res.v.assign(model.num_states, 0.0);
  ValueFunction next(model.num_states);
  for (long it = 0; it < max_iters; ++it) {
    double change = 0.0;
    for (std::uint32_t s = 0; s < model.num_states; ++s) {
      const ActionEntry& act = model.actions[s][pi[s]];
      double ev = 0.0;
      for (const Transition& tr : act.transitions) ev += tr.prob * res.v[tr.dest];
      next[s] = act.cost + model.gamma * ev;
      change = std::max(change, std::abs(next[s] - res.v[s]));
    }
    res.v.swap(next);
    ++res.iters;
    res.updates += model.num_states;
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double linf_distance(const ValueFunction& a, const ValueFunction& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("linf_distance: length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

MdpModel scale_costs(const MdpModel& model, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scale_costs: c must be > 0");
  MdpModel out = model;
  for (auto& state_actions : out.actions)
    for (auto& act : state_actions) act.cost *= c;
  return out;
}

}  // namespace aggvi
