#include "aggvi/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace aggvi {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Backup at state s against the implicit lift of (p, w); avoids
// materializing the full-length vector in the aggregated hot path.
double backup_on_lift(const MdpModel& model, const Partition& p,
                      const AggValues& w, std::uint32_t s) {
  const auto& acts = model.actions[s];
  double best = std::numeric_limits<double>::infinity();
  for (const ActionEntry& act : acts) {
    double ev = 0.0;
    for (const Transition& tr : act.transitions)
      ev += tr.prob * w[p.block_of_state[tr.dest]];
    best = std::min(best, act.cost + model.gamma * ev);
  }
  return best;
}

double linf_error_of_lift(const Partition& p, const AggValues& w,
                          const ValueFunction& gt) {
  double d = 0.0;
  for (std::uint32_t s = 0; s < gt.size(); ++s)
    d = std::max(d, std::abs(w[p.block_of_state[s]] - gt[s]));
  return d;
}

}  // namespace

Partition Partition::identity(std::uint32_t n) {
  Partition p;
  p.block_of_state.resize(n);
  p.states_of_block.resize(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    p.block_of_state[s] = s;
    p.states_of_block[s] = {s};
  }
  return p;
}

Partition Partition::single_block(std::uint32_t n) {
  Partition p;
  p.block_of_state.assign(n, 0);
  p.states_of_block.resize(1);
  p.states_of_block[0].resize(n);
  for (std::uint32_t s = 0; s < n; ++s) p.states_of_block[0][s] = s;
  return p;
}

Partition Partition::from_blocks(std::vector<std::vector<std::uint32_t>> blocks) {
  Partition p;
  p.states_of_block = std::move(blocks);
  std::size_t n = 0;
  for (const auto& b : p.states_of_block) n += b.size();
  p.block_of_state.assign(n, 0);
  for (std::uint32_t j = 0; j < p.states_of_block.size(); ++j)
    for (std::uint32_t s : p.states_of_block[j]) p.block_of_state[s] = j;
  p.validate();
  return p;
}

void Partition::validate() const {
  const std::uint32_t n = num_states();
  const std::uint32_t k = num_blocks();
  if (k > n) throw std::invalid_argument("partition: more blocks than states");
  std::vector<char> seen(n, 0);
  for (std::uint32_t j = 0; j < k; ++j) {
    if (states_of_block[j].empty())
      throw std::invalid_argument("partition: block " + std::to_string(j) +
                                  " is empty");
    for (std::uint32_t s : states_of_block[j]) {
      if (s >= n || seen[s])
        throw std::invalid_argument("partition: state " + std::to_string(s) +
                                    " missing or repeated");
      if (block_of_state[s] != j)
        throw std::invalid_argument("partition: inconsistent maps at state " +
                                    std::to_string(s));
      seen[s] = 1;
    }
  }
  for (std::uint32_t s = 0; s < n; ++s)
    if (!seen[s])
      throw std::invalid_argument("partition: state " + std::to_string(s) +
                                  " not covered");
}

Aggregation value_based_aggregation(double eps, const ValueFunction& v) {
  if (!(eps > 0.0)) throw std::invalid_argument("value_based_aggregation: eps must be > 0");
  if (v.empty()) throw std::invalid_argument("value_based_aggregation: empty value vector");

  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double b1 = *lo_it, b2 = *hi_it;

  Aggregation out;
  out.partition.block_of_state.resize(v.size());

  if (b1 == b2) {
    out.partition = Partition::single_block(static_cast<std::uint32_t>(v.size()));
    out.w = {b1};
    return out;
  }

  const auto n_buckets = static_cast<std::int64_t>(std::ceil((b2 - b1) / eps));
  // bucket index (0-based); the top bucket absorbs its right edge
  std::vector<std::int64_t> bucket_of_state(v.size());
  std::vector<std::int64_t> count(n_buckets, 0);
  for (std::size_t s = 0; s < v.size(); ++s) {
    auto i = static_cast<std::int64_t>(std::floor((v[s] - b1) / eps));
    i = std::clamp<std::int64_t>(i, 0, n_buckets - 1);
    bucket_of_state[s] = i;
    ++count[i];
  }

  // delete empty buckets, keeping order; W uses the original bucket index
  std::vector<std::int64_t> new_index(n_buckets, -1);
  std::uint32_t k = 0;
  for (std::int64_t i = 0; i < n_buckets; ++i) {
    if (count[i] == 0) continue;
    new_index[i] = k++;
    out.w.push_back(b1 + (static_cast<double>(i) + 0.5) * eps);
  }
  out.partition.states_of_block.resize(k);
  for (std::int64_t i = 0; i < n_buckets; ++i)
    if (count[i] > 0)
      out.partition.states_of_block[new_index[i]].reserve(count[i]);
  for (std::size_t s = 0; s < v.size(); ++s) {
    const auto j = static_cast<std::uint32_t>(new_index[bucket_of_state[s]]);
    out.partition.block_of_state[s] = j;
    out.partition.states_of_block[j].push_back(static_cast<std::uint32_t>(s));
  }
  return out;
}

ValueFunction lift(const Partition& p, const AggValues& w) {
  if (w.size() != p.num_blocks())
    throw std::invalid_argument("lift: W has " + std::to_string(w.size()) +
                                " entries for " + std::to_string(p.num_blocks()) +
                                " blocks");
  ValueFunction out(p.num_states());
  for (std::uint32_t s = 0; s < out.size(); ++s) out[s] = w[p.block_of_state[s]];
  return out;
}

AggValues aggregated_sweep(const MdpModel& model, const Partition& p,
                           const AggValues& w, double alpha, Rng& rng) {
  const std::uint32_t k = p.num_blocks();
  const std::uint64_t sweep_key = rng.next_u64();
  AggValues next(k);
  for (std::uint32_t j = 0; j < k; ++j) {
    const auto& members = p.states_of_block[j];
    Rng block_rng(derive_stream(sweep_key, j));
    const std::uint32_t s = members[block_rng.next_below(members.size())];
    next[j] = (1.0 - alpha) * w[j] + alpha * backup_on_lift(model, p, w, s);
  }
  return next;
}

StepSizeSchedule StepSizeSchedule::constant(double c) {
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("step size: constant must lie in (0, 1]");
  return {Kind::Constant, c};
}

StepSizeSchedule StepSizeSchedule::polynomial(double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("step size: polynomial exponent must be > 0");
  return {Kind::Polynomial, beta};
}

double StepSizeSchedule::at(long long t_sa) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::InvSqrt:
      return 1.0 / std::sqrt(static_cast<double>(t_sa));
    case Kind::Polynomial:
      return std::pow(static_cast<double>(t_sa), -value);
  }
  return 1.0;
}

double prop2_alpha(double eps, double gamma, int agg_len) {
  return std::min(1.0, 0.99 * eps / ((1.0 - gamma) * static_cast<double>(agg_len)));
}

PhaseSchedule PhaseSchedule::constant(int agg_len, int global_len) {
  PhaseSchedule s;
  s.agg_lens = {agg_len};
  s.global_lens = {global_len};
  s.validate();
  return s;
}

int PhaseSchedule::global_len(std::size_t phase) const {
  return global_lens[std::min(phase, global_lens.size() - 1)];
}

int PhaseSchedule::agg_len(std::size_t phase) const {
  return agg_lens[std::min(phase, agg_lens.size() - 1)];
}

void PhaseSchedule::validate() const {
  if (global_lens.empty() || agg_lens.empty())
    throw std::invalid_argument("phase schedule: empty length sequence");
  for (int g : global_lens)
    if (g < 1) throw std::invalid_argument("phase schedule: global length must be >= 1");
  for (int a : agg_lens)
    if (a < 0) throw std::invalid_argument("phase schedule: aggregated length must be >= 0");
}

void SolveTrace::write_csv(std::ostream& os) const {
  os << "iter,phase,cum_updates,K,linf_error\n";
  char buf[64];
  for (const TraceRow& r : rows) {
    os << r.iter << ',' << r.phase << ',' << r.cum_updates << ',' << r.k << ',';
    if (!std::isnan(r.linf_error)) {
      std::snprintf(buf, sizeof buf, "%.10g", r.linf_error);
      os << buf;
    }
    os << '\n';
  }
}

RviaResult rvia(const MdpModel& model, const Partition& p,
                const StepSizeSchedule& steps, long long n, Rng& rng) {
  RviaResult res;
  res.w.assign(p.num_blocks(), 0.0);
  long long cum = 0;
  res.trace.rows.reserve(static_cast<std::size_t>(std::max<long long>(n, 0)));
  for (long long t = 1; t <= n; ++t) {
    res.w = aggregated_sweep(model, p, res.w, steps.at(t), rng);
    cum += p.num_blocks();
    res.trace.rows.push_back({t, 'A', cum, p.num_blocks(), kNan});
  }
  return res;
}

AggFixedPoint aggregate_fixed_point(const MdpModel& model, const Partition& p,
                                    double tol, long max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("aggregate_fixed_point: tol must be > 0");
  AggFixedPoint res;
  res.w.assign(p.num_blocks(), 0.0);
  AggValues next(p.num_blocks());
  for (long it = 0; it < max_iters; ++it) {
    double change = 0.0;
    for (std::uint32_t j = 0; j < p.num_blocks(); ++j) {
      const auto& members = p.states_of_block[j];
      double sum = 0.0;
      for (std::uint32_t s : members) sum += backup_on_lift(model, p, res.w, s);
      next[j] = sum / static_cast<double>(members.size());
      change = std::max(change, std::abs(next[j] - res.w[j]));
    }
    res.w.swap(next);
    ++res.iters;
    if (change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

std::vector<double> aggregation_error_vector(const Partition& p,
                                             const ValueFunction& v_star) {
  std::vector<double> e(p.num_blocks(), 0.0);
  for (std::uint32_t j = 0; j < p.num_blocks(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::uint32_t s : p.states_of_block[j]) {
      lo = std::min(lo, v_star[s]);
      hi = std::max(hi, v_star[s]);
    }
    e[j] = hi - lo;
  }
  return e;
}

AviaResult avia(const MdpModel& model, double eps, const PhaseSchedule& phases,
                const StepSizeSchedule& steps, long long n, Rng& rng,
                const ValueFunction* ground_truth) {
  if (!(eps > 0.0)) throw std::invalid_argument("avia: eps must be > 0");
  phases.validate();

  AviaResult res;
  ValueFunction v(model.num_states, 0.0);
  Aggregation agg;  // empty until the first aggregated interval
  long long t = 0, t_sa = 1, cum = 0;
  bool last_was_global = true;
  res.trace.rows.reserve(static_cast<std::size_t>(std::max<long long>(n, 0)));

  auto record = [&](char phase, std::uint32_t k) {
    double err = kNan;
    if (ground_truth) {
      err = (phase == 'G') ? linf_distance(v, *ground_truth)
                           : linf_error_of_lift(agg.partition, agg.w, *ground_truth);
    }
    res.trace.rows.push_back({t, phase, cum, k, err});
  };

  for (std::size_t phase = 0; t < n; ++phase) {
    const int g_len = phases.global_len(phase);
    for (int i = 0; i < g_len && t < n; ++i) {
      if (i == 0 && !last_was_global) v = lift(agg.partition, agg.w);
      v = bellman_sweep(model, v);
      ++t;
      cum += model.num_states;
      last_was_global = true;
      record('G', model.num_states);
    }
    const int a_len = phases.agg_len(phase);
    for (int i = 0; i < a_len && t < n; ++i) {
      if (i == 0) agg = value_based_aggregation(eps, v);
      agg.w = aggregated_sweep(model, agg.partition, agg.w, steps.at(t_sa), rng);
      ++t;
      ++t_sa;
      cum += agg.partition.num_blocks();
      last_was_global = false;
      record('A', agg.partition.num_blocks());
    }
  }

  res.v = last_was_global ? std::move(v) : lift(agg.partition, agg.w);
  return res;
}

}  // namespace aggvi
