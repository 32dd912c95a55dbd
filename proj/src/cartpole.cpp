#include "aggvi/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aggvi/aggregation.hpp"

namespace aggvi {

namespace {

bool failed(const CartPoleParams& p, const ContState& s) {
  return std::abs(s.theta) > p.fail_angle || std::abs(s.x) > p.fail_position;
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double ci95_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

CartStepResult cartpole_step(const CartPoleParams& p, const ContState& s,
                             CartAction a) {
  const double force = a == CartAction::Right ? p.force_mag : -p.force_mag;
  const double total_mass = p.cart_mass + p.pole_mass;
  const double polemass_length = p.pole_mass * p.pole_half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);

  const double temp =
      (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (p.gravity * sin_t - cos_t * temp) /
      (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

  ContState next;
  next.x = s.x + p.dt * s.x_dot;
  next.x_dot = s.x_dot + p.dt * x_acc;
  next.theta = s.theta + p.dt * s.theta_dot;
  next.theta_dot = s.theta_dot + p.dt * theta_acc;
  return {next, failed(p, next)};
}

std::uint32_t Discretization::bin_of(const CartPoleParams& params,
                                     const ContState& s) const {
  if (failed(params, s)) return terminal_bin();
  const std::array<double, 4> vals{s.x, s.x_dot, s.theta, s.theta_dot};
  std::uint32_t idx = 0;
  for (int k = 0; k < 4; ++k) {
    const double width = (hi[k] - lo[k]) / static_cast<double>(bins[k]);
    auto i = static_cast<long>(std::floor((vals[k] - lo[k]) / width));
    i = std::clamp<long>(i, 0, bins[k] - 1);
    idx = idx * static_cast<std::uint32_t>(bins[k]) + static_cast<std::uint32_t>(i);
  }
  return idx;
}

ContState Discretization::center_of(std::uint32_t bin) const {
  std::array<int, 4> c{};
  for (int k = 3; k >= 0; --k) {
    c[k] = static_cast<int>(bin % static_cast<std::uint32_t>(bins[k]));
    bin /= static_cast<std::uint32_t>(bins[k]);
  }
  std::array<double, 4> vals{};
  for (int k = 0; k < 4; ++k) {
    const double width = (hi[k] - lo[k]) / static_cast<double>(bins[k]);
    vals[k] = lo[k] + (static_cast<double>(c[k]) + 0.5) * width;
  }
  return {vals[0], vals[1], vals[2], vals[3]};
}

Discretization build_discretization(const CartPoleParams& params,
                                    const std::array<int, 4>& bins_per_dim) {
  for (int b : bins_per_dim)
    if (b < 2) throw std::invalid_argument("discretization: bins per dim must be >= 2");
  Discretization d;
  d.lo = {-params.fail_position, -3.0, -params.fail_angle, -3.5};
  d.hi = {params.fail_position, 3.0, params.fail_angle, 3.5};
  d.bins = bins_per_dim;
  return d;
}

Discretization build_discretization(const CartPoleParams& params,
                                    int bins_per_dim) {
  return build_discretization(
      params, std::array<int, 4>{bins_per_dim, bins_per_dim, bins_per_dim,
                                 bins_per_dim});
}

MdpModel build_tabular_mdp(const CartPoleParams& params,
                           const Discretization& d, double gamma,
                           int decision_steps) {
  if (decision_steps < 1)
    throw std::invalid_argument("tabular cart-pole: decision_steps must be >= 1");
  MdpModel m;
  m.num_states = d.total_bins();
  m.gamma = gamma;
  m.actions.resize(m.num_states);
  for (std::uint32_t b = 0; b < d.grid_bins(); ++b) {
    const ContState center = d.center_of(b);
    for (CartAction a : {CartAction::Left, CartAction::Right}) {
      ContState s = center;
      bool done = false;
      for (int k = 0; k < decision_steps && !done; ++k) {
        const CartStepResult r = cartpole_step(params, s, a);
        s = r.s;
        done = r.done;
      }
      const std::uint32_t dest = done ? d.terminal_bin() : d.bin_of(params, s);
      m.actions[b].push_back({-1.0, {{dest, 1.0}}});
    }
  }
  m.actions[d.terminal_bin()].push_back({0.0, {{d.terminal_bin(), 1.0}}});
  return m;
}

std::vector<double> rollout_episodes(const CartPoleParams& params,
                                     const Discretization& d, const Policy& pi,
                                     int episodes, Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("rollout: episodes must be >= 1");
  std::vector<double> rewards(episodes);
  for (int e = 0; e < episodes; ++e) {
    Rng er = rng.fork(static_cast<std::uint64_t>(e));
    ContState s;
    s.x = er.next_double() * 0.1 - 0.05;
    s.x_dot = er.next_double() * 0.1 - 0.05;
    s.theta = er.next_double() * 0.1 - 0.05;
    s.theta_dot = er.next_double() * 0.1 - 0.05;
    double reward = 0.0;
    for (int step = 0; step < params.max_steps; ++step) {
      if (failed(params, s)) break;
      const auto a = static_cast<CartAction>(pi[d.bin_of(params, s)]);
      const CartStepResult r = cartpole_step(params, s, a);
      s = r.s;
      if (r.done) break;
      reward += 1.0;
    }
    rewards[e] = reward;
  }
  return rewards;
}

double rollout_policy(const CartPoleParams& params, const Discretization& d,
                      const Policy& pi, int episodes, Rng& rng) {
  return mean_of(rollout_episodes(params, d, pi, episodes, rng));
}

std::vector<CartPoleCurvePoint> run_cartpole_benchmark(
    const CartPoleBenchConfig& config) {
  const std::array<int, 4> bins =
      config.bins_per_dim > 0
          ? std::array<int, 4>{config.bins_per_dim, config.bins_per_dim,
                               config.bins_per_dim, config.bins_per_dim}
          : config.bins;
  const Discretization d = build_discretization(config.params, bins);
  const MdpModel model =
      build_tabular_mdp(config.params, d, config.gamma, config.decision_steps);
  Rng master(config.seed);

  std::vector<CartPoleCurvePoint> curve;
  auto evaluate = [&](const char* variant, long long cum_updates,
                      const ValueFunction& v, long long checkpoint) {
    const Policy pi = greedy_policy(model, v);
    Rng eval_rng = master.fork(derive_stream(1000, checkpoint));
    const std::vector<double> rewards =
        rollout_episodes(config.params, d, pi, config.episodes, eval_rng);
    curve.push_back({variant, cum_updates, mean_of(rewards), ci95_of(rewards)});
  };

  // plain value iteration
  {
    ValueFunction v(model.num_states, 0.0);
    long long cum = 0;
    for (long long t = 1; t <= config.vi_iters; ++t) {
      v = bellman_sweep(model, v);
      cum += model.num_states;
      if (t % config.eval_every == 0) evaluate("vi", cum, v, t / config.eval_every);
    }
  }

  // aggregated solver: exact sweeps until the values carry enough
  // separation to bucket, then per-iteration re-bucketing with one
  // sampled backup per bucket mixed into every member's own value (the
  // own-value term keeps the vector state-resolved so later bucketings
  // can still split groups)
  {
    ValueFunction v(model.num_states, 0.0);
    Rng agg_rng = master.fork(2);
    long long cum = 0;
    const StepSizeSchedule steps = StepSizeSchedule::inv_sqrt();
    for (long long t = 1; t <= config.agg_iters; ++t) {
      if (t <= config.resolve_iters) {
        v = bellman_sweep(model, v);
        cum += model.num_states;
      } else {
        const Aggregation agg = value_based_aggregation(config.epsilon, v);
        const double alpha = steps.at(t);
        const std::uint64_t sweep_key = agg_rng.next_u64();
        ValueFunction next(v.size());
        for (std::uint32_t j = 0; j < agg.partition.num_blocks(); ++j) {
          const auto& members = agg.partition.states_of_block[j];
          Rng block_rng(derive_stream(sweep_key, j));
          const std::uint32_t s = members[block_rng.next_below(members.size())];
          const double backup = bellman_backup(model, v, s).value;
          for (std::uint32_t member : members)
            next[member] = (1.0 - alpha) * v[member] + alpha * backup;
        }
        v = std::move(next);
        cum += agg.partition.num_blocks();
      }
      if (t % config.eval_every == 0)
        evaluate("agg", cum, v, t / config.eval_every);
    }
  }
  return curve;
}

void write_cartpole_csv(const std::vector<CartPoleCurvePoint>& curve,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "variant,cum_updates,mean_reward,ci95\n";
  char buf[96];
  for (const CartPoleCurvePoint& p : curve) {
    std::snprintf(buf, sizeof buf, "%s,%lld,%.10g,%.10g", p.variant.c_str(),
                  p.cum_updates, p.mean_reward, p.ci95);
    out << buf << '\n';
  }
}

}  // namespace aggvi
