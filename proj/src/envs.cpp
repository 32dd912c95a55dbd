#include "aggvi/envs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aggvi {

namespace {

constexpr std::uint32_t kTerminalCell = 0;  // position (1, ..., 1)
constexpr std::uint64_t kMaxCells = 20'000'000;

void check_dims(const std::vector<int>& dims) {
  if (dims.empty()) throw std::invalid_argument("grid: empty dims");
  std::uint64_t cells = 1;
  for (int d : dims) {
    if (d < 2) throw std::invalid_argument("grid: every dimension must be >= 2");
    cells *= static_cast<std::uint64_t>(d);
    if (cells > kMaxCells) throw std::invalid_argument("grid: too many cells");
  }
}

// Depth-first carve of a spanning tree over the grid graph; iterative so
// deep corridors on large grids do not blow the call stack. Returns the
// sorted adjacency lists of the corridor graph.
std::vector<std::vector<std::uint32_t>> carve_tree(const GridGeometry& g,
                                                   Rng& rng) {
  std::vector<std::vector<std::uint32_t>> adj(g.num_cells);
  std::vector<char> visited(g.num_cells, 0);
  std::vector<std::uint32_t> stack;
  stack.reserve(g.num_cells);
  stack.push_back(kTerminalCell);
  visited[kTerminalCell] = 1;
  std::vector<std::uint32_t> fresh;
  while (!stack.empty()) {
    const std::uint32_t cur = stack.back();
    fresh.clear();
    for (std::uint32_t nb : g.neighbors(cur))
      if (!visited[nb]) fresh.push_back(nb);
    if (fresh.empty()) {
      stack.pop_back();
      continue;
    }
    const std::uint32_t next = fresh[rng.next_below(fresh.size())];
    adj[cur].push_back(next);
    adj[next].push_back(cur);
    visited[next] = 1;
    stack.push_back(next);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

// Shared tail of both maze builders: terminal self-loop, slip rows, and
// per-move costs supplied by the callback.
template <typename CostFn>
MdpModel assemble_maze(const GridGeometry& g,
                       const std::vector<std::vector<std::uint32_t>>& adj,
                       double p, double gamma, CostFn&& move_cost) {
  MdpModel m;
  m.num_states = g.num_cells;
  m.gamma = gamma;
  m.actions.resize(g.num_cells);
  for (std::uint32_t s = 0; s < g.num_cells; ++s) {
    if (s == kTerminalCell) {
      m.actions[s].push_back({0.0, {{s, 1.0}}});
      continue;
    }
    m.actions[s].reserve(adj[s].size());
    for (std::uint32_t dest : adj[s]) {
      ActionEntry act;
      act.cost = dest == kTerminalCell ? 0.0 : move_cost(s, dest);
      act.transitions = apply_stochasticity(dest, adj[s], p);
      m.actions[s].push_back(std::move(act));
    }
  }
  return m;
}

}  // namespace

GridGeometry::GridGeometry(const std::vector<int>& d) : dims(d) {
  check_dims(dims);
  strides.resize(dims.size());
  std::uint64_t acc = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    strides[k] = static_cast<std::uint32_t>(acc);
    acc *= static_cast<std::uint64_t>(dims[k]);
  }
  num_cells = static_cast<std::uint32_t>(acc);
}

std::vector<int> GridGeometry::coords_of(std::uint32_t cell) const {
  std::vector<int> c(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    c[k] = static_cast<int>(cell / strides[k]);
    cell %= strides[k];
  }
  return c;
}

std::vector<std::uint32_t> GridGeometry::neighbors(std::uint32_t cell) const {
  std::vector<std::uint32_t> out;
  out.reserve(2 * dims.size());
  std::uint32_t rest = cell;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const int coord = static_cast<int>(rest / strides[k]);
    rest %= strides[k];
    if (coord > 0) out.push_back(cell - strides[k]);
    if (coord + 1 < dims[k]) out.push_back(cell + strides[k]);
  }
  return out;
}

HeightField height_field_from_bumps(const std::vector<int>& dims,
                                    const std::vector<GaussBump>& bumps) {
  check_dims(dims);
  GridGeometry g(dims);
  HeightField h;
  h.dims = dims;
  h.values.assign(g.num_cells, 0.0);
  for (std::uint32_t cell = 0; cell < g.num_cells; ++cell) {
    const std::vector<int> c = g.coords_of(cell);
    double v = 0.0;
    for (const GaussBump& b : bumps) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        const double dk = static_cast<double>(c[k]) - b.center[k];
        d2 += dk * dk;
      }
      v += std::exp(-d2 / (2.0 * b.width * b.width));
    }
    h.values[cell] = v;
  }
  const auto [lo_it, hi_it] = std::minmax_element(h.values.begin(), h.values.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  for (double& v : h.values) v = range > 0.0 ? (v - lo) / range : 0.0;
  return h;
}

HeightField gen_height_field(const std::vector<int>& dims, int bumps, Rng& rng) {
  if (bumps < 1) throw std::invalid_argument("height field: bumps must be >= 1");
  const int max_dim = *std::max_element(dims.begin(), dims.end());
  std::vector<GaussBump> bs(bumps);
  for (GaussBump& b : bs) {
    b.center.resize(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k)
      b.center[k] = rng.next_double() * static_cast<double>(dims[k] - 1);
    b.width = (0.1 + 0.2 * rng.next_double()) * static_cast<double>(max_dim);
  }
  return height_field_from_bumps(dims, bs);
}

std::vector<Transition> apply_stochasticity(
    std::uint32_t intended, const std::vector<std::uint32_t>& available,
    double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("slip: p must lie in (0, 1]");
  const std::size_t m = available.size();
  if (m <= 1 || p == 1.0) return {{intended, 1.0}};
  std::vector<Transition> row;
  row.reserve(m);
  const double other = (1.0 - p) / static_cast<double>(m - 1);
  for (std::uint32_t dest : available)
    row.push_back({dest, dest == intended ? p : other});
  return row;
}

GeneratedEnv gen_standard_maze(const MazeSpec& spec) {
  GridGeometry g(spec.dims);
  Rng rng(spec.seed);
  Rng carve_rng = rng.fork(1);
  const auto adj = carve_tree(g, carve_rng);
  MdpModel raw = assemble_maze(g, adj, spec.p, spec.gamma,
                               [](std::uint32_t, std::uint32_t) { return 1.0; });
  NormalizedModel norm = normalize_to_max_v(raw, spec.target_vmax);

  GeneratedEnv env;
  env.model = std::move(norm.model);
  env.meta = {spec.dims, spec.seed,  spec.p,
              0.0,       norm.scale, spec.target_vmax,
              std::move(norm.v_star)};
  return env;
}

MdpModel terrain_model_from_height(const HeightField& h, double p, double gamma) {
  GridGeometry g(h.dims);

  // steepest local height difference fixes the cost slope so that
  // 1 + lambda * dH stays at or above 0.1
  double max_dh = 0.0;
  for (std::uint32_t s = 0; s < g.num_cells; ++s)
    for (std::uint32_t d : g.neighbors(s))
      max_dh = std::max(max_dh, std::abs(h.at(d) - h.at(s)));
  const double lambda = max_dh > 0.0 ? 0.9 / max_dh : 0.0;

  std::vector<std::vector<std::uint32_t>> adj(g.num_cells);
  for (std::uint32_t s = 0; s < g.num_cells; ++s) adj[s] = g.neighbors(s);

  return assemble_maze(g, adj, p, gamma, [&](std::uint32_t s, std::uint32_t d) {
    return 1.0 + lambda * (h.at(d) - h.at(s));
  });
}

GeneratedEnv gen_terrain_maze(const TerrainSpec& spec) {
  if (spec.sigma < 0.0) throw std::invalid_argument("terrain: sigma must be >= 0");
  Rng rng(spec.seed);
  Rng height_rng = rng.fork(1);
  Rng noise_rng = rng.fork(2);
  const HeightField h = gen_height_field(spec.dims, spec.bumps, height_rng);
  MdpModel raw = terrain_model_from_height(h, spec.p, spec.gamma);
  NormalizedModel norm = normalize_to_max_v(raw, spec.target_vmax);

  GeneratedEnv env;
  env.model = spec.sigma > 0.0
                  ? add_cost_noise(norm.model, spec.sigma, noise_rng)
                  : std::move(norm.model);
  env.meta = {spec.dims,  spec.seed,       spec.p,
              spec.sigma, norm.scale,      spec.target_vmax,
              std::move(norm.v_star)};
  return env;
}

MdpModel add_cost_noise(const MdpModel& model, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("cost noise: sigma must be >= 0");
  MdpModel out = model;
  if (sigma == 0.0) return out;
  for (auto& state_actions : out.actions)
    for (ActionEntry& act : state_actions)
      act.cost = std::max(0.0, act.cost + sigma * rng.next_normal());
  return out;
}

ValueFunction ground_truth(const MdpModel& model) {
  const double tol = model.gamma > 0.0 ? 1e-8 * (1.0 - model.gamma) / model.gamma
                                       : 1e-8;
  ViResult res = value_iteration(model, ValueFunction(model.num_states, 0.0),
                                 100000, tol);
  if (!res.converged)
    throw std::runtime_error("ground_truth: value iteration did not converge");
  return std::move(res.v);
}

NormalizedModel normalize_to_max_v(const MdpModel& model, double target) {
  ValueFunction v = ground_truth(model);
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  if (!(vmax > 0.0))
    throw std::invalid_argument("normalize_to_max_v: optimal values are all zero");
  const double scale = target / vmax;
  NormalizedModel out;
  out.model = scale_costs(model, scale);
  out.scale = scale;
  out.v_star.resize(v.size());
  for (std::size_t s = 0; s < v.size(); ++s) out.v_star[s] = v[s] * scale;
  return out;
}

}  // namespace aggvi
