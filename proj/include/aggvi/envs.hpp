#pragma once

#include <cstdint>
#include <vector>

#include "aggvi/mdp.hpp"
#include "aggvi/rng.hpp"

namespace aggvi {

/// n-dimensional grid indexing (row-major) shared by the maze builders.
struct GridGeometry {
  std::vector<int> dims;
  std::vector<std::uint32_t> strides;
  std::uint32_t num_cells = 0;

  explicit GridGeometry(const std::vector<int>& dims);
  std::vector<int> coords_of(std::uint32_t cell) const;
  /// Grid-adjacent cells (one step along one axis), in axis order with
  /// the negative direction first.
  std::vector<std::uint32_t> neighbors(std::uint32_t cell) const;
};

struct MazeSpec {
  std::vector<int> dims{10, 10};  // every entry >= 2
  double p = 1.0;                 // intended-move probability in (0, 1]
  std::uint64_t seed = 0;
  double target_vmax = 100.0;
  double gamma = 0.95;  // discount of the produced model; normalization
                        // and the stored ground truth depend on it
};

struct TerrainSpec {
  std::vector<int> dims{10, 10};
  double p = 1.0;
  std::uint64_t seed = 0;
  double target_vmax = 100.0;
  double gamma = 0.95;
  double sigma = 0.0;  // cost-noise standard deviation, >= 0
  int bumps = 10;      // Gaussian bumps in the height field
};

/// Per-cell heights, min-max normalized to [0, 1] (all zero if constant).
struct HeightField {
  std::vector<int> dims;
  std::vector<double> values;

  double at(std::uint32_t cell) const { return values[cell]; }
};

struct GaussBump {
  std::vector<double> center;  // one coordinate per axis
  double width;
};

HeightField height_field_from_bumps(const std::vector<int>& dims,
                                    const std::vector<GaussBump>& bumps);

/// `bumps` isotropic Gaussian bumps with centers uniform on the grid and
/// widths uniform in [0.1, 0.3] * max(dims), summed and normalized.
HeightField gen_height_field(const std::vector<int>& dims, int bumps, Rng& rng);

/// Slip rule: probability p on the intended destination and
/// (1 - p) / (m - 1) on each of the other available destinations; a
/// single available move is deterministic regardless of p.
std::vector<Transition> apply_stochasticity(
    std::uint32_t intended, const std::vector<std::uint32_t>& available,
    double p);

struct EnvMetadata {
  std::vector<int> dims;
  std::uint64_t seed = 0;
  double p = 1.0;
  double sigma = 0.0;
  double cost_scale = 1.0;  // normalization factor applied to all costs
  double vmax = 0.0;        // sup-norm of the (noiseless) ground truth
  ValueFunction v_star;     // ground truth of the noiseless normalized model
};

struct GeneratedEnv {
  MdpModel model;
  EnvMetadata meta;
};

/// Corridor maze on the grid: a depth-first spanning tree carved with the
/// spec'd seed, moves along tree edges at cost 1 (0 when entering the
/// absorbing terminal cell at the origin), slip dynamics, and costs
/// rescaled so the optimal cost-to-go peaks at exactly target_vmax.
GeneratedEnv gen_standard_maze(const MazeSpec& spec);

/// Full-grid movement with height-difference costs: cost of s -> s' is
/// 1 + lambda * (H(s') - H(s)) with lambda chosen so every cost is at
/// least 0.1. Terminal handling, slip and normalization as in the
/// standard maze; when sigma > 0, one clamped normal perturbation is then
/// added to every action cost (metadata keeps the noiseless truth).
GeneratedEnv gen_terrain_maze(const TerrainSpec& spec);

/// Pre-normalization terrain model for a given height field.
MdpModel terrain_model_from_height(const HeightField& h, double p, double gamma);

/// Mean-0 normal noise of scale sigma added to every action cost, clamped
/// at 0 from below.
MdpModel add_cost_noise(const MdpModel& model, double sigma, Rng& rng);

/// Tightly converged optimal values: value iteration from 0 with tol set
/// so the remaining fixed-point gap is at most 1e-8. Throws on
/// non-convergence.
ValueFunction ground_truth(const MdpModel& model);

struct NormalizedModel {
  MdpModel model;
  ValueFunction v_star;  // ground truth of the scaled model
  double scale = 1.0;
};

/// Scales costs by target / ||V*||_inf so the optimal values peak at
/// target; rejects models whose V* is all zero.
NormalizedModel normalize_to_max_v(const MdpModel& model, double target);

}  // namespace aggvi
