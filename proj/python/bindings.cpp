#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aggvi/aggregation.hpp"
#include "aggvi/bench.hpp"
#include "aggvi/cartpole.hpp"
#include "aggvi/envs.hpp"
#include "aggvi/mdp.hpp"
#include "aggvi/model_io.hpp"

namespace py = pybind11;
using namespace aggvi;

namespace {

PhaseSchedule make_phases(int agg_len, int global_len) {
  return PhaseSchedule::constant(agg_len, global_len);
}

std::vector<std::tuple<long long, char, long long, std::uint32_t, double>>
trace_rows(const SolveTrace& trace) {
  std::vector<std::tuple<long long, char, long long, std::uint32_t, double>> out;
  out.reserve(trace.rows.size());
  for (const TraceRow& r : trace.rows)
    out.emplace_back(r.iter, r.phase, r.cum_updates, r.k, r.linf_error);
  return out;
}

}  // namespace

PYBIND11_MODULE(aggvi_py, m) {
  m.doc() = "Tabular MDP solving with adaptive state aggregation";

  py::class_<MdpModel>(m, "MdpModel")
      .def(py::init<>())
      .def_readonly("num_states", &MdpModel::num_states)
      .def_readonly("gamma", &MdpModel::gamma)
      .def("validate", &MdpModel::validate)
      .def("num_actions", &MdpModel::num_actions)
      .def("to_json", [](const MdpModel& model) { return model_to_json(model, -1); })
      .def_static("from_json", &model_from_json)
      .def_static("load", &load_model)
      .def("save", &save_model);

  m.def("bellman_backup",
        [](const MdpModel& model, const ValueFunction& v, std::uint32_t s) {
          const BackupResult r = bellman_backup(model, v, s);
          return py::make_tuple(r.value, r.best_action);
        });
  m.def("bellman_sweep", &bellman_sweep);
  m.def("value_iteration",
        [](const MdpModel& model, ValueFunction v0, long max_iters, double tol) {
          const ViResult r = value_iteration(model, std::move(v0), max_iters, tol);
          return py::make_tuple(r.v, r.iters, r.updates, r.converged);
        },
        py::arg("model"), py::arg("v0"), py::arg("max_iters") = 100000,
        py::arg("tol") = 1e-9);
  m.def("greedy_policy", &greedy_policy);
  m.def("policy_evaluation",
        [](const MdpModel& model, const Policy& pi, double tol) {
          return policy_evaluation(model, pi, tol).v;
        },
        py::arg("model"), py::arg("pi"), py::arg("tol") = 1e-10);
  m.def("linf_distance", &linf_distance);
  m.def("scale_costs", &scale_costs);
  m.def("ground_truth", &ground_truth);

  py::class_<Partition>(m, "Partition")
      .def_readonly("block_of_state", &Partition::block_of_state)
      .def_readonly("states_of_block", &Partition::states_of_block)
      .def("num_blocks", &Partition::num_blocks)
      .def_static("identity", &Partition::identity)
      .def_static("single_block", &Partition::single_block)
      .def_static("from_blocks", &Partition::from_blocks);

  m.def("value_based_aggregation",
        [](double eps, const ValueFunction& v) {
          Aggregation a = value_based_aggregation(eps, v);
          return py::make_tuple(std::move(a.partition), std::move(a.w));
        });
  m.def("lift", &lift);
  m.def("aggregation_error_vector", &aggregation_error_vector);
  m.def("aggregate_fixed_point",
        [](const MdpModel& model, const Partition& p, double tol) {
          const AggFixedPoint fp = aggregate_fixed_point(model, p, tol);
          return py::make_tuple(fp.w, fp.converged);
        },
        py::arg("model"), py::arg("partition"), py::arg("tol") = 1e-10);
  m.def("rvia",
        [](const MdpModel& model, const Partition& p, const std::string& alpha,
           long long n, std::uint64_t seed) {
          Rng rng(seed);
          RviaResult r = rvia(model, p, parse_alpha(alpha), n, rng);
          return py::make_tuple(std::move(r.w), trace_rows(r.trace));
        },
        py::arg("model"), py::arg("partition"), py::arg("alpha"), py::arg("n"),
        py::arg("seed") = 0);
  m.def("avia",
        [](const MdpModel& model, double eps, int agg_len, int global_len,
           const std::string& alpha, long long n, std::uint64_t seed,
           const std::optional<ValueFunction>& ground_truth_v) {
          Rng rng(seed);
          AviaResult r = avia(model, eps, make_phases(agg_len, global_len),
                              parse_alpha(alpha), n, rng,
                              ground_truth_v ? &*ground_truth_v : nullptr);
          return py::make_tuple(std::move(r.v), trace_rows(r.trace));
        },
        py::arg("model"), py::arg("eps") = 0.5, py::arg("agg_len") = 5,
        py::arg("global_len") = 2, py::arg("alpha") = "invsqrt",
        py::arg("n") = 1000, py::arg("seed") = 0,
        py::arg("ground_truth") = std::nullopt);

  py::class_<EnvMetadata>(m, "EnvMetadata")
      .def_readonly("dims", &EnvMetadata::dims)
      .def_readonly("seed", &EnvMetadata::seed)
      .def_readonly("p", &EnvMetadata::p)
      .def_readonly("sigma", &EnvMetadata::sigma)
      .def_readonly("cost_scale", &EnvMetadata::cost_scale)
      .def_readonly("vmax", &EnvMetadata::vmax)
      .def_readonly("v_star", &EnvMetadata::v_star);
  py::class_<GeneratedEnv>(m, "GeneratedEnv")
      .def_readonly("model", &GeneratedEnv::model)
      .def_readonly("meta", &GeneratedEnv::meta);

  m.def("gen_standard_maze",
        [](const std::vector<int>& dims, double p, std::uint64_t seed,
           double target_vmax, double gamma) {
          return gen_standard_maze({dims, p, seed, target_vmax, gamma});
        },
        py::arg("dims"), py::arg("p") = 1.0, py::arg("seed") = 0,
        py::arg("target_vmax") = 100.0, py::arg("gamma") = 0.95);
  m.def("gen_terrain_maze",
        [](const std::vector<int>& dims, double p, std::uint64_t seed,
           double target_vmax, double gamma, double sigma, int bumps) {
          return gen_terrain_maze({dims, p, seed, target_vmax, gamma, sigma, bumps});
        },
        py::arg("dims"), py::arg("p") = 1.0, py::arg("seed") = 0,
        py::arg("target_vmax") = 100.0, py::arg("gamma") = 0.95,
        py::arg("sigma") = 0.0, py::arg("bumps") = 10);

  py::class_<CartPoleParams>(m, "CartPoleParams")
      .def(py::init<>())
      .def_readwrite("gravity", &CartPoleParams::gravity)
      .def_readwrite("force_mag", &CartPoleParams::force_mag)
      .def_readwrite("dt", &CartPoleParams::dt)
      .def_readwrite("fail_angle", &CartPoleParams::fail_angle)
      .def_readwrite("fail_position", &CartPoleParams::fail_position)
      .def_readwrite("max_steps", &CartPoleParams::max_steps);
  py::class_<Discretization>(m, "Discretization")
      .def("total_bins", &Discretization::total_bins)
      .def("terminal_bin", &Discretization::terminal_bin)
      .def("bin_of",
           [](const Discretization& d, const CartPoleParams& params, double x,
              double x_dot, double theta, double theta_dot) {
             return d.bin_of(params, {x, x_dot, theta, theta_dot});
           });
  m.def("cartpole_step",
        [](const CartPoleParams& params, double x, double x_dot, double theta,
           double theta_dot, int action) {
          const CartStepResult r = cartpole_step(
              params, {x, x_dot, theta, theta_dot}, static_cast<CartAction>(action));
          return py::make_tuple(r.s.x, r.s.x_dot, r.s.theta, r.s.theta_dot, r.done);
        });
  m.def("build_discretization",
        [](const CartPoleParams& params, int bins_per_dim) {
          return build_discretization(params, bins_per_dim);
        });
  m.def("build_tabular_mdp", &build_tabular_mdp);
  m.def("rollout_policy",
        [](const CartPoleParams& params, const Discretization& d, const Policy& pi,
           int episodes, std::uint64_t seed) {
          Rng rng(seed);
          return rollout_policy(params, d, pi, episodes, rng);
        },
        py::arg("params"), py::arg("discretization"), py::arg("policy"),
        py::arg("episodes") = 100, py::arg("seed") = 0);
}
