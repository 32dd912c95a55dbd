#pragma once

#include <string>

#include "aggvi/mdp.hpp"

namespace aggvi {

// MDP interchange format (JSON):
//   { "num_states": N, "gamma": g,
//     "states": [ { "actions": [ { "cost": c,
//                                  "transitions": [[dest, prob], ...] },
//                                ... ] }, ... ] }
// plus an optional top-level "initial_dist" array. Loading validates all
// model invariants and throws std::invalid_argument (semantic problems,
// with a field path) or std::runtime_error (syntax problems, with the
// parser's byte position).

MdpModel model_from_json(const std::string& text);
MdpModel load_model(const std::string& path);

std::string model_to_json(const MdpModel& model, int indent = -1);
void save_model(const MdpModel& model, const std::string& path);

}  // namespace aggvi
