#include "aggvi/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace aggvi {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw std::invalid_argument(where + ": missing field '" + key + "'");
  return *it;
}

}  // namespace

MdpModel model_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("model JSON: ") + e.what());
  }

  MdpModel m;
  m.num_states = require(root, "num_states", "$").get<std::uint32_t>();
  m.gamma = require(root, "gamma", "$").get<double>();
  const json& states = require(root, "states", "$");
  if (!states.is_array())
    throw std::invalid_argument("states: expected an array");
  m.actions.resize(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const std::string sp = "states[" + std::to_string(s) + "]";
    const json& acts = require(states[s], "actions", sp);
    m.actions[s].resize(acts.size());
    for (std::size_t a = 0; a < acts.size(); ++a) {
      const std::string ap = sp + ".actions[" + std::to_string(a) + "]";
      ActionEntry& act = m.actions[s][a];
      act.cost = require(acts[a], "cost", ap).get<double>();
      const json& trs = require(acts[a], "transitions", ap);
      act.transitions.resize(trs.size());
      for (std::size_t k = 0; k < trs.size(); ++k) {
        const std::string tp = ap + ".transitions[" + std::to_string(k) + "]";
        if (!trs[k].is_array() || trs[k].size() != 2)
          throw std::invalid_argument(tp + ": expected [dest, prob]");
        act.transitions[k].dest = trs[k][0].get<std::uint32_t>();
        act.transitions[k].prob = trs[k][1].get<double>();
      }
    }
  }
  if (root.contains("initial_dist"))
    m.initial_dist = root["initial_dist"].get<std::vector<double>>();

  m.validate();
  return m;
}

MdpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return model_from_json(text);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string model_to_json(const MdpModel& model, int indent) {
  json states = json::array();
  for (const auto& state_actions : model.actions) {
    json acts = json::array();
    for (const ActionEntry& act : state_actions) {
      json trs = json::array();
      for (const Transition& tr : act.transitions)
        trs.push_back(json::array({tr.dest, tr.prob}));
      acts.push_back({{"cost", act.cost}, {"transitions", std::move(trs)}});
    }
    states.push_back({{"actions", std::move(acts)}});
  }
  json root = {{"num_states", model.num_states},
               {"gamma", model.gamma},
               {"states", std::move(states)}};
  if (!model.initial_dist.empty()) root["initial_dist"] = model.initial_dist;
  return root.dump(indent);
}

void save_model(const MdpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(model) << '\n';
}

}  // namespace aggvi
