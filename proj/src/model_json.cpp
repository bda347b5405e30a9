#include "carddl/model_json.hpp"

#include <json.hpp>

namespace carddl {

using nlohmann::json;

std::string model_to_json(const Interpretation& I) {
  json j;
  j["domain"] = I.labels;
  json concepts = json::object();
  for (auto& [name, ext] : I.concepts) {
    json arr = json::array();
    for (int d : ext) arr.push_back(I.labels.at(d));
    concepts[name] = arr;
  }
  j["concepts"] = concepts;
  json roles = json::object();
  for (auto& [name, rel] : I.roles) {
    json arr = json::array();
    for (auto& [a, b] : rel) arr.push_back(json::array({I.labels.at(a), I.labels.at(b)}));
    roles[name] = arr;
  }
  j["roles"] = roles;
  json inds = json::object();
  for (auto& [name, d] : I.individuals) inds[name] = I.labels.at(d);
  j["individuals"] = inds;
  return j.dump(2) + "\n";
}

Interpretation model_from_json(const std::string& text) {
  json j = json::parse(text);
  Interpretation I;
  std::map<std::string, int> byLabel;
  for (auto& l : j.at("domain")) {
    std::string label = l.get<std::string>();
    if (byLabel.count(label)) throw std::invalid_argument("duplicate domain label: " + label);
    byLabel[label] = I.size();
    I.labels.push_back(label);
  }
  auto idOf = [&](const std::string& label) {
    auto it = byLabel.find(label);
    if (it == byLabel.end()) throw std::invalid_argument("unknown element label: " + label);
    return it->second;
  };
  if (j.contains("concepts"))
    for (auto& [name, arr] : j.at("concepts").items())
      for (auto& l : arr) I.concepts[name].insert(idOf(l.get<std::string>()));
  if (j.contains("roles"))
    for (auto& [name, arr] : j.at("roles").items())
      for (auto& pair : arr)
        I.roles[name].insert({idOf(pair.at(0).get<std::string>()),
                              idOf(pair.at(1).get<std::string>())});
  if (j.contains("individuals"))
    for (auto& [name, l] : j.at("individuals").items())
      I.individuals[name] = idOf(l.get<std::string>());
  validate_interpretation(I);
  return I;
}

}  // namespace carddl
