#include "chronos/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>

namespace chronos {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& reason) {
  throw Error(Errc::validation_error, field + ": " + reason);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) invalid(where.empty() ? key : where + "." + key, "unknown key '" + key + "'");
  }
}

const json& require_object(const json& parent, const std::string& key, const std::string& field) {
  if (!parent.contains(key)) invalid(field, "missing");
  const json& v = parent.at(key);
  if (!v.is_object()) invalid(field, "must be an object");
  return v;
}

double get_real(const json& parent, const std::string& key, const std::string& field) {
  if (!parent.contains(key)) invalid(field, "missing");
  const json& v = parent.at(key);
  if (!v.is_number()) invalid(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(field, "must be finite");
  return x;
}

Index get_index(const json& parent, const std::string& key, const std::string& field) {
  if (!parent.contains(key)) invalid(field, "missing");
  const json& v = parent.at(key);
  if (!v.is_number_integer()) invalid(field, "must be an integer");
  const auto x = v.get<long long>();
  if (x < 0) invalid(field, "must be non-negative");
  return static_cast<Index>(x);
}

AxisGrid parse_grid(const json& obj, const std::string& field, AxisLabel label) {
  reject_unknown(obj, field, {"n", "origin", "spacing"});
  const Index n = get_index(obj, "n", field + ".n");
  const double origin = get_real(obj, "origin", field + ".origin");
  const double spacing = get_real(obj, "spacing", field + ".spacing");
  if (n < 2) invalid(field + ".n", "needs at least 2 samples");
  if (spacing <= 0.0) invalid(field + ".spacing", "must be positive");
  return {n, origin, spacing, label};
}

json grid_json(const AxisGrid& g) { return {{"n", g.n}, {"origin", g.origin}, {"spacing", g.spacing}}; }

Step parse_step(const json& v, const std::string& field) {
  if (!v.is_object() || v.size() != 1) invalid(field, "must be an object with exactly one of 'evolve' or 'jump'");
  if (v.contains("evolve")) return EvolveStep{get_real(v, "evolve", field + ".evolve")};
  if (!v.contains("jump")) invalid(field, "unknown step kind '" + v.begin().key() + "'");
  const json& jp = v.at("jump");
  if (!jp.is_object()) invalid(field + ".jump", "must be an object");
  reject_unknown(jp, field + ".jump", {"from", "to", "at"});
  JumpStep step;
  step.from = get_index(jp, "from", field + ".jump.from");
  step.to = get_index(jp, "to", field + ".jump.to");
  step.at = get_real(jp, "at", field + ".jump.at");
  if (step.from == step.to) invalid(field + ".jump", "from and to levels must differ");
  return step;
}

InitialCondition parse_initial(const json& v) {
  if (!v.is_object() || v.size() != 1)
    invalid("initial", "must be an object with exactly one of 'level', 'energy', 'amplitudes'");
  if (v.contains("level")) return InitialLevel{get_index(v, "level", "initial.level")};
  if (v.contains("energy")) return InitialEnergy{get_real(v, "energy", "initial.energy")};
  if (!v.contains("amplitudes")) invalid("initial." + v.begin().key(), "unknown key '" + v.begin().key() + "'");
  const json& arr = v.at("amplitudes");
  if (!arr.is_array()) invalid("initial.amplitudes", "must be an array of [re, im] pairs");
  InitialAmplitudes amps;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& pair = arr[i];
    const std::string field = "initial.amplitudes[" + std::to_string(i) + "]";
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      invalid(field, "must be a [re, im] pair of numbers");
    const double re = pair[0].get<double>(), im = pair[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) invalid(field, "must be finite");
    amps.amplitudes.emplace_back(re, im);
  }
  return amps;
}

}  // namespace

std::string_view to_string(GridPreset preset) {
  switch (preset) {
    case GridPreset::energy_aligned: return "energy-aligned";
    case GridPreset::time_aligned: return "time-aligned";
    case GridPreset::explicit_grids: return "explicit";
  }
  return "unknown";
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::oscillator ? "oscillator" : "free_particle";
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::syntax_error, e.what());
  }
  if (!doc.is_object()) invalid("<root>", "scenario must be a JSON object");
  reject_unknown(doc, "", {"constants", "preset", "model", "initial", "steps", "tolerances"});

  Scenario sc;
  const json& constants = require_object(doc, "constants", "constants");
  reject_unknown(constants, "constants", {"hbar", "mass", "c", "omega"});
  sc.constants.hbar = get_real(constants, "hbar", "constants.hbar");
  sc.constants.mass = get_real(constants, "mass", "constants.mass");
  sc.constants.c = get_real(constants, "c", "constants.c");
  sc.constants.omega = get_real(constants, "omega", "constants.omega");
  for (auto [name, value] : {std::pair{"hbar", sc.constants.hbar}, std::pair{"mass", sc.constants.mass},
                             std::pair{"c", sc.constants.c}, std::pair{"omega", sc.constants.omega}})
    if (value <= 0.0) invalid(std::string("constants.") + name, "must be positive");

  if (!doc.contains("model")) invalid("model", "missing");
  const json& model = doc.at("model");
  if (model == "oscillator")
    sc.model = ModelKind::oscillator;
  else if (model == "free_particle")
    sc.model = ModelKind::free_particle;
  else
    invalid("model", "must be \"oscillator\" or \"free_particle\"");

  if (!doc.contains("preset")) invalid("preset", "missing");
  const json& preset = doc.at("preset");
  if (preset == "energy-aligned") {
    apply_preset(sc, GridPreset::energy_aligned);
  } else if (preset == "time-aligned") {
    apply_preset(sc, GridPreset::time_aligned);
  } else if (preset.is_object()) {
    reject_unknown(preset, "preset", {"q", "t"});
    sc.preset = GridPreset::explicit_grids;
    sc.q_grid = parse_grid(require_object(preset, "q", "preset.q"), "preset.q", AxisLabel::position);
    sc.t_grid = parse_grid(require_object(preset, "t", "preset.t"), "preset.t", AxisLabel::time);
  } else {
    invalid("preset", "must be \"energy-aligned\", \"time-aligned\" or an object {q, t}");
  }

  if (!doc.contains("initial")) invalid("initial", "missing");
  sc.initial = parse_initial(doc.at("initial"));

  if (doc.contains("steps")) {
    const json& steps = doc.at("steps");
    if (!steps.is_array()) invalid("steps", "must be an array");
    for (std::size_t i = 0; i < steps.size(); ++i)
      sc.steps.push_back(parse_step(steps[i], "steps[" + std::to_string(i) + "]"));
  }

  if (doc.contains("tolerances")) {
    const json& tol = doc.at("tolerances");
    if (!tol.is_object()) invalid("tolerances", "must be an object");
    reject_unknown(tol, "tolerances", {"constraint_tol", "eigen_tol"});
    if (tol.contains("constraint_tol"))
      sc.tolerances.constraint_tol = get_real(tol, "constraint_tol", "tolerances.constraint_tol");
    if (tol.contains("eigen_tol")) sc.tolerances.eigen_tol = get_real(tol, "eigen_tol", "tolerances.eigen_tol");
  }

  validate_scenario(sc);
  return sc;
}

std::string serialize_scenario(const Scenario& sc) {
  json doc;
  doc["constants"] = {{"hbar", sc.constants.hbar},
                      {"mass", sc.constants.mass},
                      {"c", sc.constants.c},
                      {"omega", sc.constants.omega}};
  if (sc.preset == GridPreset::explicit_grids)
    doc["preset"] = {{"q", grid_json(sc.q_grid)}, {"t", grid_json(sc.t_grid)}};
  else
    doc["preset"] = std::string(to_string(sc.preset));
  doc["model"] = std::string(to_string(sc.model));

  if (const auto* lvl = std::get_if<InitialLevel>(&sc.initial)) {
    doc["initial"] = {{"level", lvl->level}};
  } else if (const auto* en = std::get_if<InitialEnergy>(&sc.initial)) {
    doc["initial"] = {{"energy", en->energy}};
  } else {
    json arr = json::array();
    for (const auto& a : std::get<InitialAmplitudes>(sc.initial).amplitudes) arr.push_back({a.real(), a.imag()});
    doc["initial"] = {{"amplitudes", std::move(arr)}};
  }

  json steps = json::array();
  for (const auto& step : sc.steps) {
    if (const auto* ev = std::get_if<EvolveStep>(&step)) {
      steps.push_back({{"evolve", ev->duration}});
    } else {
      const auto& jp = std::get<JumpStep>(step);
      steps.push_back({{"jump", {{"from", jp.from}, {"to", jp.to}, {"at", jp.at}}}});
    }
  }
  doc["steps"] = std::move(steps);
  doc["tolerances"] = {{"constraint_tol", sc.tolerances.constraint_tol}, {"eigen_tol", sc.tolerances.eigen_tol}};
  return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace chronos
