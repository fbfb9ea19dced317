#include "gssm_lab/scenario_io.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gssm_lab {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out,
               const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

const json& object_at(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_object()) {
    throw ConfigError(std::string("'") + key + "' must be an object");
  }
  return v;
}

}  // namespace

PriorMode prior_mode_from_string(const std::string& text) {
  if (text == "paper-diagonal") return PriorMode::PaperDiagonal;
  if (text == "exact-joint") return PriorMode::ExactJoint;
  throw ConfigError("unknown prior mode '" + text + "'");
}

radar::ScenarioConfig parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scenario JSON must be an object");
  reject_unknown(doc,
                 {"T", "N", "w", "seed", "runs", "truth_mode", "Q", "R",
                  "priors", "estimators", "prior_mode", "variance_floor"},
                 "scenario");

  radar::ScenarioConfig cfg;
  read_into(doc, "T", cfg.T, "scenario");
  read_into(doc, "N", cfg.N, "scenario");
  read_into(doc, "w", cfg.w, "scenario");
  read_into(doc, "seed", cfg.seed, "scenario");
  read_into(doc, "runs", cfg.runs, "scenario");
  read_into(doc, "R", cfg.R, "scenario");
  read_into(doc, "variance_floor", cfg.variance_floor, "scenario");
  read_into(doc, "estimators", cfg.estimators, "scenario");

  std::string text;
  if (doc.contains("truth_mode")) {
    read_into(doc, "truth_mode", text, "scenario");
    try {
      cfg.truth_mode = radar::truth_mode_from_string(text);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("prior_mode")) {
    read_into(doc, "prior_mode", text, "scenario");
    cfg.prior_mode = prior_mode_from_string(text);
  }
  if (doc.contains("Q")) {
    const json& q = object_at(doc, "Q");
    reject_unknown(q, {"x", "xdot"}, "Q");
    read_into(q, "x", cfg.Q_x, "Q");
    read_into(q, "xdot", cfg.Q_xdot, "Q");
  }
  if (doc.contains("priors")) {
    const json& p = object_at(doc, "priors");
    reject_unknown(p, {"x", "xdot", "h", "P_x", "P_xdot", "P_h"}, "priors");
    read_into(p, "x", cfg.priors.x, "priors");
    read_into(p, "xdot", cfg.priors.xdot, "priors");
    read_into(p, "h", cfg.priors.h, "priors");
    read_into(p, "P_x", cfg.priors.P_x, "priors");
    read_into(p, "P_xdot", cfg.priors.P_xdot, "priors");
    read_into(p, "P_h", cfg.priors.P_h, "priors");
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return cfg;
}

radar::ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const radar::ScenarioConfig& cfg) {
  json doc = {
      {"T", cfg.T},
      {"N", cfg.N},
      {"w", cfg.w},
      {"seed", cfg.seed},
      {"runs", cfg.runs},
      {"truth_mode", radar::to_string(cfg.truth_mode)},
      {"Q", {{"x", cfg.Q_x}, {"xdot", cfg.Q_xdot}}},
      {"R", cfg.R},
      {"priors",
       {{"x", cfg.priors.x},
        {"xdot", cfg.priors.xdot},
        {"h", cfg.priors.h},
        {"P_x", cfg.priors.P_x},
        {"P_xdot", cfg.priors.P_xdot},
        {"P_h", cfg.priors.P_h}}},
      {"estimators", cfg.estimators},
      {"prior_mode", to_string(cfg.prior_mode)},
      {"variance_floor", cfg.variance_floor},
  };
  return doc.dump(2) + "\n";
}

void write_scenario_csv(std::ostream& os, const radar::RadarTruth& truth,
                        const radar::RangeMeasurements& ranges) {
  os << kScenarioCsvHeader << '\n';
  for (std::size_t k = 0; k < truth.size(); ++k) {
    os << (k + 1) << ',' << format_double(truth.t[k]) << ','
       << format_double(truth.x[k]) << ',' << format_double(truth.xdot[k])
       << ',' << format_double(truth.h[k]) << ','
       << format_double(ranges.range[k]) << '\n';
  }
}

std::string summary_to_json(const ComparisonSummary& summary) {
  auto triple = [](const std::array<double, 3>& a) {
    return json{{"x", a[0]}, {"v", a[1]}, {"h", a[2]}};
  };
  json doc;
  doc["trailing_fraction"] = summary.trailing_fraction;
  doc["runs"] = summary.seeds.size();
  doc["seeds"] = summary.seeds;
  json estimators = json::object();
  for (const auto& e : summary.estimators) {
    json per_run = json::array();
    for (const auto& r : e.per_run) per_run.push_back(triple(r));
    estimators[e.estimator] = {{"mean_rmse", triple(e.mean)},
                               {"min_rmse", triple(e.min)},
                               {"max_rmse", triple(e.max)},
                               {"per_run_rmse", per_run}};
  }
  doc["estimators"] = estimators;
  return doc.dump(2) + "\n";
}

}  // namespace gssm_lab
