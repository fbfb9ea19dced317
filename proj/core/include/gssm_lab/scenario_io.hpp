#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gssm_lab/estimate_series.hpp"
#include "gssm_lab/radar.hpp"

namespace gssm_lab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a scenario JSON document. Missing keys keep their defaults;
/// unknown keys and wrongly typed values raise ConfigError.
///
///   {"T": 0.05, "N": 1000, "w": 10, "seed": 1, "runs": 100,
///    "truth_mode": "sampled", "Q": {"x": 2.5e-5, "xdot": 2.5e-5}, "R": 9,
///    "priors": {"x": -100, "xdot": 200, "h": 2000,
///               "P_x": 49, "P_xdot": 49, "P_h": 49},
///    "estimators": ["ekf", "gssm"],
///    "prior_mode": "paper-diagonal", "variance_floor": 1e-10}
radar::ScenarioConfig parse_scenario(std::string_view json_text);
radar::ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json(const radar::ScenarioConfig& cfg);

PriorMode prior_mode_from_string(const std::string& text);

inline constexpr std::string_view kScenarioCsvHeader =
    "step,t,truth_x,truth_v,truth_h,range";

/// Truth and measured range per step, same numeric format as estimate CSVs.
void write_scenario_csv(std::ostream& os, const radar::RadarTruth& truth,
                        const radar::RangeMeasurements& ranges);

std::string summary_to_json(const ComparisonSummary& summary);

}  // namespace gssm_lab
