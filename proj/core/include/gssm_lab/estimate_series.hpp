#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gssm_lab {

/// Per-step radar estimate. Arrays are ordered (x, xdot, h).
struct EstimateRow {
  int step = 0;
  double t = 0.0;
  std::array<double, 3> truth{};
  std::array<double, 3> estimate{};
  std::array<double, 3> variance{};
  std::array<double, 3> error{};  ///< estimate - truth

  friend bool operator==(const EstimateRow&, const EstimateRow&) = default;
};

struct EstimateSeries {
  std::string estimator;
  std::vector<EstimateRow> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

inline constexpr std::string_view kSeriesCsvHeader =
    "step,t,truth_x,truth_v,truth_h,est_x,est_v,est_h,var_x,var_v,var_h,"
    "err_x,err_v,err_h";

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Header line plus one LF-terminated line per row.
void write_series_csv(std::ostream& os, const EstimateSeries& series);
void write_series_csv(const std::string& path, const EstimateSeries& series);

/// Throws std::runtime_error on a header mismatch or malformed field.
EstimateSeries read_series_csv(std::istream& is, std::string estimator = {});
EstimateSeries read_series_csv(const std::string& path,
                               std::string estimator = {});

struct RmseSummary {
  std::array<double, 3> rmse{};
  double trailing_fraction = 1.0;
  std::size_t steps_used = 0;
};

/// sqrt(mean(error^2)) per state over the trailing fraction of the rows.
/// Throws std::invalid_argument on an empty series or a fraction outside
/// (0, 1].
RmseSummary compute_rmse(const EstimateSeries& series,
                         double trailing_fraction = 1.0);

/// RMSE of one estimator across Monte Carlo runs.
struct EstimatorRmse {
  std::string estimator;
  std::vector<std::array<double, 3>> per_run;
  std::array<double, 3> mean{};
  std::array<double, 3> min{};
  std::array<double, 3> max{};
};

struct ComparisonSummary {
  double trailing_fraction = 1.0;
  std::vector<std::uint64_t> seeds;
  std::vector<EstimatorRmse> estimators;

  const EstimatorRmse& at(std::string_view estimator) const;
};

/// Fills mean/min/max from per_run.
void finalize(EstimatorRmse& rmse);

}  // namespace gssm_lab
