#include "gssm_lab/estimate_series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace gssm_lab {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    std::ostringstream os;
    os << "line " << line << ": bad number '" << field << "'";
    throw std::runtime_error(os.str());
  }
  return v;
}

}  // namespace

void write_series_csv(std::ostream& os, const EstimateSeries& series) {
  os << kSeriesCsvHeader << '\n';
  for (const auto& r : series.rows) {
    os << r.step << ',' << format_double(r.t);
    for (const auto* group : {&r.truth, &r.estimate, &r.variance, &r.error}) {
      for (const double v : *group) os << ',' << format_double(v);
    }
    os << '\n';
  }
}

void write_series_csv(const std::string& path, const EstimateSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_series_csv(out, series);
}

EstimateSeries read_series_csv(std::istream& is, std::string estimator) {
  EstimateSeries series;
  series.estimator = std::move(estimator);
  std::string line;
  if (!std::getline(is, line) || line != kSeriesCsvHeader) {
    throw std::runtime_error("estimate CSV header mismatch");
  }
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 14) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 14 fields, got " << fields.size();
      throw std::runtime_error(os.str());
    }
    EstimateRow row;
    row.step = static_cast<int>(parse_double(fields[0], line_no));
    row.t = parse_double(fields[1], line_no);
    std::size_t f = 2;
    for (auto* group : {&row.truth, &row.estimate, &row.variance, &row.error}) {
      for (double& v : *group) v = parse_double(fields[f++], line_no);
    }
    series.rows.push_back(row);
  }
  return series;
}

EstimateSeries read_series_csv(const std::string& path, std::string estimator) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_series_csv(in, std::move(estimator));
}

RmseSummary compute_rmse(const EstimateSeries& series,
                         double trailing_fraction) {
  if (series.empty()) {
    throw std::invalid_argument("RMSE of an empty estimate series");
  }
  if (!(trailing_fraction > 0.0 && trailing_fraction <= 1.0)) {
    throw std::invalid_argument("trailing fraction must lie in (0, 1]");
  }
  const std::size_t n = series.size();
  std::size_t start = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - trailing_fraction)));
  start = std::min(start, n - 1);

  RmseSummary out;
  out.trailing_fraction = trailing_fraction;
  out.steps_used = n - start;
  for (std::size_t s = 0; s < 3; ++s) {
    double sum = 0.0;
    for (std::size_t k = start; k < n; ++k) {
      const double e = series.rows[k].error[s];
      sum += e * e;
    }
    out.rmse[s] = std::sqrt(sum / static_cast<double>(out.steps_used));
  }
  return out;
}

const EstimatorRmse& ComparisonSummary::at(std::string_view estimator) const {
  for (const auto& e : estimators) {
    if (e.estimator == estimator) return e;
  }
  throw std::out_of_range("no RMSE entry for " + std::string(estimator));
}

void finalize(EstimatorRmse& rmse) {
  if (rmse.per_run.empty()) return;
  for (std::size_t s = 0; s < 3; ++s) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& run : rmse.per_run) {
      sum += run[s];
      lo = std::min(lo, run[s]);
      hi = std::max(hi, run[s]);
    }
    // Clamp so rounding in the sum cannot push the mean outside [min, max].
    rmse.mean[s] =
        std::clamp(sum / static_cast<double>(rmse.per_run.size()), lo, hi);
    rmse.min[s] = lo;
    rmse.max[s] = hi;
  }
}

}  // namespace gssm_lab
