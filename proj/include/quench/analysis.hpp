#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace quench {

// C^zz_d(t) on a time x distance grid, d = 0..max_distance.
struct CorrelationSeries {
  std::vector<double> times;
  int max_distance = 0;
  std::vector<std::vector<double>> values;              // [time][d]
  std::optional<std::vector<std::vector<double>>> errors;  // standard errors, same shape
  std::string provenance;

  void push(double t, std::vector<double> row, std::optional<std::vector<double>> err = std::nullopt);
  double at(std::size_t time_index, int d) const { return values[time_index][static_cast<std::size_t>(d)]; }
  // Column C^zz_d over all times.
  std::vector<double> distance_column(int d) const;
  void validate() const;
};

inline constexpr double kXiFloor = 1e-8;

struct XiFit {
  double xi = 0.0;
  double residual_d1 = 0.0;
  double residual_d2 = 0.0;
};

struct XiSeries {
  std::vector<double> times;
  std::vector<std::optional<XiFit>> fits;

  std::optional<double> xi(std::size_t k) const {
    return fits[k] ? std::optional<double>(fits[k]->xi) : std::nullopt;
  }
};

// Fit ln|C_d| = -d/xi through the origin over d in {1, 2}. Absent when either
// |C_1| or |C_2| is below kXiFloor or the fitted decay rate is not positive.
std::optional<XiFit> fit_xi(double c1, double c2);
std::optional<XiFit> fit_xi(const CorrelationSeries& series, std::size_t time_index);
XiSeries xi_series(const CorrelationSeries& series);

// 1 / ln(2 (eps h_c + h_c)); DomainError when the log argument is <= 1.
double gge_xi(double epsilon, double critical_field = 1.0);

// |xi_s - xi_e| pointwise, absent where either input is absent.
std::vector<std::optional<double>> deviation_series(const XiSeries& simulated, const XiSeries& exact);
std::optional<double> max_deviation(const std::vector<std::optional<double>>& deviations);

struct ScanPoint {
  double field_x = 0.0;
  std::optional<double> xi;
  std::string error;
};

// Runs `engine` (final transverse field -> correlation series) per grid point
// and fits xi at `time`. Engine failures are recorded per point.
std::vector<ScanPoint> xi_field_scan(const std::function<CorrelationSeries(double)>& engine,
                                     const std::vector<double>& fields, double time);

}  // namespace quench
