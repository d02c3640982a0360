#include "quench/analysis.hpp"

#include <cmath>
#include <string>

#include "quench/error.hpp"

namespace quench {

void CorrelationSeries::push(double t, std::vector<double> row, std::optional<std::vector<double>> err) {
  if (static_cast<int>(row.size()) != max_distance + 1) throw InvalidArgument("correlation row has wrong length");
  if (err && static_cast<int>(err->size()) != max_distance + 1)
    throw InvalidArgument("correlation error row has wrong length");
  const std::vector<double> zeros(row.size(), 0.0);
  if (err && !errors) errors.emplace(values.size(), zeros);
  times.push_back(t);
  values.push_back(std::move(row));
  if (errors) errors->push_back(err ? std::move(*err) : zeros);
}

std::vector<double> CorrelationSeries::distance_column(int d) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row[static_cast<std::size_t>(d)]);
  return out;
}

void CorrelationSeries::validate() const {
  if (values.size() != times.size() || (errors && errors->size() != values.size()))
    throw InvalidArgument("correlation series shape mismatch");
  for (std::size_t k = 0; k < values.size(); ++k)
    for (int d = 0; d <= max_distance; ++d) {
      const double err = errors ? (*errors)[k][static_cast<std::size_t>(d)] : 0.0;
      if (std::abs(values[k][static_cast<std::size_t>(d)]) > 1.0 + 3.0 * err + 1e-9)
        throw NumericalError("|C^zz| exceeds 1 at t=" + std::to_string(times[k]));
    }
}

std::optional<XiFit> fit_xi(double c1, double c2) {
  const double a1 = std::abs(c1), a2 = std::abs(c2);
  if (!(a1 > kXiFloor) || !(a2 > kXiFloor)) return std::nullopt;
  const double l1 = std::log(a1), l2 = std::log(a2);
  const double rate = -(l1 + 2.0 * l2) / 5.0;
  if (!(rate > 0.0)) return std::nullopt;
  return XiFit{1.0 / rate, l1 + rate, l2 + 2.0 * rate};
}

std::optional<XiFit> fit_xi(const CorrelationSeries& s, std::size_t k) {
  if (s.max_distance < 2) throw InvalidArgument("xi fit needs C^zz at d = 1 and 2");
  return fit_xi(s.at(k, 1), s.at(k, 2));
}

XiSeries xi_series(const CorrelationSeries& s) {
  XiSeries out;
  out.times = s.times;
  for (std::size_t k = 0; k < s.times.size(); ++k) out.fits.push_back(fit_xi(s, k));
  return out;
}

double gge_xi(double eps, double hc) {
  const double arg = 2.0 * (eps * hc + hc);
  if (!(arg > 1.0)) throw DomainError("GGE correlation length needs 2(eps h_c + h_c) > 1");
  return 1.0 / std::log(arg);
}

std::vector<std::optional<double>> deviation_series(const XiSeries& s, const XiSeries& e) {
  if (s.times != e.times) throw InvalidArgument("xi series have different time grids");
  std::vector<std::optional<double>> out(s.times.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto a = s.xi(k), b = e.xi(k);
    if (a && b) out[k] = std::abs(*a - *b);
  }
  return out;
}

std::optional<double> max_deviation(const std::vector<std::optional<double>>& dev) {
  std::optional<double> m;
  for (const auto& d : dev)
    if (d && (!m || *d > *m)) m = *d;
  return m;
}

std::vector<ScanPoint> xi_field_scan(const std::function<CorrelationSeries(double)>& engine,
                                     const std::vector<double>& fields, double time) {
  std::vector<ScanPoint> out;
  for (double h : fields) {
    ScanPoint p{h, std::nullopt, {}};
    try {
      const CorrelationSeries s = engine(h);
      std::size_t best = 0;
      for (std::size_t k = 1; k < s.times.size(); ++k)
        if (std::abs(s.times[k] - time) < std::abs(s.times[best] - time)) best = k;
      if (s.times.empty() || std::abs(s.times[best] - time) > 1e-9)
        throw InvalidArgument("engine output has no sample at t=" + std::to_string(time));
      if (auto fit = fit_xi(s, best)) p.xi = fit->xi;
    } catch (const std::exception& ex) {
      p.error = ex.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace quench
