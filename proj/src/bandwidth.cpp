#include "wwkde/bandwidth.hpp"

#include <cmath>
#include <stdexcept>

namespace wwkde {

BandwidthSchedule BandwidthSchedule::power(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("bandwidth schedule: gamma must lie in [0, 1]");
  BandwidthSchedule s;
  s.kind = Kind::power_law;
  s.gamma = gamma;
  return s;
}

BandwidthSchedule BandwidthSchedule::constant(double h) {
  if (!(h > 0.0 && h <= 1.0))
    throw std::invalid_argument("bandwidth schedule: constant h must lie in (0, 1]");
  BandwidthSchedule s;
  s.kind = Kind::constant;
  s.constant_h = h;
  return s;
}

double BandwidthSchedule::at(std::size_t k) const {
  if (k == 0) throw std::invalid_argument("bandwidth index k must be >= 1");
  if (kind == Kind::constant) return constant_h;
  return std::pow(static_cast<double>(k), -gamma);
}

double harmonic_aggregate(const BandwidthSchedule& schedule, std::size_t n) {
  if (n == 0) throw std::invalid_argument("harmonic_aggregate: n must be >= 1");
  double inv_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) inv_sum += 1.0 / schedule.at(k);
  return static_cast<double>(n) / inv_sum;
}

double theoretical_bias_sq(double beta, double gamma, std::size_t n) {
  if (!(beta > 0.0)) throw std::invalid_argument("theoretical_bias_sq: beta must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("theoretical_bias_sq: gamma must lie in [0, 1]");
  if (n == 0) throw std::invalid_argument("theoretical_bias_sq: n must be >= 1");
  double sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    sum += std::pow(static_cast<double>(k), -gamma * beta);
  const double mean = sum / static_cast<double>(n);
  return mean * mean;
}

double theoretical_variance(double gamma, std::size_t n) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("theoretical_variance: gamma must lie in [0, 1]");
  if (n == 0) throw std::invalid_argument("theoretical_variance: n must be >= 1");
  double sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    sum += std::pow(static_cast<double>(k), gamma);
  return sum / (static_cast<double>(n) * static_cast<double>(n));
}

double optimal_gamma(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("optimal_gamma: beta must be > 0");
  return 1.0 / (2.0 * beta + 1.0);
}

double beta_hat_from_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("beta_hat_from_gamma: gamma must lie in (0, 1)");
  return 0.5 * (1.0 / gamma - 1.0);
}

GammaGrid GammaGrid::explicit_values(Kind kind, std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("gamma grid must be non-empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0 && values[i] <= 1.0))
      throw std::invalid_argument("gamma grid values must lie in (0, 1]");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw std::invalid_argument("gamma grid values must be strictly increasing");
  }
  GammaGrid g;
  g.kind = kind;
  g.values = std::move(values);
  return g;
}

GammaGrid make_grid(GammaGrid::Kind kind, std::size_t n, std::size_t size,
                    double gamma_max) {
  switch (kind) {
    case GammaGrid::Kind::equispaced_lmr: {
      if (size == 0) throw std::invalid_argument("make_grid: size must be >= 1");
      if (!(gamma_max > 0.0 && gamma_max <= 1.0))
        throw std::invalid_argument("make_grid: gamma_max must lie in (0, 1]");
      std::vector<double> values(size);
      for (std::size_t i = 1; i <= size; ++i)
        values[i - 1] = gamma_max * static_cast<double>(i) / static_cast<double>(size);
      return GammaGrid::explicit_values(kind, std::move(values));
    }
    case GammaGrid::Kind::sqrt_log_gl: {
      const auto count = static_cast<std::size_t>(std::log(static_cast<double>(n)));
      if (n < 3 || count == 0)
        throw std::invalid_argument("make_grid: sqrt_log_gl grid needs n >= 3");
      std::vector<double> values(count);
      for (std::size_t i = 1; i <= count; ++i)
        values[i - 1] = std::sqrt(static_cast<double>(i) / static_cast<double>(count));
      return GammaGrid::explicit_values(kind, std::move(values));
    }
    case GammaGrid::Kind::fixed_h_lmr: {
      if (size == 0) throw std::invalid_argument("make_grid: size must be >= 1");
      std::vector<double> values(size);
      for (std::size_t i = 1; i <= size; ++i)
        values[i - 1] = static_cast<double>(i) / static_cast<double>(size);
      return GammaGrid::explicit_values(kind, std::move(values));
    }
  }
  throw std::invalid_argument("make_grid: unknown grid kind");
}

}  // namespace wwkde
