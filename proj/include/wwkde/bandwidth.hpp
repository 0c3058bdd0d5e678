#pragma once

#include <cstddef>
#include <vector>

namespace wwkde {

// Per-observation bandwidth sequence h_k. The power-law kind is h_k = k^-gamma
// (strictly decreasing for gamma > 0); the constant kind is the classical
// single-bandwidth estimator.
struct BandwidthSchedule {
  enum class Kind { power_law, constant };

  Kind kind = Kind::power_law;
  double gamma = 0.0;       // power_law only
  double constant_h = 1.0;  // constant only

  static BandwidthSchedule power(double gamma);
  static BandwidthSchedule constant(double h);

  // h_k for k >= 1.
  double at(std::size_t k) const;
};

// Harmonic-mean-type aggregate: n / sum_k 1/h_k. Drives the variance proxy of
// the Goldenshluger-Lepski penalty.
double harmonic_aggregate(const BandwidthSchedule& schedule, std::size_t n);

// Exact squared-bias proxy (1/n^2) |sum_k h_k^beta|^2 for h_k = k^-gamma.
double theoretical_bias_sq(double beta, double gamma, std::size_t n);

// Exact variance proxy (1/n^2) sum_k k^gamma.
double theoretical_variance(double gamma, std::size_t n);

// Rate-optimal exponent 1/(2 beta + 1) for smoothness beta.
double optimal_gamma(double beta);

// Heuristic smoothness read-out from a selected gamma: (1/gamma - 1) / 2.
double beta_hat_from_gamma(double gamma);

// Candidate set for the selection rules. Values are gammas except for
// fixed_h_lmr, where they are constant bandwidths.
struct GammaGrid {
  enum class Kind { equispaced_lmr, sqrt_log_gl, fixed_h_lmr };

  Kind kind = Kind::equispaced_lmr;
  std::vector<double> values;  // strictly increasing, in (0, 1]

  static GammaGrid explicit_values(Kind kind, std::vector<double> values);
  std::size_t size() const { return values.size(); }
};

// equispaced_lmr: {i * gamma_max / size : i = 1..size}
// sqrt_log_gl:    {sqrt(i / floor(log n)) : i = 1..floor(log n)}
// fixed_h_lmr:    {i / size : i = 1..size}
GammaGrid make_grid(GammaGrid::Kind kind, std::size_t n, std::size_t size,
                    double gamma_max);

}  // namespace wwkde
