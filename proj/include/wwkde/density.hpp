#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wwkde/estimator.hpp"

namespace wwkde {

// Reproducibility handle: the same (seed, stream_id) pair always produces the
// same draws; distinct stream_ids give independent streams for parallel
// replications.
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Deterministic generator with explicit samplers. Only the mt19937_64 engine
// itself comes from the standard library; the transformations are spelled out
// here so the produced sequences do not depend on the standard library
// implementation.
class Rng {
 public:
  explicit Rng(const SeededStream& stream);

  double u01();      // uniform on [0, 1)
  double normal();   // standard normal, Box-Muller (cosine branch)
  double gamma_dist(double shape, double scale);  // Marsaglia-Tsang, shape >= 1
  double beta_dist(double a, double b);
  double laplace();  // density exp(-|x|) / 2

 private:
  std::mt19937_64 engine_;
};

enum class Family { normal, beta, gamma, laplace };

// One mixture component: X = scale_a * Y + shift_b with Y from the base
// family (standard normal, Beta(p1,p2), Gamma(shape p1, scale p2), or
// standard Laplace).
struct DensityComponent {
  double weight;
  Family family;
  double p1;
  double p2;
  double scale_a;
  double shift_b;
};

// Analytic benchmark density with exact evaluation, exact CDF and seeded
// sampling. Construction verifies by quadrature that the density integrates
// to one.
class DensityModel {
 public:
  static DensityModel by_name(std::string_view name);
  static const std::vector<std::string>& names();

  double operator()(double x) const;
  double cdf(double x) const;
  Sample sample(const SeededStream& stream, std::size_t n) const;

  // Support endpoints (may be infinite).
  std::pair<double, double> support() const;
  // Finite range that carries essentially all mass; used for fixed grids.
  std::pair<double, double> nominal_range() const { return nominal_range_; }

  const std::string& name() const { return name_; }
  const std::vector<DensityComponent>& components() const { return components_; }

 private:
  DensityModel(std::string name, std::vector<DensityComponent> components,
               std::pair<double, double> nominal_range);
  void validate_mass() const;

  std::string name_;
  std::vector<DensityComponent> components_;
  std::pair<double, double> nominal_range_;
};

}  // namespace wwkde
