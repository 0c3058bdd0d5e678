#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wwkde/bandwidth.hpp"
#include "wwkde/kernel.hpp"

namespace wwkde {

// Observations in arrival order. Order matters: observation k is smoothed
// with its own bandwidth h_k.
struct Sample {
  std::vector<double> observations;

  std::size_t size() const { return observations.size(); }
  bool empty() const { return observations.empty(); }
};

class EvaluationGrid;

// An evaluation grid padded on both sides, remembering where the original
// points sit inside it.
struct ExtendedGrid;

// Equispaced evaluation points over a nominal range [a, b].
class EvaluationGrid {
 public:
  // count points a, a + d, ..., b with d = (b - a) / (count - 1).
  static EvaluationGrid linspace(double a, double b, std::size_t count);
  // count points a + d, ..., b with d = (b - a) / count (right Riemann nodes).
  static EvaluationGrid right_riemann(double a, double b, std::size_t count);
  // Validates equispacing to 1e-12 relative tolerance.
  static EvaluationGrid from_points(std::vector<double> points);

  std::span<const double> points() const { return points_; }
  double spacing() const { return spacing_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return points_.size(); }

  // Same spacing, padded by at least `pad` on both sides.
  ExtendedGrid extended(double pad) const;

 private:
  EvaluationGrid() = default;
  std::vector<double> points_;
  double spacing_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

struct ExtendedGrid {
  EvaluationGrid grid;
  std::size_t base_offset;  // index of the base grid's first point
  std::size_t base_count;
};

// Variable-bandwidth recursive estimate evaluated in batch:
// (1/n) sum_k K_{h_k}(X_k - x). With a constant schedule this is the
// classical fixed-bandwidth estimator. The first overload parallelizes over
// evaluation points; the serial variant is the reference used by tests and
// the benchmark. Both compute identical per-point values.
std::vector<double> ww_evaluate(const Sample& sample,
                                const GaussianMixtureKernel& kernel,
                                const BandwidthSchedule& schedule,
                                std::span<const double> xs);
std::vector<double> ww_evaluate_serial(const Sample& sample,
                                       const GaussianMixtureKernel& kernel,
                                       const BandwidthSchedule& schedule,
                                       std::span<const double> xs);
double ww_evaluate_at(const Sample& sample, const GaussianMixtureKernel& kernel,
                      const BandwidthSchedule& schedule, double x);

// Doubly-smoothed estimate (1/n) sum_k (K_{h_k(b)} * K_{h_k(a)})(X_k - x)
// used by the Goldenshluger-Lepski comparison.
std::vector<double> gl_convolved_evaluate(const Sample& sample,
                                          const GaussianMixtureKernel& kernel,
                                          const BandwidthSchedule& schedule_a,
                                          const BandwidthSchedule& schedule_b,
                                          std::span<const double> xs);
std::vector<double> gl_convolved_evaluate(const Sample& sample,
                                          const GaussianMixtureKernel& kernel,
                                          double gamma, double gamma_prime,
                                          std::span<const double> xs);

// An estimator as an explicit mixture: (1/n) sum_k mixtures[k](x - centers[k]).
// Supports exact L2 geometry between estimators via Gaussian algebra.
struct MixtureSum {
  std::vector<double> centers;
  std::vector<GaussianMixtureKernel> mixtures;  // one per center
};

MixtureSum ww_mixture(const Sample& sample, const GaussianMixtureKernel& kernel,
                      const BandwidthSchedule& schedule);
MixtureSum gl_convolved_mixture(const Sample& sample,
                                const GaussianMixtureKernel& kernel,
                                double gamma, double gamma_prime);

double inner_product(const MixtureSum& a, const MixtureSum& b);
double l2_distance_sq_exact(const MixtureSum& a, const MixtureSum& b);

// Riemann approximation spacing * sum (fa - fb)^2 over a shared grid.
double l2_distance_sq_grid(std::span<const double> fa,
                           std::span<const double> fb, double spacing);

enum class L2Method { grid, exact };

struct WwSpec {
  const Sample& sample;
  const GaussianMixtureKernel& kernel;
  BandwidthSchedule schedule;
};

// Squared L2 distance between two batch estimators. The grid method needs a
// shared evaluation grid; the exact method expands all observation pairs
// (O(n^2), used as the oracle for the grid method).
double l2_distance_sq(const WwSpec& a, const WwSpec& b, L2Method method,
                      const EvaluationGrid* shared_grid = nullptr);

// M x K matrix of recursive estimates: row j holds the estimate with
// candidate gamma^(j) at the K grid points. One absorb() folds a new
// observation into every row at O(M*K) cost, independent of how many
// observations were absorbed before. Also accumulates, per row, the running
// inner-product sum that the comparison penalty needs, so selections from the
// matrix stay O(M*K) as well.
class EstimatorMatrix {
 public:
  EstimatorMatrix(GaussianMixtureKernel kernel, GammaGrid gamma_grid,
                  EvaluationGrid eval_grid);

  void absorb(double x);         // parallel over rows
  void absorb_serial(double x);  // reference implementation

  std::size_t count() const { return n_; }
  std::size_t candidate_count() const { return gamma_grid_.size(); }
  std::size_t point_count() const { return eval_grid_.size(); }
  std::span<const double> row(std::size_t j) const;
  const GammaGrid& gamma_grid() const { return gamma_grid_; }
  const EvaluationGrid& eval_grid() const { return eval_grid_; }
  const GaussianMixtureKernel& kernel() const { return kernel_; }

  // Running sum over absorbed k of <K_{h_k(gamma_max)}, K_{h_k(gamma_j)}>.
  double penalty_sum(std::size_t j) const { return penalty_sums_[j]; }

  // Total matrix cell writes so far; absorb cost audits.
  std::uint64_t cell_updates() const { return cell_updates_; }

 private:
  void absorb_row(std::size_t j, double x, double hj, double h_max);
  void check_value(double x) const;

  GaussianMixtureKernel kernel_;
  GammaGrid gamma_grid_;
  EvaluationGrid eval_grid_;
  std::size_t n_ = 0;
  std::vector<double> values_;        // M * K, row-major
  std::vector<double> penalty_sums_;  // M
  std::uint64_t cell_updates_ = 0;
};

}  // namespace wwkde
