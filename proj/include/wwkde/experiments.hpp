#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wwkde/density.hpp"
#include "wwkde/estimator.hpp"
#include "wwkde/kernel.hpp"
#include "wwkde/selection.hpp"

namespace wwkde {

enum class BenchMethod { ww_lmr, lmr_fixed, ww_frozen };

std::string to_string(BenchMethod method);
BenchMethod bench_method_from_string(std::string_view name);

struct MiseReport {
  std::string density;
  BenchMethod method = BenchMethod::ww_lmr;
  int kernel_order = 1;
  std::size_t n = 0;
  std::size_t replications = 0;
  double mise_times_100 = 0.0;
  double std_times_100 = 0.0;
  std::vector<double> per_rep_ise;
  std::vector<double> per_rep_gamma;  // selected gamma (or h) per replication
};

struct ExperimentConfig {
  std::size_t grid_size = 40;   // candidate count M
  double gamma_max = 0.5;       // largest gamma candidate
  std::size_t ise_points = 100; // integration nodes P over the sample range
};

// Monte-Carlo integrated squared error of the selected estimator, replicated
// with independent per-replication streams. Per replication: draw n
// observations, select gamma (or h) on the observed range, then accumulate
// ((b-a)/P) sum (fhat(x_l) - f(x_l))^2 over the right Riemann nodes of
// [a, b] = observed min/max. Deterministic for fixed seed, regardless of the
// number of threads.
MiseReport mise_protocol(const DensityModel& density, BenchMethod method,
                         const GaussianMixtureKernel& kernel, std::size_t n,
                         std::size_t replications, const ExperimentConfig& config,
                         std::uint64_t seed);

// Test seam: same protocol, but the caller supplies the fitted values on the
// per-replication grid (returned alongside the recorded gamma).
using EstimateFn = std::function<std::pair<std::vector<double>, double>(
    const Sample&, const EvaluationGrid&)>;
MiseReport mise_protocol_with(const DensityModel& density,
                              const GaussianMixtureKernel& kernel, std::size_t n,
                              std::size_t replications,
                              const ExperimentConfig& config, std::uint64_t seed,
                              const EstimateFn& estimate);

// Two-phase strategy: select gamma on the first n0 observations, freeze it,
// then continue the recursion over n1 more. Returns the phase reports
// (adaptive at n0, frozen continuation at n0+n1).
std::pair<MiseReport, MiseReport> frozen_gamma_protocol(
    const DensityModel& density, const GaussianMixtureKernel& kernel,
    std::size_t n0, std::size_t n1, std::size_t replications,
    const ExperimentConfig& config, std::uint64_t seed);

struct TrajectoryRecord {
  std::string density;
  std::size_t n_start = 0;
  std::size_t n_end = 0;
  std::vector<double> selected;  // gamma tilde for each k in [n_start, n_end]
  std::uint64_t seed = 0;
};

// Streams one sample through an estimator matrix (M candidates x K grid
// points over the density's nominal range) and records the selected gamma
// after each update from n_start on. The matrix is never rebuilt.
TrajectoryRecord online_selection_protocol(const DensityModel& density,
                                           const GaussianMixtureKernel& kernel,
                                           std::size_t n_start, std::size_t n_end,
                                           std::size_t candidates,
                                           std::size_t grid_points,
                                           const SeededStream& stream,
                                           double gamma_max = 0.5);

struct GammaMeanRow {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_rep;
};

// Mean and std of the selected gamma across replications, one row per sample
// size.
std::vector<GammaMeanRow> gamma_mean_experiment(
    const DensityModel& density, const GaussianMixtureKernel& kernel,
    std::span<const std::size_t> sample_sizes, std::size_t replications,
    const ExperimentConfig& config, std::uint64_t seed);

}  // namespace wwkde
