#include "wwkde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wwkde {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  return {mean, std::sqrt(var)};
}

double ise_on_grid(std::span<const double> fitted, const DensityModel& density,
                   const EvaluationGrid& grid) {
  double sum = 0.0;
  const auto points = grid.points();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = fitted[i] - density(points[i]);
    sum += d * d;
  }
  return sum * grid.spacing();
}

EvaluationGrid sample_range_grid(const Sample& sample, std::size_t points) {
  const auto [lo, hi] =
      std::minmax_element(sample.observations.begin(), sample.observations.end());
  return EvaluationGrid::right_riemann(*lo, *hi, points);
}

void finalize(MiseReport& report) {
  const auto [mean, sd] = mean_std(report.per_rep_ise);
  report.mise_times_100 = 100.0 * mean;
  report.std_times_100 = 100.0 * sd;
}

}  // namespace

std::string to_string(BenchMethod method) {
  switch (method) {
    case BenchMethod::ww_lmr:
      return "ww_lmr";
    case BenchMethod::lmr_fixed:
      return "lmr_fixed";
    case BenchMethod::ww_frozen:
      return "ww_frozen";
  }
  return "unknown";
}

BenchMethod bench_method_from_string(std::string_view name) {
  if (name == "ww_lmr") return BenchMethod::ww_lmr;
  if (name == "lmr_fixed") return BenchMethod::lmr_fixed;
  if (name == "ww_frozen") return BenchMethod::ww_frozen;
  throw std::invalid_argument("unknown benchmark method: " + std::string(name));
}

MiseReport mise_protocol_with(const DensityModel& density,
                              const GaussianMixtureKernel& kernel, std::size_t n,
                              std::size_t replications,
                              const ExperimentConfig& config, std::uint64_t seed,
                              const EstimateFn& estimate) {
  if (replications < 2)
    throw std::invalid_argument("mise protocol needs at least 2 replications");
  if (n < 2) throw std::invalid_argument("mise protocol needs n >= 2");

  MiseReport report;
  report.density = density.name();
  report.kernel_order = norms(kernel).order;
  report.n = n;
  report.replications = replications;
  report.per_rep_ise.resize(replications);
  report.per_rep_gamma.resize(replications);

  const auto reps = static_cast<std::ptrdiff_t>(replications);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < reps; ++j) {
    const Sample sample =
        density.sample({seed, static_cast<std::uint64_t>(j)}, n);
    const auto grid = sample_range_grid(sample, config.ise_points);
    auto [fitted, gamma] = estimate(sample, grid);
    report.per_rep_ise[j] = ise_on_grid(fitted, density, grid);
    report.per_rep_gamma[j] = gamma;
  }
  finalize(report);
  return report;
}

MiseReport mise_protocol(const DensityModel& density, BenchMethod method,
                         const GaussianMixtureKernel& kernel, std::size_t n,
                         std::size_t replications, const ExperimentConfig& config,
                         std::uint64_t seed) {
  EstimateFn estimate;
  switch (method) {
    case BenchMethod::ww_lmr:
      estimate = [&](const Sample& sample, const EvaluationGrid& grid) {
        const auto grid_spec = make_grid(GammaGrid::Kind::equispaced_lmr, n,
                                         config.grid_size, config.gamma_max);
        auto sel = lmr_select_detailed(sample, kernel, grid_spec, grid);
        return std::make_pair(std::move(sel.chosen_row_base),
                              sel.result.chosen_gamma);
      };
      break;
    case BenchMethod::lmr_fixed:
      estimate = [&](const Sample& sample, const EvaluationGrid& grid) {
        const auto grid_spec =
            make_grid(GammaGrid::Kind::fixed_h_lmr, n, config.grid_size, 1.0);
        auto sel = lmr_select_fixed_h_detailed(sample, kernel, grid_spec, grid);
        return std::make_pair(std::move(sel.chosen_row_base),
                              sel.result.chosen_gamma);
      };
      break;
    case BenchMethod::ww_frozen:
      throw std::invalid_argument(
          "mise_protocol: use frozen_gamma_protocol for the frozen strategy");
  }
  auto report = mise_protocol_with(density, kernel, n, replications, config,
                                   seed, estimate);
  report.method = method;
  return report;
}

std::pair<MiseReport, MiseReport> frozen_gamma_protocol(
    const DensityModel& density, const GaussianMixtureKernel& kernel,
    std::size_t n0, std::size_t n1, std::size_t replications,
    const ExperimentConfig& config, std::uint64_t seed) {
  if (n0 < 2) throw std::invalid_argument("frozen protocol needs n0 >= 2");
  if (replications < 2)
    throw std::invalid_argument("frozen protocol needs at least 2 replications");

  MiseReport phase1;
  phase1.density = density.name();
  phase1.method = BenchMethod::ww_lmr;
  phase1.kernel_order = norms(kernel).order;
  phase1.n = n0;
  phase1.replications = replications;
  phase1.per_rep_ise.resize(replications);
  phase1.per_rep_gamma.resize(replications);

  MiseReport phase2 = phase1;
  phase2.method = BenchMethod::ww_frozen;
  phase2.n = n0 + n1;

  const auto reps = static_cast<std::ptrdiff_t>(replications);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < reps; ++j) {
    const Sample full =
        density.sample({seed, static_cast<std::uint64_t>(j)}, n0 + n1);
    Sample head;
    head.observations.assign(full.observations.begin(),
                             full.observations.begin() + n0);

    const auto grid1 = sample_range_grid(head, config.ise_points);
    const auto candidates = make_grid(GammaGrid::Kind::equispaced_lmr, n0,
                                      config.grid_size, config.gamma_max);
    auto sel = lmr_select_detailed(head, kernel, candidates, grid1);
    phase1.per_rep_ise[j] = ise_on_grid(sel.chosen_row_base, density, grid1);
    phase1.per_rep_gamma[j] = sel.result.chosen_gamma;

    // Recursive continuation with the frozen gamma: identical to the batch
    // evaluation of the full ordered sample under the same schedule.
    const auto schedule = BandwidthSchedule::power(sel.result.chosen_gamma);
    const auto grid2 = sample_range_grid(full, config.ise_points);
    const auto fitted = ww_evaluate_serial(full, kernel, schedule, grid2.points());
    phase2.per_rep_ise[j] = ise_on_grid(fitted, density, grid2);
    phase2.per_rep_gamma[j] = sel.result.chosen_gamma;
  }
  finalize(phase1);
  finalize(phase2);
  return {std::move(phase1), std::move(phase2)};
}

TrajectoryRecord online_selection_protocol(const DensityModel& density,
                                           const GaussianMixtureKernel& kernel,
                                           std::size_t n_start, std::size_t n_end,
                                           std::size_t candidates,
                                           std::size_t grid_points,
                                           const SeededStream& stream,
                                           double gamma_max) {
  if (n_start == 0) throw std::invalid_argument("online protocol needs n_start >= 1");
  if (n_end < n_start)
    throw std::invalid_argument("online protocol needs n_end >= n_start");

  const auto [lo, hi] = density.nominal_range();
  EstimatorMatrix matrix(kernel,
                         make_grid(GammaGrid::Kind::equispaced_lmr, n_end,
                                   candidates, gamma_max),
                         EvaluationGrid::linspace(lo, hi, grid_points));

  const Sample sample = density.sample(stream, n_end);

  TrajectoryRecord record;
  record.density = density.name();
  record.n_start = n_start;
  record.n_end = n_end;
  record.seed = stream.seed;
  record.selected.reserve(n_end - n_start + 1);
  for (std::size_t k = 0; k < n_end; ++k) {
    matrix.absorb(sample.observations[k]);
    if (k + 1 >= n_start)
      record.selected.push_back(lmr_select_from_matrix(matrix).chosen_gamma);
  }
  return record;
}

std::vector<GammaMeanRow> gamma_mean_experiment(
    const DensityModel& density, const GaussianMixtureKernel& kernel,
    std::span<const std::size_t> sample_sizes, std::size_t replications,
    const ExperimentConfig& config, std::uint64_t seed) {
  if (replications < 2)
    throw std::invalid_argument("gamma mean experiment needs at least 2 replications");

  std::vector<GammaMeanRow> rows(sample_sizes.size());
  for (std::size_t r = 0; r < sample_sizes.size(); ++r) {
    const std::size_t n = sample_sizes[r];
    rows[r].n = n;
    rows[r].per_rep.resize(replications);
    const auto candidates = make_grid(GammaGrid::Kind::equispaced_lmr, n,
                                      config.grid_size, config.gamma_max);
    const auto reps = static_cast<std::ptrdiff_t>(replications);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < reps; ++j) {
      const std::uint64_t stream_id = r * replications + static_cast<std::size_t>(j);
      const Sample sample = density.sample({seed, stream_id}, n);
      const auto grid = sample_range_grid(sample, config.ise_points);
      rows[r].per_rep[j] = lmr_select(sample, kernel, candidates, grid).chosen_gamma;
    }
    const auto [mean, sd] = mean_std(rows[r].per_rep);
    rows[r].mean = mean;
    rows[r].stddev = sd;
  }
  return rows;
}

}  // namespace wwkde
