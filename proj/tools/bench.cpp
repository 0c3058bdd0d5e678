// Compares the OpenMP kernels against their serial reference implementations
// and checks that both produce identical values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wwkde/density.hpp"
#include "wwkde/estimator.hpp"
#include "wwkde/experiments.hpp"
#include "wwkde/kernel.hpp"

namespace {

using namespace wwkde;
using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point start) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

template <typename F>
double best_of(int runs, F&& f) {
  double best = 1e300;
  for (int i = 0; i < runs; ++i) {
    const auto t0 = clock_type::now();
    f();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void print_row(const char* name, double serial_ms, double parallel_ms,
               double diff) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx   max|diff| = %g\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
  const auto model = DensityModel::by_name("f1");
  const auto kernel = GaussianMixtureKernel::standard(3);
  const auto schedule = BandwidthSchedule::power(0.3);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    const auto sample = model.sample({7, 0}, 2000);
    const auto grid = EvaluationGrid::linspace(-4.0, 4.0, 2000);
    std::vector<double> serial, parallel;
    const double t_serial = best_of(3, [&] {
      serial = ww_evaluate_serial(sample, kernel, schedule, grid.points());
    });
    const double t_parallel = best_of(3, [&] {
      parallel = ww_evaluate(sample, kernel, schedule, grid.points());
    });
    print_row("batch evaluate 2000x2000", t_serial, t_parallel,
              max_abs_diff(serial, parallel));
  }

  {
    // Large enough that absorb() actually takes its parallel path.
    const auto sample = model.sample({7, 1}, 1000);
    const auto gammas = make_grid(GammaGrid::Kind::equispaced_lmr, 1000, 64, 0.5);
    const auto grid = EvaluationGrid::linspace(-4.0, 4.0, 1024);
    EstimatorMatrix serial_m(kernel, gammas, grid);
    EstimatorMatrix parallel_m(kernel, gammas, grid);
    const double t_serial = best_of(1, [&] {
      for (double x : sample.observations) serial_m.absorb_serial(x);
    });
    const double t_parallel = best_of(1, [&] {
      for (double x : sample.observations) parallel_m.absorb(x);
    });
    std::vector<double> a, b;
    for (std::size_t j = 0; j < 64; ++j) {
      a.insert(a.end(), serial_m.row(j).begin(), serial_m.row(j).end());
      b.insert(b.end(), parallel_m.row(j).begin(), parallel_m.row(j).end());
    }
    print_row("matrix absorb 1000x64x1024", t_serial, t_parallel,
              max_abs_diff(a, b));
  }

#ifdef _OPENMP
  {
    ExperimentConfig config;
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    MiseReport serial_r;
    const double t_serial = best_of(1, [&] {
      serial_r = mise_protocol(model, BenchMethod::ww_lmr, kernel, 250, 16,
                               config, 7);
    });
    omp_set_num_threads(max_threads);
    MiseReport parallel_r;
    const double t_parallel = best_of(1, [&] {
      parallel_r = mise_protocol(model, BenchMethod::ww_lmr, kernel, 250, 16,
                                 config, 7);
    });
    print_row("mise replications (R=16)", t_serial, t_parallel,
              max_abs_diff(serial_r.per_rep_ise, parallel_r.per_rep_ise));
  }
#endif

  return 0;
}
