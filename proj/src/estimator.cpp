#include "wwkde/estimator.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace wwkde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Kernel terms with d^2 / (2 v_max) beyond this threshold contribute less
// than e^-45 of their peak and are skipped in the hot loops.
constexpr double kExpCutoff = 45.0;

struct ScaledTerm {
  double coef;          // w / sqrt(2 pi v)
  double half_inv_var;  // 1 / (2 v)
};

// Flattened per-observation scaled kernels for fast repeated evaluation.
struct PrecompSum {
  std::vector<double> centers;
  std::vector<double> reach_sq;
  std::vector<std::uint32_t> first;  // term range per observation
  std::vector<ScaledTerm> terms;
  double inv_n = 0.0;

  double eval(double x) const {
    double acc = 0.0;
    const std::size_t n = centers.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double d = x - centers[k];
      const double d2 = d * d;
      if (d2 > reach_sq[k]) continue;
      const std::uint32_t end = first[k + 1];
      for (std::uint32_t t = first[k]; t < end; ++t)
        acc += terms[t].coef * std::exp(-d2 * terms[t].half_inv_var);
    }
    return acc * inv_n;
  }
};

void append_scaled(PrecompSum& out, const GaussianMixtureKernel& mixture,
                   double center) {
  out.centers.push_back(center);
  out.reach_sq.push_back(2.0 * kExpCutoff * mixture.max_variance());
  for (const auto& c : mixture.components())
    out.terms.push_back({c.weight / std::sqrt(kTwoPi * c.variance),
                         0.5 / c.variance});
  out.first.push_back(static_cast<std::uint32_t>(out.terms.size()));
}

PrecompSum build_ww(const Sample& sample, const GaussianMixtureKernel& kernel,
                    const BandwidthSchedule& schedule) {
  PrecompSum out;
  const std::size_t n = sample.size();
  out.centers.reserve(n);
  out.reach_sq.reserve(n);
  out.first.reserve(n + 1);
  out.first.push_back(0);
  for (std::size_t k = 0; k < n; ++k)
    append_scaled(out, kernel.scaled(schedule.at(k + 1)), sample.observations[k]);
  out.inv_n = 1.0 / static_cast<double>(n);
  return out;
}

PrecompSum build_convolved(const Sample& sample,
                           const GaussianMixtureKernel& kernel,
                           const BandwidthSchedule& schedule_a,
                           const BandwidthSchedule& schedule_b) {
  PrecompSum out;
  const std::size_t n = sample.size();
  out.first.push_back(0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto mixture = kernel.scaled(schedule_b.at(k + 1))
                             .convolved_with(kernel.scaled(schedule_a.at(k + 1)));
    append_scaled(out, mixture, sample.observations[k]);
  }
  out.inv_n = 1.0 / static_cast<double>(n);
  return out;
}

void require_sample(const Sample& sample) {
  if (sample.empty()) throw std::invalid_argument("estimator: sample must be non-empty");
  for (double x : sample.observations)
    if (!std::isfinite(x))
      throw std::invalid_argument("estimator: observations must be finite");
}

std::vector<double> eval_parallel(const PrecompSum& pre, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  const auto count = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) out[i] = pre.eval(xs[i]);
  return out;
}

std::vector<double> eval_serial(const PrecompSum& pre, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = pre.eval(xs[i]);
  return out;
}

}  // namespace

EvaluationGrid EvaluationGrid::linspace(double a, double b, std::size_t count) {
  if (count < 2) throw std::invalid_argument("evaluation grid needs at least 2 points");
  if (!(a < b)) throw std::invalid_argument("evaluation grid requires a < b");
  EvaluationGrid g;
  g.spacing_ = (b - a) / static_cast<double>(count - 1);
  g.lo_ = a;
  g.hi_ = b;
  g.points_.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    g.points_[i] = a + static_cast<double>(i) * g.spacing_;
  return g;
}

EvaluationGrid EvaluationGrid::right_riemann(double a, double b, std::size_t count) {
  if (count < 2) throw std::invalid_argument("evaluation grid needs at least 2 points");
  if (!(a < b)) throw std::invalid_argument("evaluation grid requires a < b");
  EvaluationGrid g;
  g.spacing_ = (b - a) / static_cast<double>(count);
  g.lo_ = a;
  g.hi_ = b;
  g.points_.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    g.points_[i] = a + static_cast<double>(i + 1) * g.spacing_;
  return g;
}

EvaluationGrid EvaluationGrid::from_points(std::vector<double> points) {
  if (points.size() < 2)
    throw std::invalid_argument("evaluation grid needs at least 2 points");
  const double spacing = points[1] - points[0];
  if (!(spacing > 0.0)) throw std::invalid_argument("evaluation grid must be increasing");
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double step = points[i] - points[i - 1];
    if (std::abs(step - spacing) > 1e-12 * std::abs(spacing))
      throw std::invalid_argument("evaluation grid must be equispaced");
  }
  EvaluationGrid g;
  g.spacing_ = spacing;
  g.lo_ = points.front();
  g.hi_ = points.back();
  g.points_ = std::move(points);
  return g;
}

ExtendedGrid EvaluationGrid::extended(double pad) const {
  if (!(pad >= 0.0)) throw std::invalid_argument("grid pad must be >= 0");
  const auto extra = static_cast<std::size_t>(std::ceil(pad / spacing_)) + 1;
  EvaluationGrid g;
  g.spacing_ = spacing_;
  g.points_.reserve(points_.size() + 2 * extra);
  for (std::size_t i = extra; i > 0; --i)
    g.points_.push_back(points_.front() - static_cast<double>(i) * spacing_);
  // base points are preserved bitwise so sliced rows line up exactly
  g.points_.insert(g.points_.end(), points_.begin(), points_.end());
  for (std::size_t i = 1; i <= extra; ++i)
    g.points_.push_back(points_.back() + static_cast<double>(i) * spacing_);
  g.lo_ = g.points_.front();
  g.hi_ = g.points_.back();
  return ExtendedGrid{std::move(g), extra, points_.size()};
}

std::vector<double> ww_evaluate(const Sample& sample,
                                const GaussianMixtureKernel& kernel,
                                const BandwidthSchedule& schedule,
                                std::span<const double> xs) {
  require_sample(sample);
  return eval_parallel(build_ww(sample, kernel, schedule), xs);
}

std::vector<double> ww_evaluate_serial(const Sample& sample,
                                       const GaussianMixtureKernel& kernel,
                                       const BandwidthSchedule& schedule,
                                       std::span<const double> xs) {
  require_sample(sample);
  return eval_serial(build_ww(sample, kernel, schedule), xs);
}

double ww_evaluate_at(const Sample& sample, const GaussianMixtureKernel& kernel,
                      const BandwidthSchedule& schedule, double x) {
  require_sample(sample);
  return build_ww(sample, kernel, schedule).eval(x);
}

std::vector<double> gl_convolved_evaluate(const Sample& sample,
                                          const GaussianMixtureKernel& kernel,
                                          const BandwidthSchedule& schedule_a,
                                          const BandwidthSchedule& schedule_b,
                                          std::span<const double> xs) {
  require_sample(sample);
  return eval_parallel(build_convolved(sample, kernel, schedule_a, schedule_b), xs);
}

std::vector<double> gl_convolved_evaluate(const Sample& sample,
                                          const GaussianMixtureKernel& kernel,
                                          double gamma, double gamma_prime,
                                          std::span<const double> xs) {
  return gl_convolved_evaluate(sample, kernel, BandwidthSchedule::power(gamma),
                               BandwidthSchedule::power(gamma_prime), xs);
}

MixtureSum ww_mixture(const Sample& sample, const GaussianMixtureKernel& kernel,
                      const BandwidthSchedule& schedule) {
  require_sample(sample);
  MixtureSum out;
  out.centers = sample.observations;
  out.mixtures.reserve(sample.size());
  for (std::size_t k = 0; k < sample.size(); ++k)
    out.mixtures.push_back(kernel.scaled(schedule.at(k + 1)));
  return out;
}

MixtureSum gl_convolved_mixture(const Sample& sample,
                                const GaussianMixtureKernel& kernel,
                                double gamma, double gamma_prime) {
  require_sample(sample);
  const auto sa = BandwidthSchedule::power(gamma);
  const auto sb = BandwidthSchedule::power(gamma_prime);
  MixtureSum out;
  out.centers = sample.observations;
  out.mixtures.reserve(sample.size());
  for (std::size_t k = 0; k < sample.size(); ++k)
    out.mixtures.push_back(
        kernel.scaled(sb.at(k + 1)).convolved_with(kernel.scaled(sa.at(k + 1))));
  return out;
}

double inner_product(const MixtureSum& a, const MixtureSum& b) {
  if (a.centers.empty() || b.centers.empty())
    throw std::invalid_argument("mixture sum must be non-empty");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.centers.size(); ++k)
    for (std::size_t l = 0; l < b.centers.size(); ++l)
      sum += inner_product(a.mixtures[k], b.mixtures[l],
                           a.centers[k] - b.centers[l]);
  return sum / (static_cast<double>(a.centers.size()) *
                static_cast<double>(b.centers.size()));
}

double l2_distance_sq_exact(const MixtureSum& a, const MixtureSum& b) {
  return inner_product(a, a) - 2.0 * inner_product(a, b) + inner_product(b, b);
}

double l2_distance_sq_grid(std::span<const double> fa,
                           std::span<const double> fb, double spacing) {
  if (fa.size() != fb.size())
    throw std::invalid_argument("l2 distance: grids must match");
  if (!(spacing > 0.0)) throw std::invalid_argument("l2 distance: spacing must be > 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const double d = fa[i] - fb[i];
    sum += d * d;
  }
  return sum * spacing;
}

double l2_distance_sq(const WwSpec& a, const WwSpec& b, L2Method method,
                      const EvaluationGrid* shared_grid) {
  switch (method) {
    case L2Method::grid: {
      if (shared_grid == nullptr)
        throw std::invalid_argument("l2 distance: grid method needs a shared grid");
      const auto fa = ww_evaluate(a.sample, a.kernel, a.schedule, shared_grid->points());
      const auto fb = ww_evaluate(b.sample, b.kernel, b.schedule, shared_grid->points());
      return l2_distance_sq_grid(fa, fb, shared_grid->spacing());
    }
    case L2Method::exact:
      return l2_distance_sq_exact(ww_mixture(a.sample, a.kernel, a.schedule),
                                  ww_mixture(b.sample, b.kernel, b.schedule));
  }
  throw std::invalid_argument("l2 distance: unknown method");
}

EstimatorMatrix::EstimatorMatrix(GaussianMixtureKernel kernel,
                                 GammaGrid gamma_grid, EvaluationGrid eval_grid)
    : kernel_(std::move(kernel)),
      gamma_grid_(std::move(gamma_grid)),
      eval_grid_(std::move(eval_grid)),
      values_(gamma_grid_.size() * eval_grid_.size(), 0.0),
      penalty_sums_(gamma_grid_.size(), 0.0) {}

void EstimatorMatrix::check_value(double x) const {
  if (!std::isfinite(x))
    throw std::invalid_argument("estimator matrix: observation must be finite");
}

void EstimatorMatrix::absorb_row(std::size_t j, double x, double hj, double h_max) {
  // Allocation-free: scaled coefficients live on the stack so concurrent row
  // updates never touch the allocator.
  constexpr std::size_t kMaxComponents = 16;
  const auto& comps = kernel_.components();
  const std::size_t m = comps.size();
  double coef_stack[kMaxComponents];
  double half_inv_var_stack[kMaxComponents];
  std::vector<double> spill;
  double* coef = coef_stack;
  double* half_inv_var = half_inv_var_stack;
  if (m > kMaxComponents) {
    spill.resize(2 * m);
    coef = spill.data();
    half_inv_var = spill.data() + m;
  }
  const double h2 = hj * hj;
  for (std::size_t c = 0; c < m; ++c) {
    const double v = comps[c].variance * h2;
    coef[c] = comps[c].weight / std::sqrt(kTwoPi * v);
    half_inv_var[c] = 0.5 / v;
  }
  const double reach_sq = 2.0 * kExpCutoff * kernel_.max_variance() * h2;
  const double keep = static_cast<double>(n_) / static_cast<double>(n_ + 1);
  const double add = 1.0 / static_cast<double>(n_ + 1);
  const auto points = eval_grid_.points();
  double* row_data = values_.data() + j * eval_grid_.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = x - points[i];
    const double d2 = d * d;
    double value = 0.0;
    if (d2 <= reach_sq) {
      for (std::size_t c = 0; c < m; ++c)
        value += coef[c] * std::exp(-d2 * half_inv_var[c]);
    }
    row_data[i] = keep * row_data[i] + add * value;
  }
  const double h_max2 = h_max * h_max;
  double pen = 0.0;
  for (const auto& a : comps)
    for (const auto& b : comps)
      pen += a.weight * b.weight *
             centered_gaussian(0.0, a.variance * h_max2 + b.variance * h2);
  penalty_sums_[j] += pen;
}

void EstimatorMatrix::absorb(double x) {
  // Below this many cells the per-update OpenMP region costs more than the
  // row work itself.
  constexpr std::size_t kParallelThreshold = 1 << 15;
  if (gamma_grid_.size() * eval_grid_.size() < kParallelThreshold) {
    absorb_serial(x);
    return;
  }
  check_value(x);
  const std::size_t k = n_ + 1;
  const double h_max = std::pow(static_cast<double>(k), -gamma_grid_.values.back());
  const auto rows = static_cast<std::ptrdiff_t>(gamma_grid_.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < rows; ++j) {
    const double hj = std::pow(static_cast<double>(k), -gamma_grid_.values[j]);
    absorb_row(static_cast<std::size_t>(j), x, hj, h_max);
  }
  ++n_;
  cell_updates_ += static_cast<std::uint64_t>(gamma_grid_.size()) * eval_grid_.size();
}

void EstimatorMatrix::absorb_serial(double x) {
  check_value(x);
  const std::size_t k = n_ + 1;
  const double h_max = std::pow(static_cast<double>(k), -gamma_grid_.values.back());
  for (std::size_t j = 0; j < gamma_grid_.size(); ++j) {
    const double hj = std::pow(static_cast<double>(k), -gamma_grid_.values[j]);
    absorb_row(j, x, hj, h_max);
  }
  ++n_;
  cell_updates_ += static_cast<std::uint64_t>(gamma_grid_.size()) * eval_grid_.size();
}

std::span<const double> EstimatorMatrix::row(std::size_t j) const {
  if (j >= gamma_grid_.size())
    throw std::out_of_range("estimator matrix: row index out of range");
  return {values_.data() + j * eval_grid_.size(), eval_grid_.size()};
}

}  // namespace wwkde
