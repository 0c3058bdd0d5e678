#include "wwkde/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wwkde {

namespace {

constexpr double kPadSigmas = 3.0;

// The comparison criterion applies twice the minimal penalty, the usual
// slope-heuristic calibration for penalized comparison rules; the tabulated
// risks of the method are reproduced with this weight and not with weight 1.
constexpr double kPenaltyWeight = 2.0;

struct ArgminState {
  std::size_t index = 0;
  double best = 0.0;
  bool tie = false;
};

ArgminState argmin(const std::vector<CandidateRecord>& records) {
  ArgminState s;
  s.best = records.front().criterion;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].criterion < s.best) {
      s.best = records[i].criterion;
      s.index = i;
    } else if (records[i].criterion == s.best) {
      s.tie = true;
    }
  }
  return s;
}

void require_inputs(const Sample& sample, const GammaGrid& grid) {
  if (sample.empty()) throw std::invalid_argument("selection: sample must be non-empty");
  if (grid.values.empty()) throw std::invalid_argument("selection: grid must be non-empty");
}

// Builds all candidate rows over the extended grid, candidate-major.
std::vector<double> candidate_rows(const Sample& sample,
                                   const GaussianMixtureKernel& kernel,
                                   const std::vector<BandwidthSchedule>& schedules,
                                   std::span<const double> points) {
  const std::size_t m = schedules.size();
  std::vector<double> rows(m * points.size());
  const auto count = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    const auto row = ww_evaluate_serial(sample, kernel, schedules[j], points);
    std::copy(row.begin(), row.end(), rows.begin() + j * points.size());
  }
  return rows;
}

double assumption_ratio(const GaussianMixtureKernel& kernel, std::size_t n,
                        double smallest_h) {
  const auto constants = norms(kernel);
  return constants.sup_norm * constants.l1_norm /
         (static_cast<double>(n) * smallest_h);
}

LmrSelection lmr_core(const Sample& sample, const GaussianMixtureKernel& kernel,
                      const GammaGrid& grid, const EvaluationGrid& eval_grid,
                      bool fixed_h) {
  require_inputs(sample, grid);
  const std::size_t n = sample.size();
  const std::size_t m = grid.size();

  std::vector<BandwidthSchedule> schedules;
  schedules.reserve(m);
  for (double v : grid.values)
    schedules.push_back(fixed_h ? BandwidthSchedule::constant(v)
                                : BandwidthSchedule::power(v));
  // Overfitting reference: smallest bandwidths, i.e. largest gamma for the
  // power-law schedules and smallest h for the constant ones.
  const std::size_t ref = fixed_h ? 0 : m - 1;

  const auto ext = eval_grid.extended(kPadSigmas * kernel.max_sigma());
  const auto points = ext.grid.points();
  const auto rows = candidate_rows(sample, kernel, schedules, points);
  const double* ref_row = rows.data() + ref * points.size();

  SelectionResult result;
  result.method = SelectionResult::Method::lmr;
  result.candidates_are_bandwidths = fixed_h;
  result.per_candidate.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double* row = rows.data() + j * points.size();
    double dist = 0.0;
    if (j != ref) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = row[i] - ref_row[i];
        dist += d * d;
      }
      dist *= ext.grid.spacing();
    }
    const double pen =
        kPenaltyWeight *
        (fixed_h ? lmr_penalty_fixed(kernel, n, grid.values[j], grid.values[ref])
                 : lmr_penalty(kernel, n, grid.values[j], grid.values[ref]));
    result.per_candidate[j] = {grid.values[j], dist + pen, pen, dist};
  }

  const auto chosen = argmin(result.per_candidate);
  result.chosen_gamma = grid.values[chosen.index];
  result.tie_broken = chosen.tie;
  const double smallest_h = fixed_h ? grid.values.front()
                                    : schedules[ref].at(n);
  result.assumption_value = assumption_ratio(kernel, n, smallest_h);
  result.assumption_ok = result.assumption_value <= 1.0;

  LmrSelection out;
  out.result = std::move(result);
  out.chosen_index = chosen.index;
  out.chosen_row_base.resize(ext.base_count);
  out.rows_base.resize(m * ext.base_count);
  for (std::size_t j = 0; j < m; ++j) {
    const double* row = rows.data() + j * points.size() + ext.base_offset;
    std::copy(row, row + ext.base_count, out.rows_base.begin() + j * ext.base_count);
  }
  const double* chosen_row = out.rows_base.data() + chosen.index * ext.base_count;
  std::copy(chosen_row, chosen_row + ext.base_count, out.chosen_row_base.begin());
  return out;
}

}  // namespace

double lmr_penalty(const GaussianMixtureKernel& kernel, std::size_t n,
                   double gamma, double gamma_max) {
  if (n == 0) throw std::invalid_argument("lmr_penalty: n must be >= 1");
  if (gamma > gamma_max)
    throw std::invalid_argument("lmr_penalty: gamma must not exceed gamma_max");
  double sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double h_ref = std::pow(static_cast<double>(k), -gamma_max);
    const double h = std::pow(static_cast<double>(k), -gamma);
    sum += inner_product(kernel.scaled(h_ref), kernel.scaled(h), 0.0);
  }
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n));
}

double lmr_penalty_fixed(const GaussianMixtureKernel& kernel, std::size_t n,
                         double h, double h_ref) {
  if (n == 0) throw std::invalid_argument("lmr_penalty: n must be >= 1");
  if (h < h_ref)
    throw std::invalid_argument("lmr_penalty: h must not undercut the reference");
  return 2.0 * inner_product(kernel.scaled(h_ref), kernel.scaled(h), 0.0) /
         static_cast<double>(n);
}

SelectionResult lmr_select(const Sample& sample,
                           const GaussianMixtureKernel& kernel,
                           const GammaGrid& grid,
                           const EvaluationGrid& eval_grid) {
  return lmr_core(sample, kernel, grid, eval_grid, false).result;
}

SelectionResult lmr_select_fixed_h(const Sample& sample,
                                   const GaussianMixtureKernel& kernel,
                                   const GammaGrid& h_grid,
                                   const EvaluationGrid& eval_grid) {
  return lmr_core(sample, kernel, h_grid, eval_grid, true).result;
}

LmrSelection lmr_select_detailed(const Sample& sample,
                                 const GaussianMixtureKernel& kernel,
                                 const GammaGrid& grid,
                                 const EvaluationGrid& eval_grid) {
  return lmr_core(sample, kernel, grid, eval_grid, false);
}

LmrSelection lmr_select_fixed_h_detailed(const Sample& sample,
                                         const GaussianMixtureKernel& kernel,
                                         const GammaGrid& h_grid,
                                         const EvaluationGrid& eval_grid) {
  return lmr_core(sample, kernel, h_grid, eval_grid, true);
}

double gl_vn(const GaussianMixtureKernel& kernel,
             const BandwidthSchedule& schedule, std::size_t n, double upsilon) {
  if (!(upsilon > 0.0)) throw std::invalid_argument("gl_vn: upsilon must be > 0");
  if (n == 0) throw std::invalid_argument("gl_vn: n must be >= 1");
  const auto constants = norms(kernel);
  double inv_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) inv_sum += 1.0 / schedule.at(k);
  return upsilon * constants.l2_norm_sq * constants.l1_norm * constants.l1_norm *
         inv_sum / (static_cast<double>(n) * static_cast<double>(n));
}

SelectionResult gl_select(const Sample& sample,
                          const GaussianMixtureKernel& kernel,
                          const GammaGrid& grid, double upsilon,
                          const EvaluationGrid& eval_grid) {
  require_inputs(sample, grid);
  if (!(upsilon > 0.0)) throw std::invalid_argument("gl_select: upsilon must be > 0");
  const std::size_t n = sample.size();
  const std::size_t m = grid.size();

  std::vector<BandwidthSchedule> schedules;
  schedules.reserve(m);
  for (double v : grid.values) schedules.push_back(BandwidthSchedule::power(v));

  std::vector<double> vn(m);
  for (std::size_t j = 0; j < m; ++j)
    vn[j] = gl_vn(kernel, schedules[j], n, upsilon);

  // Convolved candidates have up to twice the kernel variance.
  const auto ext = eval_grid.extended(kPadSigmas * std::numbers::sqrt2 *
                                      kernel.max_sigma());
  const auto points = ext.grid.points();
  const auto plain = candidate_rows(sample, kernel, schedules, points);

  SelectionResult result;
  result.method = SelectionResult::Method::gl;
  result.per_candidate.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    double an = 0.0;
    const auto count = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic) reduction(max : an)
    for (std::ptrdiff_t jp = 0; jp < count; ++jp) {
      const auto convolved = gl_convolved_evaluate(
          sample, kernel, schedules[j], schedules[jp], points);
      const double* plain_row = plain.data() + jp * points.size();
      double dist = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = plain_row[i] - convolved[i];
        dist += d * d;
      }
      dist *= ext.grid.spacing();
      const double excess = dist - vn[jp];
      if (excess > an) an = excess;
    }
    an = std::max(an, 0.0);
    result.per_candidate[j] = {grid.values[j], an + vn[j], vn[j], an};
  }

  const auto chosen = argmin(result.per_candidate);
  result.chosen_gamma = grid.values[chosen.index];
  result.tie_broken = chosen.tie;
  return result;
}

SelectionResult lmr_select_from_matrix(const EstimatorMatrix& matrix) {
  if (matrix.count() == 0)
    throw std::invalid_argument("matrix selection requires at least one observation");
  const std::size_t m = matrix.candidate_count();
  const std::size_t points = matrix.point_count();
  const double n = static_cast<double>(matrix.count());
  const auto ref_row = matrix.row(m - 1);

  SelectionResult result;
  result.method = SelectionResult::Method::lmr;
  result.per_candidate.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = matrix.row(j);
    double dist = 0.0;
    if (j != m - 1) {
      for (std::size_t i = 0; i < points; ++i) {
        const double d = row[i] - ref_row[i];
        dist += d * d;
      }
      dist *= matrix.eval_grid().spacing();
    }
    const double pen = kPenaltyWeight * 2.0 * matrix.penalty_sum(j) / (n * n);
    result.per_candidate[j] = {matrix.gamma_grid().values[j], dist + pen, pen, dist};
  }

  const auto chosen = argmin(result.per_candidate);
  result.chosen_gamma = matrix.gamma_grid().values[chosen.index];
  result.tie_broken = chosen.tie;
  // No assumption ratio here: this runs once per streamed observation and
  // must stay free of the numerical norm computations.
  return result;
}

}  // namespace wwkde
