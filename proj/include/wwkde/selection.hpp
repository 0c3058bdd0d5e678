#pragma once

#include <cstddef>
#include <vector>

#include "wwkde/bandwidth.hpp"
#include "wwkde/estimator.hpp"
#include "wwkde/kernel.hpp"

namespace wwkde {

// Per-candidate diagnostics. For the comparison (LMR) rule, penalty_or_vn is
// the explicit penalty and distance_term the squared distance to the
// overfitting reference. For Goldenshluger-Lepski, penalty_or_vn is V_n and
// distance_term is A_n.
struct CandidateRecord {
  double gamma;
  double criterion;
  double penalty_or_vn;
  double distance_term;
};

struct SelectionResult {
  enum class Method { lmr, gl };

  double chosen_gamma = 0.0;
  std::vector<CandidateRecord> per_candidate;
  Method method = Method::lmr;
  bool tie_broken = false;
  // True for the fixed-bandwidth variant, where candidates are h values.
  bool candidates_are_bandwidths = false;
  // Sanity check ||K||_inf ||K||_1 / (n h_n(gamma_max)) <= 1, reported but
  // not enforced; only filled by the LMR selectors.
  bool assumption_ok = true;
  double assumption_value = 0.0;
};

// Explicit penalty (2/n^2) sum_k <K_{h_k(gamma_max)}, K_{h_k(gamma)}>.
double lmr_penalty(const GaussianMixtureKernel& kernel, std::size_t n,
                   double gamma, double gamma_max);

// Same penalty for constant schedules: (2/n) <K_{h_ref}, K_h>.
double lmr_penalty_fixed(const GaussianMixtureKernel& kernel, std::size_t n,
                         double h, double h_ref);

// Selects gamma minimizing
//   ||f_gamma - f_gamma_max||_2^2 + 2 pen(gamma)
// over the candidate grid (twice the minimal penalty, the usual
// slope-heuristic calibration). Distances are Riemann sums over the
// evaluation grid extended by three kernel standard deviations. Returns the
// full per-candidate table with the applied penalty; ties break toward the
// smallest candidate.
SelectionResult lmr_select(const Sample& sample,
                           const GaussianMixtureKernel& kernel,
                           const GammaGrid& grid,
                           const EvaluationGrid& eval_grid);

// Fixed-bandwidth variant: candidates are constant bandwidths and the
// overfitting reference is the smallest one.
SelectionResult lmr_select_fixed_h(const Sample& sample,
                                   const GaussianMixtureKernel& kernel,
                                   const GammaGrid& h_grid,
                                   const EvaluationGrid& eval_grid);

// Variance proxy V_n(gamma) = upsilon ||K||_2^2 ||K||_1^2 / (n h_n(gamma)),
// with h_n the harmonic-mean aggregate of the schedule.
double gl_vn(const GaussianMixtureKernel& kernel,
             const BandwidthSchedule& schedule, std::size_t n, double upsilon);

// Goldenshluger-Lepski rule: minimizes A_n(gamma) + V_n(gamma) where
// A_n(gamma) = max over gamma' of
//   (||f_{gamma'} - f_{gamma,gamma'}||_2^2 - V_n(gamma'))_+ .
SelectionResult gl_select(const Sample& sample,
                          const GaussianMixtureKernel& kernel,
                          const GammaGrid& grid, double upsilon,
                          const EvaluationGrid& eval_grid);

// Selection straight from a maintained estimator matrix: distances over the
// matrix's own grid, penalty from the accumulated per-row inner-product sums.
// Cost O(M*K) regardless of how many observations the matrix absorbed.
SelectionResult lmr_select_from_matrix(const EstimatorMatrix& matrix);

// Variant of lmr_select that also returns the selected estimate restricted to
// the caller's (unextended) grid, plus the candidate index.
struct LmrSelection {
  SelectionResult result;
  std::size_t chosen_index = 0;
  std::vector<double> chosen_row_base;
  // All candidate rows on the base grid, row-major (candidate count x base
  // grid size); kept so callers can compare against every candidate.
  std::vector<double> rows_base;
};
LmrSelection lmr_select_detailed(const Sample& sample,
                                 const GaussianMixtureKernel& kernel,
                                 const GammaGrid& grid,
                                 const EvaluationGrid& eval_grid);
LmrSelection lmr_select_fixed_h_detailed(const Sample& sample,
                                         const GaussianMixtureKernel& kernel,
                                         const GammaGrid& h_grid,
                                         const EvaluationGrid& eval_grid);

}  // namespace wwkde
