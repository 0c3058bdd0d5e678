#pragma once

#include <string_view>
#include <vector>

namespace wwkde {

// Density of a centered Gaussian with the given variance.
double centered_gaussian(double x, double variance);

// One term of a signed mixture: weight * N(0, variance).
struct KernelComponent {
  double weight;
  double variance;
};

// Signed mixture of centered Gaussian densities. The family is closed under
// bandwidth scaling and convolution, so every L2 quantity used by the
// selection criteria has a closed form. Canonical representation: components
// sorted by variance, equal variances merged, exact-zero weights dropped.
class GaussianMixtureKernel {
 public:
  explicit GaussianMixtureKernel(std::vector<KernelComponent> components);

  // The shipped kernels: order 1 is the plain Gaussian, orders 3/5/7 are the
  // signed combinations of N(0,1..4) whose moments vanish up to the order.
  static GaussianMixtureKernel standard(int order);

  // Parses "K1", "K3", "K5", "K7" (case-insensitive).
  static GaussianMixtureKernel from_name(std::string_view name);

  // K_h(x) = (1/h) K(x/h); component variances become v * h^2.
  GaussianMixtureKernel scaled(double bandwidth) const;

  // Pairwise convolution: variances add, weights multiply.
  GaussianMixtureKernel convolved_with(const GaussianMixtureKernel& other) const;

  double operator()(double x) const;

  // Exact i-th moment; odd moments vanish by symmetry, even moments follow
  // the double-factorial rule for Gaussians.
  double moment(int i) const;

  const std::vector<KernelComponent>& components() const { return components_; }
  double total_weight() const;
  double max_variance() const;
  double max_sigma() const;

  bool operator==(const GaussianMixtureKernel& other) const;

 private:
  std::vector<KernelComponent> components_;
};

// <Ka(a - .), Kb(b - .)> with offset = a - b. Exact: each component pair
// contributes w_i * w_j * N(0, v_i + v_j) evaluated at the offset.
double inner_product(const GaussianMixtureKernel& ka,
                     const GaussianMixtureKernel& kb, double offset = 0.0);

struct KernelConstants {
  double l2_norm_sq;
  double l1_norm;
  double sup_norm;
  int order;
};

// L2 norm squared is analytic; L1 and sup norms are computed numerically
// since signed mixtures have no closed form for them. The order is the
// longest run of vanishing moments starting at 1.
KernelConstants norms(const GaussianMixtureKernel& kernel);

// \int |z|^beta |K(z)| dz by quadrature.
double absolute_moment(const GaussianMixtureKernel& kernel, double beta);

}  // namespace wwkde
