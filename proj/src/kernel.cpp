#include "wwkde/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "wwkde/quadrature.hpp"

namespace wwkde {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Numerical norms are taken over [-R, R] with R = kNormRangeSigmas * max sigma;
// the truncated tail mass is far below the 1e-8 tolerance.
constexpr double kNormRangeSigmas = 20.0;
}  // namespace

double centered_gaussian(double x, double variance) {
  return std::exp(-0.5 * x * x / variance) / std::sqrt(kTwoPi * variance);
}

GaussianMixtureKernel::GaussianMixtureKernel(std::vector<KernelComponent> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw std::invalid_argument("kernel: component list must be non-empty");
  for (const auto& c : components_) {
    if (!(c.variance > 0.0) || !std::isfinite(c.variance) || !std::isfinite(c.weight))
      throw std::invalid_argument("kernel: variances must be positive and finite");
  }
  std::sort(components_.begin(), components_.end(),
            [](const KernelComponent& a, const KernelComponent& b) {
              return a.variance < b.variance;
            });
  std::vector<KernelComponent> merged;
  merged.reserve(components_.size());
  for (const auto& c : components_) {
    if (!merged.empty() && merged.back().variance == c.variance)
      merged.back().weight += c.weight;
    else
      merged.push_back(c);
  }
  std::erase_if(merged, [](const KernelComponent& c) { return c.weight == 0.0; });
  if (merged.empty()) merged.push_back({0.0, components_.front().variance});
  components_ = std::move(merged);
}

GaussianMixtureKernel GaussianMixtureKernel::standard(int order) {
  switch (order) {
    case 1:
      return GaussianMixtureKernel({{1.0, 1.0}});
    case 3:
      return GaussianMixtureKernel({{2.0, 1.0}, {-1.0, 2.0}});
    case 5:
      return GaussianMixtureKernel({{3.0, 1.0}, {-3.0, 2.0}, {1.0, 3.0}});
    case 7:
      return GaussianMixtureKernel({{4.0, 1.0}, {-6.0, 2.0}, {4.0, 3.0}, {-1.0, 4.0}});
    default:
      throw std::invalid_argument("kernel order must be one of 1, 3, 5, 7");
  }
}

GaussianMixtureKernel GaussianMixtureKernel::from_name(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "K1") return standard(1);
  if (upper == "K3") return standard(3);
  if (upper == "K5") return standard(5);
  if (upper == "K7") return standard(7);
  throw std::invalid_argument("unknown kernel name: " + std::string(name) +
                              " (expected K1, K3, K5 or K7)");
}

GaussianMixtureKernel GaussianMixtureKernel::scaled(double bandwidth) const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw std::invalid_argument("kernel: bandwidth must be positive and finite");
  std::vector<KernelComponent> comps = components_;
  const double h2 = bandwidth * bandwidth;
  for (auto& c : comps) c.variance *= h2;
  return GaussianMixtureKernel(std::move(comps));
}

GaussianMixtureKernel GaussianMixtureKernel::convolved_with(
    const GaussianMixtureKernel& other) const {
  std::vector<KernelComponent> comps;
  comps.reserve(components_.size() * other.components_.size());
  for (const auto& a : components_)
    for (const auto& b : other.components_)
      comps.push_back({a.weight * b.weight, a.variance + b.variance});
  return GaussianMixtureKernel(std::move(comps));
}

double GaussianMixtureKernel::operator()(double x) const {
  double sum = 0.0;
  for (const auto& c : components_) sum += c.weight * centered_gaussian(x, c.variance);
  return sum;
}

double GaussianMixtureKernel::moment(int i) const {
  if (i < 0) throw std::invalid_argument("kernel moment index must be >= 0");
  if (i % 2 != 0) return 0.0;
  const int m = i / 2;
  double double_factorial = 1.0;  // (2m - 1)!!
  for (int j = 3; j <= 2 * m - 1; j += 2) double_factorial *= j;
  double sum = 0.0;
  for (const auto& c : components_)
    sum += c.weight * double_factorial * std::pow(c.variance, m);
  return sum;
}

double GaussianMixtureKernel::total_weight() const {
  double sum = 0.0;
  for (const auto& c : components_) sum += c.weight;
  return sum;
}

double GaussianMixtureKernel::max_variance() const {
  return components_.back().variance;
}

double GaussianMixtureKernel::max_sigma() const {
  return std::sqrt(max_variance());
}

bool GaussianMixtureKernel::operator==(const GaussianMixtureKernel& other) const {
  if (components_.size() != other.components_.size()) return false;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].weight != other.components_[i].weight ||
        components_[i].variance != other.components_[i].variance)
      return false;
  }
  return true;
}

double inner_product(const GaussianMixtureKernel& ka,
                     const GaussianMixtureKernel& kb, double offset) {
  double sum = 0.0;
  for (const auto& a : ka.components())
    for (const auto& b : kb.components())
      sum += a.weight * b.weight * centered_gaussian(offset, a.variance + b.variance);
  return sum;
}

namespace {

int detect_order(const GaussianMixtureKernel& kernel) {
  constexpr int kMaxProbe = 32;
  for (int i = 1; i <= kMaxProbe; ++i) {
    if (std::abs(kernel.moment(i)) > 1e-9) return i - 1;
  }
  return kMaxProbe;
}

double sup_norm(const GaussianMixtureKernel& kernel, double range) {
  const int scan_points = 20001;
  const double step = 2.0 * range / (scan_points - 1);
  double best_x = 0.0;
  double best = -1.0;
  for (int i = 0; i < scan_points; ++i) {
    const double x = -range + i * step;
    const double v = std::abs(kernel(x));
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  // |K| is smooth and locally unimodal around the scan winner; ternary search
  // sharpens the maximum to machine precision.
  double lo = best_x - step, hi = best_x + step;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (std::abs(kernel(m1)) < std::abs(kernel(m2)))
      lo = m1;
    else
      hi = m2;
  }
  return std::abs(kernel(0.5 * (lo + hi)));
}

}  // namespace

KernelConstants norms(const GaussianMixtureKernel& kernel) {
  // The L1/sup norms cost a quadrature and a scan; selections ask for them
  // once per replication, so memoize by canonical component list.
  using Key = std::vector<std::pair<double, double>>;
  static std::mutex cache_mutex;
  static std::map<Key, KernelConstants> cache;

  Key key;
  key.reserve(kernel.components().size());
  for (const auto& c : kernel.components()) key.emplace_back(c.weight, c.variance);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  KernelConstants out{};
  out.l2_norm_sq = inner_product(kernel, kernel, 0.0);
  const double range = kNormRangeSigmas * kernel.max_sigma();
  out.l1_norm = integrate([&](double x) { return std::abs(kernel(x)); }, -range,
                          range, 1e-9);
  const double mass = kernel.total_weight();
  if (out.l1_norm < std::abs(mass) - 1e-8)
    throw std::runtime_error("kernel norms: L1 quadrature below |total mass|, got " +
                             std::to_string(out.l1_norm));
  out.sup_norm = sup_norm(kernel, range);
  out.order = detect_order(kernel);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    cache.emplace(std::move(key), out);
  }
  return out;
}

double absolute_moment(const GaussianMixtureKernel& kernel, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("absolute_moment: beta must be >= 0");
  const double range = kNormRangeSigmas * kernel.max_sigma();
  auto f = [&](double x) { return std::pow(std::abs(x), beta) * std::abs(kernel(x)); };
  // Split at 0: |x|^beta has a cusp there for non-integer beta.
  return integrate(f, -range, 0.0, 5e-10) + integrate(f, 0.0, range, 5e-10);
}

}  // namespace wwkde
