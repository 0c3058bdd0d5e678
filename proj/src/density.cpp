#include "wwkde/density.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wwkde/quadrature.hpp"

namespace wwkde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta);
}

// Regularized incomplete beta for integer parameters via the binomial tail.
double beta_cdf_int(double x, int a, int b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const int n = a + b - 1;
  double sum = 0.0;
  for (int j = a; j <= n; ++j) {
    double log_c = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    sum += std::exp(log_c + j * std::log(x) + (n - j) * std::log1p(-x));
  }
  return sum;
}

double gamma_pdf(double x, double shape, double scale) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return shape > 1.0 ? 0.0 : (shape == 1.0 ? 1.0 / scale : 0.0);
  return std::exp((shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) -
                  shape * std::log(scale));
}

// Lower incomplete gamma ratio for integer shape.
double gamma_cdf_int(double x, int shape, double scale) {
  if (x <= 0.0) return 0.0;
  const double lambda = x / scale;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < shape; ++j) {
    term *= lambda / j;
    sum += term;
  }
  return 1.0 - std::exp(-lambda) * sum;
}

double laplace_pdf(double x) { return 0.5 * std::exp(-std::abs(x)); }

double laplace_cdf(double x) {
  return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
}

}  // namespace

Rng::Rng(const SeededStream& stream) {
  std::uint64_t state = stream.seed;
  state ^= 0xD1B54A32D192ED03ULL * (stream.stream_id + 1);
  splitmix64(state);
  engine_.seed(splitmix64(state));
}

double Rng::u01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = 1.0 - u01();  // in (0, 1]
  const double u2 = u01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double Rng::gamma_dist(double shape, double scale) {
  if (!(shape >= 1.0)) throw std::invalid_argument("gamma sampler requires shape >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = u01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

double Rng::beta_dist(double a, double b) {
  const double ga = gamma_dist(a, 1.0);
  const double gb = gamma_dist(b, 1.0);
  return ga / (ga + gb);
}

double Rng::laplace() {
  double r = u01();
  while (r == 0.0) r = u01();
  const double u = r - 0.5;
  return u >= 0.0 ? -std::log1p(-2.0 * u) : std::log1p(2.0 * u);
}

DensityModel::DensityModel(std::string name,
                           std::vector<DensityComponent> components,
                           std::pair<double, double> nominal_range)
    : name_(std::move(name)),
      components_(std::move(components)),
      nominal_range_(nominal_range) {
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("density weights must be positive");
    if (!(c.scale_a > 0.0)) throw std::invalid_argument("density scale must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("density weights must sum to 1");
  validate_mass();
}

void DensityModel::validate_mass() const {
  double mass = 0.0;
  for (const auto& c : components_) {
    double lo = 0.0, hi = 0.0;
    switch (c.family) {
      case Family::normal:
        lo = -12.0;
        hi = 12.0;
        break;
      case Family::beta:
        lo = 0.0;
        hi = 1.0;
        break;
      case Family::gamma:
        lo = 0.0;
        hi = c.p1 * c.p2 + 40.0 * std::sqrt(c.p1) * c.p2;
        break;
      case Family::laplace:
        lo = -45.0;
        hi = 45.0;
        break;
    }
    auto pdf = [&](double y) {
      switch (c.family) {
        case Family::normal:
          return std_normal_pdf(y);
        case Family::beta:
          return beta_pdf(y, c.p1, c.p2);
        case Family::gamma:
          return gamma_pdf(y, c.p1, c.p2);
        case Family::laplace:
          return laplace_pdf(y);
      }
      return 0.0;
    };
    mass += c.weight * integrate(pdf, lo, hi, 1e-8);
  }
  if (std::abs(mass - 1.0) > 1e-6)
    throw std::logic_error("density " + name_ + " does not integrate to 1, got " +
                           std::to_string(mass));
}

double DensityModel::operator()(double x) const {
  double sum = 0.0;
  for (const auto& c : components_) {
    const double y = (x - c.shift_b) / c.scale_a;
    double base = 0.0;
    switch (c.family) {
      case Family::normal:
        base = std_normal_pdf(y);
        break;
      case Family::beta:
        base = beta_pdf(y, c.p1, c.p2);
        break;
      case Family::gamma:
        base = gamma_pdf(y, c.p1, c.p2);
        break;
      case Family::laplace:
        base = laplace_pdf(y);
        break;
    }
    sum += c.weight * base / c.scale_a;
  }
  return sum;
}

double DensityModel::cdf(double x) const {
  double sum = 0.0;
  for (const auto& c : components_) {
    const double y = (x - c.shift_b) / c.scale_a;
    double base = 0.0;
    switch (c.family) {
      case Family::normal:
        base = std_normal_cdf(y);
        break;
      case Family::beta:
        base = beta_cdf_int(y, static_cast<int>(c.p1), static_cast<int>(c.p2));
        break;
      case Family::gamma:
        base = gamma_cdf_int(y, static_cast<int>(c.p1), c.p2);
        break;
      case Family::laplace:
        base = laplace_cdf(y);
        break;
    }
    sum += c.weight * base;
  }
  return sum;
}

Sample DensityModel::sample(const SeededStream& stream, std::size_t n) const {
  if (n == 0) throw std::invalid_argument("sample size must be >= 1");
  for (const auto& c : components_) {
    if ((c.family == Family::beta || c.family == Family::gamma) && c.p1 < 1.0)
      throw std::logic_error("sampler requires shape >= 1");
  }
  Rng rng(stream);
  Sample out;
  out.observations.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pick = rng.u01();
    const DensityComponent* chosen = &components_.back();
    for (const auto& c : components_) {
      if (pick < c.weight) {
        chosen = &c;
        break;
      }
      pick -= c.weight;
    }
    double y = 0.0;
    switch (chosen->family) {
      case Family::normal:
        y = rng.normal();
        break;
      case Family::beta:
        y = rng.beta_dist(chosen->p1, chosen->p2);
        break;
      case Family::gamma:
        y = rng.gamma_dist(chosen->p1, chosen->p2);
        break;
      case Family::laplace:
        y = rng.laplace();
        break;
    }
    out.observations[i] = chosen->scale_a * y + chosen->shift_b;
  }
  return out;
}

std::pair<double, double> DensityModel::support() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo = inf, hi = -inf;
  for (const auto& c : components_) {
    double base_lo = 0.0, base_hi = 0.0;
    switch (c.family) {
      case Family::normal:
      case Family::laplace:
        base_lo = -inf;
        base_hi = inf;
        break;
      case Family::beta:
        base_lo = 0.0;
        base_hi = 1.0;
        break;
      case Family::gamma:
        base_lo = 0.0;
        base_hi = inf;
        break;
    }
    lo = std::min(lo, c.scale_a * base_lo + c.shift_b);
    hi = std::max(hi, c.scale_a * base_hi + c.shift_b);
  }
  return {lo, hi};
}

const std::vector<std::string>& DensityModel::names() {
  static const std::vector<std::string> kNames = {"f1", "fm1", "f2", "fm2",
                                                  "f3", "fm3", "f4"};
  return kNames;
}

DensityModel DensityModel::by_name(std::string_view name) {
  if (name == "f1")
    return DensityModel("f1", {{1.0, Family::normal, 0.0, 0.0, 1.0, 0.0}}, {-4.0, 4.0});
  if (name == "fm1")
    return DensityModel("fm1",
                        {{0.5, Family::normal, 0.0, 0.0, 1.0, -2.0},
                         {0.5, Family::normal, 0.0, 0.0, 1.0, 2.0}},
                        {-6.0, 6.0});
  if (name == "f2")
    return DensityModel("f2", {{1.0, Family::beta, 3.0, 3.0, 1.0, 0.0}}, {0.0, 1.0});
  if (name == "fm2")
    return DensityModel("fm2",
                        {{0.5, Family::beta, 3.0, 3.0, 1.0, -1.0},
                         {0.5, Family::beta, 3.0, 3.0, 1.0, 0.0}},
                        {-1.0, 1.0});
  if (name == "f3")
    return DensityModel("f3", {{1.0, Family::gamma, 5.0, 5.0, 0.1, 0.0}}, {0.0, 7.0});
  if (name == "fm3")
    return DensityModel("fm3",
                        {{0.4, Family::gamma, 2.0, 1.0 / 3.0, 1.0, 0.0},
                         {0.6, Family::gamma, 7.0, 6.0, 0.1, 0.0}},
                        {0.0, 10.0});
  if (name == "f4")
    return DensityModel("f4", {{1.0, Family::laplace, 0.0, 0.0, 1.0, 0.0}}, {-7.0, 7.0});
  throw std::invalid_argument("unknown density: " + std::string(name));
}

}  // namespace wwkde
