#include "dimest/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dimest/errors.hpp"

namespace dimest {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kRelTol = 1e-16;

// P(a, z) by the power series  e^{-z} z^a / Gamma(a+1) * sum_k z^k / ((a+1)...(a+k)).
double gamma_p_series(double a, double z) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int k = 0; k < kMaxIterations; ++k) {
    ap += 1.0;
    term *= z / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kRelTol) break;
  }
  return sum * std::exp(-z + a * std::log(z) - std::lgamma(a));
}

// Q(a, z) by the continued fraction for Gamma(a, z), modified Lentz evaluation.
double gamma_q_continued_fraction(double a, double z) {
  constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  double b = z + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kRelTol) break;
  }
  return std::exp(-z + a * std::log(z) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_Q(double a, double z) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma requires a > 0");
  if (!(z >= 0.0)) throw DomainError("incomplete gamma requires z >= 0");
  if (z == 0.0) return 1.0;
  if (std::isinf(z)) return 0.0;
  if (z < a + 1.0) return 1.0 - gamma_p_series(a, z);
  return gamma_q_continued_fraction(a, z);
}

double regularized_gamma_P(double a, double z) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma requires a > 0");
  if (!(z >= 0.0)) throw DomainError("incomplete gamma requires z >= 0");
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return 1.0;
  if (z < a + 1.0) return gamma_p_series(a, z);
  return 1.0 - gamma_q_continued_fraction(a, z);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_cdf_centered(double x) { return 0.5 * std::erf(x / std::numbers::sqrt2); }

}  // namespace dimest
