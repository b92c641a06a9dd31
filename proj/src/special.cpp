// SPDX-License-Identifier: Apache-2.0
#include "ssou/special.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ssou/error.hpp"

namespace ssou::theory {

namespace {

constexpr long kMaxTerms = 2'000'000;
constexpr double kRescale = 0x1.0p+600;

bool nonpositive_integer(double v) { return v <= 0.0 && std::floor(v) == v; }

struct Scaled {
  double mantissa;
  double log_scale;
};

// sum_n (a)_n / (b)_n z^n / n!, with the running term kept below 2^600 by
// shifting powers of two into log_scale.
Scaled taylor(double a, double b, double z) {
  double term = 1.0;
  double sum = 1.0;
  double log_scale = 0.0;
  for (long n = 0; n < kMaxTerms; ++n) {
    const double ratio = (a + n) / (b + n) * z / (n + 1);
    term *= ratio;
    sum += term;
    if (term == 0.0) return {sum, log_scale};
    if (std::abs(term) > kRescale || std::abs(sum) > kRescale) {
      term /= kRescale;
      sum /= kRescale;
      log_scale += std::log(kRescale);
    }
    if (std::abs(ratio) < 1.0 && std::abs(term) <= 1e-17 * std::abs(sum))
      return {sum, log_scale};
  }
  std::ostringstream msg;
  msg << "1F1 series did not converge after " << kMaxTerms << " terms (a=" << a << ", b=" << b
      << ", z=" << z << ")";
  throw NumericError(msg.str());
}

}  // namespace

double kummer_1f1_series(double a, double b, double z) {
  if (nonpositive_integer(b)) throw InvalidParameter("1F1: b must not be a non-positive integer");
  if (z == 0.0) return 1.0;
  if (z > 0.0) {
    const Scaled s = taylor(a, b, z);
    return s.mantissa * std::exp(s.log_scale);
  }
  const Scaled s = taylor(b - a, b, -z);
  return s.mantissa * std::exp(s.log_scale + z);
}

std::optional<double> kummer_1f1_asymptotic(double a, double b, double z) {
  if (!(z < 0.0) || b <= 0.0 || b - a <= 0.0 || a <= 0.0) return std::nullopt;
  const double x = -z;
  // Size of the e^z x^(a-b) companion relative to the leading algebraic term.
  const double log_companion =
      -x + (2.0 * a - b) * std::log(x) + std::lgamma(b - a) - std::lgamma(a);
  if (log_companion > std::log(1e-17)) return std::nullopt;

  double term = 1.0;
  double sum = 1.0;
  for (int s = 0; s < 500; ++s) {
    const double next = term * (a + s) * (a - b + 1.0 + s) / ((s + 1.0) * x);
    if (std::abs(next) >= std::abs(term)) return std::nullopt;
    term = next;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) {
      const double log_prefactor = std::lgamma(b) - std::lgamma(b - a) - a * std::log(x);
      return std::exp(log_prefactor) * sum;
    }
  }
  return std::nullopt;
}

double kummer_1f1(double a, double b, double z) {
  if (nonpositive_integer(b)) throw InvalidParameter("1F1: b must not be a non-positive integer");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z))
    throw InvalidParameter("1F1: non-finite argument");
  if (z == 0.0) return 1.0;
  if (z < -30.0) {
    if (auto v = kummer_1f1_asymptotic(a, b, z)) return *v;
  }
  return kummer_1f1_series(a, b, z);
}

}  // namespace ssou::theory
