// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ssou/learners.hpp"

namespace ssou::check {

struct GradientAudit {
  int instances = 0;
  int coordinates = 0;
  int failures = 0;
  double worst = 0.0;  ///< largest relative error seen
};

/// Relative error with a 1e-6 floor on the magnitude, so coordinates whose
/// gradient is numerically zero are judged on an absolute scale.
inline double relative_gap(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/**
 * Compares backward() against central differences with step h on `instances`
 * random problems: uniform(-1, 1) parameters, standard-normal inputs, random
 * binary targets and sequence lengths 6..16.
 */
inline GradientAudit audit_gradients(const learn::ModelSpec& spec, int instances, std::uint64_t seed,
                                     double h = 1e-5, double tolerance = 1e-4) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> length(6, 16), bit(0, 1);
  GradientAudit audit;
  for (int n = 0; n < instances; ++n) {
    learn::ModelState state = learn::init_state(spec, gen());
    for (auto& p : state.params) p = uni(gen);
    std::vector<double> x(static_cast<std::size_t>(length(gen)));
    std::vector<std::uint8_t> y(x.size());
    for (auto& v : x) v = gauss(gen);
    for (auto& v : y) v = static_cast<std::uint8_t>(bit(gen));
    const auto grad = learn::backward(state, x, y);
    const auto eval = [&](const learn::ModelState& s) {
      return learn::loss(learn::forward(s, x), y, spec.tau0());
    };
    for (std::size_t i = 0; i < state.params.size(); ++i) {
      learn::ModelState plus = state, minus = state;
      plus.params[i] += h;
      minus.params[i] -= h;
      const double numeric = (eval(plus) - eval(minus)) / (2.0 * h);
      const double gap = relative_gap(grad[i], numeric);
      audit.worst = std::max(audit.worst, gap);
      audit.failures += gap > tolerance;
      ++audit.coordinates;
    }
    ++audit.instances;
  }
  return audit;
}

}  // namespace ssou::check
