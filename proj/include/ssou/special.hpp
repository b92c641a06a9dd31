// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

namespace ssou::theory {

/**
 * @brief Confluent hypergeometric function 1F1(a; b; z) for real arguments.
 *
 * For z < 0 the Kummer transformation 1F1(a,b,z) = e^z 1F1(b-a,b,-z) turns
 * the alternating Taylor series into a positive one; for z < -30 the
 * large-argument expansion is used whenever it converges to full precision.
 * Throws InvalidParameter when b is a non-positive integer and NumericError
 * when the series hits its iteration cap.
 */
double kummer_1f1(double a, double b, double z);

/// Taylor route only (Kummer-transformed for z < 0), exponent-scaled so it
/// neither overflows nor underflows for |z| up to ~1e5.
double kummer_1f1_series(double a, double b, double z);

/// Large-|z| expansion for z < 0. Empty when the expansion does not reach
/// double precision before its terms start growing, or when the exponentially
/// small companion term is not negligible.
std::optional<double> kummer_1f1_asymptotic(double a, double b, double z);

}  // namespace ssou::theory
