// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ssou/engine.hpp"

namespace ssou::stats {

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_effective = 0;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Conditioning times and windows of the non-Markovianity measure
/// M(t1) = <x(t3) | x(t2) in omega2, x(t1) in omega1> / <x(t3) | x(t2) in omega2> - 1.
struct ConditioningSpec {
  Interval omega1;
  Interval omega2;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;

  void validate() const;
};

/// Mean and standard error of per-replicate values.
EstimateWithError mean_with_error(std::span<const double> values);

/**
 * @brief Stationary autocorrelation <x(s + lag) x(s)>.
 *
 * Each series contributes the time average over every admissible s; the
 * estimate is the mean of those averages and its error the spread across
 * series. Lags must sit on the sampling grid and be shorter than every
 * series, else InvalidParameter.
 */
std::vector<EstimateWithError> empirical_autocorr(std::span<const std::vector<double>> series,
                                                  double dt, std::span<const double> lags);
std::vector<EstimateWithError> empirical_autocorr(std::span<const engine::Trajectory> ensemble,
                                                  std::span<const double> lags);

/// Same summation as empirical_autocorr at lag 0.
EstimateWithError ensemble_second_moment(std::span<const std::vector<double>> series);

/// Time-and-ensemble average of x * c, with the same error model.
EstimateWithError ensemble_cross_moment(std::span<const engine::Trajectory> ensemble);

std::vector<double> latent_as_real(const engine::Trajectory& trajectory);

inline constexpr std::size_t kMinConditionedSamples = 100;

/**
 * @brief Non-Markovianity measure with time-translation averaging.
 *
 * Every shift a >= 0 with t3 + a inside the series contributes one triple
 * (t1 + a, t2 + a, t3 + a). The error is the delta method applied to the
 * two conditional means with their covariance from a leave-one-series-out
 * jackknife. Throws InsufficientStatistics when fewer than
 * kMinConditionedSamples triples meet both conditions.
 */
EstimateWithError nonmarkovianity(std::span<const engine::Trajectory> ensemble,
                                  const ConditioningSpec& spec);

struct ScanPoint {
  double t1 = 0.0;
  std::size_t hits = 0;  ///< triples meeting both conditions
  std::optional<EstimateWithError> estimate;
};

/// nonmarkovianity for every t1 in `t1_grid`, sharing the single-condition
/// sums. Points below kMinConditionedSamples carry no estimate.
std::vector<ScanPoint> nonmarkovianity_scan(std::span<const engine::Trajectory> ensemble,
                                            const Interval& omega1, const Interval& omega2,
                                            double t2, double t3, std::span<const double> t1_grid);

/**
 * @brief Sarle's bimodality coefficient, finite-sample form.
 *
 * (g1^2 + 1) / (3 + w g2) with g1, g2 the moment skewness and excess
 * kurtosis and w = (n-1)^2 / ((n-2)(n-3)). Tends to 5/9 for a uniform and
 * 1/3 for a Gaussian sample. Throws InvalidParameter for n < 4 and
 * DegenerateInput for zero variance or a non-positive denominator.
 */
double sarle_coefficient(std::span<const double> samples);

struct Spectrum {
  std::vector<double> omega;  ///< angular frequencies 2 pi j / (L dt), j = 0..L/2
  std::vector<EstimateWithError> power;
  std::size_t segment_length = 0;
};

/**
 * @brief Averaged Hann-windowed periodogram.
 *
 * Each series is cut into non-overlapping segments of `segment_length`
 * samples; every segment is mean-removed, windowed and transformed.
 * Normalized as dt |X_j|^2 / sum w^2, the continuous convention of
 * theory::psd_x. Errors are the spread across series. Throws
 * InvalidParameter when a segment spans less than 2 time units.
 */
Spectrum empirical_psd(std::span<const std::vector<double>> series, double dt,
                       std::size_t segment_length);
Spectrum empirical_psd(std::span<const engine::Trajectory> ensemble, std::size_t segment_length);

/// (1/2pi) * integral of a two-sided spectrum sampled on its one-sided grid.
double integrate_spectrum(const Spectrum& spectrum);

struct ModeCountOptions {
  double lo = -3.0;
  double hi = 3.0;
  std::size_t bins = 120;
  double smoothing_bins = 2.0;  ///< Gaussian kernel sd, in bins
  double z = 3.0;               ///< prominence threshold in standard errors
  bool symmetrize = true;
};

struct ModeCount {
  int modes = 0;
  std::vector<double> centers;
  std::vector<double> density;
  std::vector<double> std_error;
  std::vector<double> peaks;
};

/**
 * @brief Number of significant local maxima of a smoothed histogram.
 *
 * Each replicate (e.g. one long trajectory) yields a normalized histogram,
 * optionally symmetrized under x -> -x and smoothed with a Gaussian kernel.
 * The highest peak always counts; any other local maximum counts when its
 * prominence exceeds z standard errors, the error taken from the
 * across-replicate spread of (peak height - saddle height).
 */
ModeCount count_modes(std::span<const std::vector<double>> replicates,
                      const ModeCountOptions& options);

}  // namespace ssou::stats
