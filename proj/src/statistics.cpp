// SPDX-License-Identifier: Apache-2.0
#include "ssou/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fftw3.h>

namespace ssou::stats {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t grid_index(double t, double dt, const char* what) {
  if (!(t >= 0.0)) throw InvalidParameter(std::string(what) + " must be >= 0");
  const double steps = t / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, steps)) {
    std::ostringstream msg;
    msg << what << " = " << t << " is not a multiple of dt = " << dt;
    throw InvalidParameter(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

double shared_dt(std::span<const engine::Trajectory> ensemble) {
  if (ensemble.empty()) throw InvalidParameter("empty ensemble");
  const double dt = ensemble.front().dt;
  for (const auto& t : ensemble)
    if (t.dt != dt) throw InvalidParameter("trajectories do not share dt");
  return dt;
}

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::vector<double>> positions(std::span<const engine::Trajectory> ensemble) {
  std::vector<std::vector<double>> out;
  out.reserve(ensemble.size());
  for (const auto& t : ensemble) out.push_back(t.x);
  return out;
}

}  // namespace

void ConditioningSpec::validate() const {
  if (!(omega1.lo <= omega1.hi) || !(omega2.lo <= omega2.hi))
    throw InvalidParameter("conditioning intervals must be non-empty");
  if (!(t1 >= 0.0 && t1 < t2 && t2 < t3)) throw InvalidParameter("require 0 <= t1 < t2 < t3");
}

EstimateWithError mean_with_error(std::span<const double> values) {
  EstimateWithError e;
  e.n_effective = values.size();
  if (values.empty()) return e;
  const double n = static_cast<double>(values.size());
  e.value = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.value) * (v - e.value);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

std::vector<EstimateWithError> empirical_autocorr(std::span<const std::vector<double>> series,
                                                  double dt, std::span<const double> lags) {
  if (series.empty()) throw InvalidParameter("empty ensemble");
  if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
  std::size_t shortest = series.front().size();
  for (const auto& s : series) shortest = std::min(shortest, s.size());

  std::vector<EstimateWithError> out;
  out.reserve(lags.size());
  std::vector<double> per_series(series.size());
  for (double lag : lags) {
    const std::size_t l = grid_index(lag, dt, "lag");
    if (l >= shortest) {
      std::ostringstream msg;
      msg << "lag " << lag << " exceeds trajectory length " << shortest * dt;
      throw InvalidParameter(msg.str());
    }
    for (std::size_t j = 0; j < series.size(); ++j) {
      const auto& x = series[j];
      const std::size_t pairs = x.size() - l;
      double sum = 0.0;
      for (std::size_t i = 0; i < pairs; ++i) sum += x[i] * x[i + l];
      per_series[j] = sum / static_cast<double>(pairs);
    }
    out.push_back(mean_with_error(per_series));
  }
  return out;
}

std::vector<EstimateWithError> empirical_autocorr(std::span<const engine::Trajectory> ensemble,
                                                  std::span<const double> lags) {
  const double dt = shared_dt(ensemble);
  const auto x = positions(ensemble);
  return empirical_autocorr(x, dt, lags);
}

EstimateWithError ensemble_second_moment(std::span<const std::vector<double>> series) {
  const double zero = 0.0;
  return empirical_autocorr(series, 1.0, std::span<const double>(&zero, 1)).front();
}

EstimateWithError ensemble_cross_moment(std::span<const engine::Trajectory> ensemble) {
  if (ensemble.empty()) throw InvalidParameter("empty ensemble");
  std::vector<double> per_series;
  per_series.reserve(ensemble.size());
  for (const auto& t : ensemble) {
    if (t.x.empty() || t.x.size() != t.c.size()) throw ShapeError("x and c lengths differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < t.x.size(); ++i) sum += t.x[i] * t.c[i];
    per_series.push_back(sum / static_cast<double>(t.x.size()));
  }
  return mean_with_error(per_series);
}

std::vector<double> latent_as_real(const engine::Trajectory& trajectory) {
  return {trajectory.c.begin(), trajectory.c.end()};
}

std::vector<ScanPoint> nonmarkovianity_scan(std::span<const engine::Trajectory> ensemble,
                                            const Interval& omega1, const Interval& omega2,
                                            double t2, double t3, std::span<const double> t1_grid) {
  const double dt = shared_dt(ensemble);
  for (double t1 : t1_grid) ConditioningSpec{omega1, omega2, t1, t2, t3}.validate();
  if (t1_grid.empty()) ConditioningSpec{omega1, omega2, 0.0, t2, t3}.validate();
  const std::size_t s2 = grid_index(t2, dt, "t2");
  const std::size_t s3 = grid_index(t3, dt, "t3");
  const std::size_t n_series = ensemble.size();

  // Single-condition sums do not depend on t1.
  std::vector<double> sb(n_series, 0.0);
  std::vector<double> nb(n_series, 0.0);
  for (std::size_t j = 0; j < n_series; ++j) {
    const auto& x = ensemble[j].x;
    for (std::size_t a = 0; a + s3 < x.size(); ++a) {
      if (omega2.contains(x[a + s2])) {
        sb[j] += x[a + s3];
        nb[j] += 1.0;
      }
    }
  }
  const double sb_total = std::accumulate(sb.begin(), sb.end(), 0.0);
  const double nb_total = std::accumulate(nb.begin(), nb.end(), 0.0);

  std::vector<ScanPoint> out;
  out.reserve(t1_grid.size());
  std::vector<double> sa(n_series);
  std::vector<double> na(n_series);
  for (double t1 : t1_grid) {
    const std::size_t s1 = grid_index(t1, dt, "t1");
    for (std::size_t j = 0; j < n_series; ++j) {
      const auto& x = ensemble[j].x;
      double s = 0.0;
      double n = 0.0;
      for (std::size_t a = 0; a + s3 < x.size(); ++a) {
        if (omega2.contains(x[a + s2]) && omega1.contains(x[a + s1])) {
          s += x[a + s3];
          n += 1.0;
        }
      }
      sa[j] = s;
      na[j] = n;
    }
    const double sa_total = std::accumulate(sa.begin(), sa.end(), 0.0);
    const double na_total = std::accumulate(na.begin(), na.end(), 0.0);

    ScanPoint point;
    point.t1 = t1;
    point.hits = static_cast<std::size_t>(na_total);
    if (point.hits < kMinConditionedSamples || n_series < 2) {
      out.push_back(point);
      continue;
    }
    const double a_mean = sa_total / na_total;
    const double b_mean = sb_total / nb_total;

    // Leave-one-series-out replicates of both conditional means.
    std::vector<double> a_loo(n_series);
    std::vector<double> b_loo(n_series);
    for (std::size_t j = 0; j < n_series; ++j) {
      const double na_rest = na_total - na[j];
      const double nb_rest = nb_total - nb[j];
      a_loo[j] = na_rest > 0.0 ? (sa_total - sa[j]) / na_rest : a_mean;
      b_loo[j] = nb_rest > 0.0 ? (sb_total - sb[j]) / nb_rest : b_mean;
    }
    const double nj = static_cast<double>(n_series);
    const double a_bar = std::accumulate(a_loo.begin(), a_loo.end(), 0.0) / nj;
    const double b_bar = std::accumulate(b_loo.begin(), b_loo.end(), 0.0) / nj;
    double var_a = 0.0;
    double var_b = 0.0;
    double cov_ab = 0.0;
    for (std::size_t j = 0; j < n_series; ++j) {
      var_a += (a_loo[j] - a_bar) * (a_loo[j] - a_bar);
      var_b += (b_loo[j] - b_bar) * (b_loo[j] - b_bar);
      cov_ab += (a_loo[j] - a_bar) * (b_loo[j] - b_bar);
    }
    const double scale = (nj - 1.0) / nj;
    var_a *= scale;
    var_b *= scale;
    cov_ab *= scale;

    const double ratio = a_mean / b_mean;
    const double rel_var = var_a / (a_mean * a_mean) + var_b / (b_mean * b_mean) -
                           2.0 * cov_ab / (a_mean * b_mean);
    EstimateWithError e;
    e.value = ratio - 1.0;
    e.std_error = std::abs(ratio) * std::sqrt(std::max(rel_var, 0.0));
    e.n_effective = point.hits;
    point.estimate = e;
    out.push_back(point);
  }
  return out;
}

EstimateWithError nonmarkovianity(std::span<const engine::Trajectory> ensemble,
                                  const ConditioningSpec& spec) {
  spec.validate();
  // Only the differences matter under time-translation averaging.
  const double t1 = 0.0;
  const double t2 = spec.t2 - spec.t1;
  const double t3 = spec.t3 - spec.t1;
  const auto points =
      nonmarkovianity_scan(ensemble, spec.omega1, spec.omega2, t2, t3, std::span(&t1, 1));
  const auto& p = points.front();
  if (!p.estimate) throw InsufficientStatistics(p.hits, kMinConditionedSamples);
  return *p.estimate;
}

double sarle_coefficient(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw InvalidParameter("sarle_coefficient needs at least 4 samples");
  const double nd = static_cast<double>(n);
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / nd;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  if (!(m2 > 0.0)) throw DegenerateInput("sarle_coefficient: zero variance");
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2) - 3.0;
  const double w = (nd - 1.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
  const double denom = 3.0 + w * g2;
  if (!(denom > 0.0)) throw DegenerateInput("sarle_coefficient: non-positive kurtosis term");
  return (g1 * g1 + 1.0) / denom;
}

Spectrum empirical_psd(std::span<const std::vector<double>> series, double dt,
                       std::size_t segment_length) {
  if (series.empty()) throw InvalidParameter("empty ensemble");
  if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
  if (static_cast<double>(segment_length) * dt < 2.0) {
    std::ostringstream msg;
    msg << "segment of " << segment_length << " samples spans less than 2 time units";
    throw InvalidParameter(msg.str());
  }
  const std::size_t L = segment_length;
  const std::size_t bins = L / 2 + 1;

  std::vector<double> window(L);
  double window_power = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(L)));
    window_power += window[i] * window[i];
  }
  const double norm = dt / window_power;

  double* in = fftw_alloc_real(L);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), in, out, FFTW_ESTIMATE);
  }

  std::vector<std::vector<double>> per_series(bins);
  for (const auto& x : series) {
    const std::size_t segments = x.size() / L;
    if (segments == 0) continue;
    std::vector<double> acc(bins, 0.0);
    for (std::size_t s = 0; s < segments; ++s) {
      const double* seg = x.data() + s * L;
      const double mean = std::accumulate(seg, seg + L, 0.0) / static_cast<double>(L);
      for (std::size_t i = 0; i < L; ++i) in[i] = window[i] * (seg[i] - mean);
      fftw_execute(plan);
      for (std::size_t j = 0; j < bins; ++j) acc[j] += norm * (out[j][0] * out[j][0] + out[j][1] * out[j][1]);
    }
    for (std::size_t j = 0; j < bins; ++j) per_series[j].push_back(acc[j] / static_cast<double>(segments));
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  if (per_series.front().empty()) throw InvalidParameter("every series is shorter than one segment");

  Spectrum spectrum;
  spectrum.segment_length = L;
  spectrum.omega.resize(bins);
  spectrum.power.resize(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    spectrum.omega[j] = 2.0 * kPi * static_cast<double>(j) / (static_cast<double>(L) * dt);
    spectrum.power[j] = mean_with_error(per_series[j]);
  }
  return spectrum;
}

Spectrum empirical_psd(std::span<const engine::Trajectory> ensemble, std::size_t segment_length) {
  const double dt = shared_dt(ensemble);
  const auto x = positions(ensemble);
  return empirical_psd(x, dt, segment_length);
}

double integrate_spectrum(const Spectrum& spectrum) {
  const std::size_t bins = spectrum.omega.size();
  if (bins < 2) throw InvalidParameter("spectrum needs at least two bins");
  const double d_omega = spectrum.omega[1] - spectrum.omega[0];
  // Bins 1..L/2 stand for a +-omega pair, except the Nyquist bin of an even L.
  double sum = spectrum.power[0].value;
  for (std::size_t j = 1; j < bins; ++j) sum += 2.0 * spectrum.power[j].value;
  if (spectrum.segment_length % 2 == 0) sum -= spectrum.power.back().value;
  return sum * d_omega / (2.0 * kPi);
}

ModeCount count_modes(std::span<const std::vector<double>> replicates,
                      const ModeCountOptions& options) {
  if (replicates.size() < 2) throw InvalidParameter("count_modes needs at least 2 replicates");
  if (!(options.hi > options.lo) || options.bins < 3)
    throw InvalidParameter("count_modes: bad histogram range");
  if (options.symmetrize && std::abs(options.lo + options.hi) > 1e-12 * (options.hi - options.lo))
    throw InvalidParameter("symmetrized histogram needs a range symmetric about 0");
  const std::size_t bins = options.bins;
  const double width = (options.hi - options.lo) / static_cast<double>(bins);

  std::vector<double> kernel;
  if (options.smoothing_bins > 0.0) {
    const int half = static_cast<int>(std::ceil(4.0 * options.smoothing_bins));
    double total = 0.0;
    for (int i = -half; i <= half; ++i) {
      const double u = i / options.smoothing_bins;
      kernel.push_back(std::exp(-0.5 * u * u));
      total += kernel.back();
    }
    for (double& v : kernel) v /= total;
  } else {
    kernel = {1.0};
  }
  const int half = static_cast<int>(kernel.size() / 2);

  std::vector<std::vector<double>> curves;
  curves.reserve(replicates.size());
  std::vector<double> hist(bins);
  for (const auto& samples : replicates) {
    if (samples.empty()) throw InvalidParameter("empty replicate");
    std::fill(hist.begin(), hist.end(), 0.0);
    for (double v : samples) {
      if (v < options.lo || v >= options.hi) continue;
      const auto b = std::min(bins - 1, static_cast<std::size_t>((v - options.lo) / width));
      hist[b] += 1.0;
    }
    const double scale = 1.0 / (static_cast<double>(samples.size()) * width);
    for (double& h : hist) h *= scale;
    if (options.symmetrize) {
      for (std::size_t i = 0; i < bins / 2; ++i) {
        const double m = 0.5 * (hist[i] + hist[bins - 1 - i]);
        hist[i] = m;
        hist[bins - 1 - i] = m;
      }
    }
    std::vector<double> smooth(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i) {
      for (int o = -half; o <= half; ++o) {
        const auto j = static_cast<std::ptrdiff_t>(i) + o;
        if (j >= 0 && j < static_cast<std::ptrdiff_t>(bins)) smooth[i] += kernel[o + half] * hist[j];
      }
    }
    curves.push_back(std::move(smooth));
  }

  ModeCount result;
  result.centers.resize(bins);
  result.density.resize(bins);
  result.std_error.resize(bins);
  std::vector<double> column(curves.size());
  for (std::size_t i = 0; i < bins; ++i) {
    result.centers[i] = options.lo + (static_cast<double>(i) + 0.5) * width;
    for (std::size_t r = 0; r < curves.size(); ++r) column[r] = curves[r][i];
    const auto e = mean_with_error(column);
    result.density[i] = e.value;
    result.std_error[i] = e.std_error;
  }

  const auto& m = result.density;
  // Ties go to the lower index so exactly symmetric twin peaks are ordered.
  auto higher = [&](std::size_t j, std::size_t i) { return m[j] > m[i] || (m[j] == m[i] && j < i); };
  for (std::size_t i = 0; i < bins; ++i) {
    const bool rises = i == 0 || m[i] > m[i - 1];
    const bool falls = i + 1 == bins || m[i] >= m[i + 1];
    if (!rises || !falls || m[i] <= 0.0) continue;

    bool blocked_left = false;
    std::size_t left_min = i;
    for (std::size_t j = i; j-- > 0;) {
      if (higher(j, i)) {
        blocked_left = true;
        break;
      }
      if (m[j] < m[left_min]) left_min = j;
    }
    bool blocked_right = false;
    std::size_t right_min = i;
    for (std::size_t j = i + 1; j < bins; ++j) {
      if (higher(j, i)) {
        blocked_right = true;
        break;
      }
      if (m[j] < m[right_min]) right_min = j;
    }
    if (!blocked_left && !blocked_right) {
      result.peaks.push_back(result.centers[i]);
      continue;
    }
    const std::size_t saddle = m[left_min] > m[right_min] ? left_min : right_min;
    const double prominence = m[i] - m[saddle];
    for (std::size_t r = 0; r < curves.size(); ++r) column[r] = curves[r][i] - curves[r][saddle];
    const double se = mean_with_error(column).std_error;
    if (prominence > options.z * se && prominence > 0.0) result.peaks.push_back(result.centers[i]);
  }
  result.modes = static_cast<int>(result.peaks.size());
  return result;
}

}  // namespace ssou::stats
