// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ssou/error.hpp"
#include "ssou/random.hpp"

namespace ssou::engine {

/**
 * @brief Physical and numerical parameters of the switching OU process.
 *
 * Time is measured in units of the mean waiting time between trap switches.
 * The simulation grid covers `burn_in` time units that are integrated but
 * never emitted, followed by `total_time` time units of output.
 */
struct SsouParams {
  double kappa = 2.0;        ///< trap stiffness, 1/time
  double diffusion = 0.5;    ///< D, length^2/time
  double trap_center = 1.0;  ///< C0
  int memory_k = 1;          ///< gamma shape of the waiting times
  double dt = 0.01;          ///< integration step
  double total_time = 30.0;  ///< emitted simulation time T'
  int stride = 1;            ///< subsampling factor s
  double burn_in = 5.0;      ///< discarded transient, time units

  /// Throws InvalidParameter when an invariant is violated.
  void validate() const;

  /// floor(total_time / dt), robust to representation error of dt.
  std::size_t grid_length() const;
  std::size_t burn_in_steps() const;
  /// Tokens per subsampled sequence, floor(grid_length / stride).
  std::size_t token_count() const { return grid_length() / static_cast<std::size_t>(stride); }
};

struct Trajectory {
  std::vector<double> x;
  std::vector<std::int8_t> c;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

/// Subsampled input/target pairs; targets are y = (1 + c) / 2.
struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<std::uint8_t>> targets;
  SsouParams params;
  std::uint64_t base_seed = 0;

  std::size_t size() const { return inputs.size(); }
};

/// Gamma(shape = k, rate = k) draw as a sum of k inverse-CDF exponentials.
template <UniformSource R>
double sample_waiting_time(int k, R& rng) {
  if (k < 1) throw InvalidParameter("memory_k must be >= 1");
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum -= std::log(rng.uniform_open());
  return sum / k;
}

/**
 * @brief Telegraph signal on the simulation grid, burn-in included.
 *
 * Returns burn_in_steps() + grid_length() values in {-1, +1}. The initial
 * sign is a fair coin; each switch time is truncated onto the grid, so a
 * switch at time t flips the value from index floor(t / dt) on.
 */
std::vector<std::int8_t> generate_latent(const SsouParams& params, RandomStream& rng);

/// Explicit Euler-Maruyama path driven by the given trap signs. Element 0 is
/// x0; element i+1 uses the sign at index i. No parameter validation, so the
/// free-diffusion (kappa = 0) and noiseless (D = 0) limits are reachable.
std::vector<double> euler_maruyama(double x0, double kappa, double diffusion, double dt,
                                   double trap_center, std::span<const std::int8_t> centers,
                                   RandomStream& rng);

/**
 * Integrates the SSOU equation over a latent signal from generate_latent()
 * and drops the burn-in prefix. X0 is drawn from Normal(C0 * c0, D / kappa).
 * Throws StabilityError when dt * kappa >= 2 and ShapeError when the latent
 * length does not match the grid.
 */
Trajectory integrate_ssou(const SsouParams& params, std::span<const std::int8_t> latent,
                          RandomStream& rng);

/// generate_latent + integrate_ssou on a fresh stream seeded with `seed`.
Trajectory simulate(const SsouParams& params, std::uint64_t seed);

/// Seed of trajectory `index` in a dataset or ensemble built from `base_seed`.
inline std::uint64_t trajectory_seed(std::uint64_t base_seed, std::size_t index) {
  return derive_seed(base_seed, index);
}

/// `n` independent trajectories, ordered by index.
std::vector<Trajectory> simulate_ensemble(const SsouParams& params, std::size_t n,
                                          std::uint64_t base_seed, unsigned workers = 1);

/// Keeps every `factor`-th grid point, starting with the first.
Trajectory decimate(const Trajectory& trajectory, std::size_t factor);

Dataset make_dataset(const SsouParams& params, std::size_t n_sequences, std::uint64_t base_seed,
                     unsigned workers = 1);

/// Number of sign changes in a latent sequence.
std::size_t count_switches(std::span<const std::int8_t> latent);

/// CSV serialization: one `#`-prefixed header record carrying every
/// SsouParams field and the base seed, then `sequence_id,token_index,x,y`.
void write_dataset_csv(std::ostream& out, const Dataset& dataset);
Dataset read_dataset_csv(std::istream& in);

}  // namespace ssou::engine
