// SPDX-License-Identifier: Apache-2.0
#include "ssou/engine.hpp"

#include <cmath>

#include "ssou/parallel.hpp"

namespace ssou::engine {

namespace {

std::size_t steps_in(double span, double dt) {
  // 30 / 0.01 evaluates to 2999.9999999999995; nudge before flooring.
  return static_cast<std::size_t>(std::floor(span / dt * (1.0 + 1e-12) + 1e-9));
}

}  // namespace

void SsouParams::validate() const {
  if (!(kappa > 0.0)) throw InvalidParameter("kappa must be > 0");
  if (!(diffusion > 0.0)) throw InvalidParameter("diffusion must be > 0");
  if (!(trap_center > 0.0)) throw InvalidParameter("trap_center must be > 0");
  if (memory_k < 1) throw InvalidParameter("memory_k must be >= 1");
  if (!(dt > 0.0)) throw InvalidParameter("dt must be > 0");
  if (!(total_time > dt)) throw InvalidParameter("total_time must exceed dt");
  if (stride < 1) throw InvalidParameter("stride must be >= 1");
  if (!(burn_in >= 0.0)) throw InvalidParameter("burn_in must be >= 0");
  if (grid_length() < static_cast<std::size_t>(stride))
    throw InvalidParameter("grid shorter than one stride");
}

std::size_t SsouParams::grid_length() const { return steps_in(total_time, dt); }

std::size_t SsouParams::burn_in_steps() const { return steps_in(burn_in, dt); }

std::vector<std::int8_t> generate_latent(const SsouParams& params, RandomStream& rng) {
  params.validate();
  const std::size_t n = params.burn_in_steps() + params.grid_length();
  std::vector<std::int8_t> latent(n);

  std::int8_t sign = rng.uniform_open() <= 0.5 ? std::int8_t{1} : std::int8_t{-1};
  double next_switch = sample_waiting_time(params.memory_k, rng);
  for (std::size_t i = 0; i < n; ++i) {
    while (static_cast<std::size_t>(next_switch / params.dt) <= i) {
      sign = static_cast<std::int8_t>(-sign);
      next_switch += sample_waiting_time(params.memory_k, rng);
    }
    latent[i] = sign;
  }
  return latent;
}

std::vector<double> euler_maruyama(double x0, double kappa, double diffusion, double dt,
                                   double trap_center, std::span<const std::int8_t> centers,
                                   RandomStream& rng) {
  std::vector<double> x(centers.size());
  if (x.empty()) return x;
  const double noise = std::sqrt(2.0 * diffusion * dt);
  const double relax = kappa * dt;
  x[0] = x0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double drift = relax * (x[i] - trap_center * centers[i]);
    x[i + 1] = x[i] - drift + noise * rng.normal();
  }
  return x;
}

Trajectory integrate_ssou(const SsouParams& params, std::span<const std::int8_t> latent,
                          RandomStream& rng) {
  params.validate();
  if (params.dt * params.kappa >= 2.0)
    throw StabilityError("dt * kappa >= 2: explicit Euler-Maruyama diverges");
  const std::size_t burn = params.burn_in_steps();
  const std::size_t grid = params.grid_length();
  if (latent.size() != burn + grid)
    throw ShapeError("latent length " + std::to_string(latent.size()) + " does not match grid " +
                     std::to_string(burn + grid));

  const double x0 = params.trap_center * latent[0] +
                    std::sqrt(params.diffusion / params.kappa) * rng.normal();
  std::vector<double> path = euler_maruyama(x0, params.kappa, params.diffusion, params.dt,
                                            params.trap_center, latent, rng);
  Trajectory out;
  out.dt = params.dt;
  out.seed = rng.seed();
  out.x.assign(path.begin() + static_cast<std::ptrdiff_t>(burn), path.end());
  out.c.assign(latent.begin() + static_cast<std::ptrdiff_t>(burn), latent.end());
  return out;
}

Trajectory simulate(const SsouParams& params, std::uint64_t seed) {
  RandomStream rng(seed);
  const auto latent = generate_latent(params, rng);
  return integrate_ssou(params, latent, rng);
}

std::vector<Trajectory> simulate_ensemble(const SsouParams& params, std::size_t n,
                                          std::uint64_t base_seed, unsigned workers) {
  params.validate();
  std::vector<Trajectory> out(n);
  parallel_for(n, workers,
               [&](std::size_t i) { out[i] = simulate(params, trajectory_seed(base_seed, i)); });
  return out;
}

Trajectory decimate(const Trajectory& trajectory, std::size_t factor) {
  if (factor < 1) throw InvalidParameter("decimation factor must be >= 1");
  Trajectory out;
  out.dt = trajectory.dt * static_cast<double>(factor);
  out.seed = trajectory.seed;
  for (std::size_t i = 0; i < trajectory.x.size(); i += factor) {
    out.x.push_back(trajectory.x[i]);
    out.c.push_back(trajectory.c[i]);
  }
  return out;
}

Dataset make_dataset(const SsouParams& params, std::size_t n_sequences, std::uint64_t base_seed,
                     unsigned workers) {
  params.validate();
  if (n_sequences < 1) throw InvalidParameter("n_sequences must be >= 1");
  Dataset data;
  data.params = params;
  data.base_seed = base_seed;
  data.inputs.resize(n_sequences);
  data.targets.resize(n_sequences);
  const auto stride = static_cast<std::size_t>(params.stride);
  const std::size_t tokens = params.token_count();
  parallel_for(n_sequences, workers, [&](std::size_t i) {
    const Trajectory traj = simulate(params, trajectory_seed(base_seed, i));
    auto& x = data.inputs[i];
    auto& y = data.targets[i];
    x.resize(tokens);
    y.resize(tokens);
    for (std::size_t t = 0; t < tokens; ++t) {
      x[t] = traj.x[t * stride];
      y[t] = static_cast<std::uint8_t>((1 + traj.c[t * stride]) / 2);
    }
  });
  return data;
}

std::size_t count_switches(std::span<const std::int8_t> latent) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < latent.size(); ++i) n += latent[i] != latent[i - 1];
  return n;
}

}  // namespace ssou::engine
