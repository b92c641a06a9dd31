// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssou/engine.hpp"
#include "ssou/statistics.hpp"
#include "ssou/theory.hpp"

namespace {

using namespace ssou;
using engine::SsouParams;

SsouParams params(int k, double total_time = 10.0, double dt = 0.01) {
  SsouParams p;
  p.memory_k = k;
  p.kappa = 2.0;
  p.diffusion = 0.5;
  p.dt = dt;
  p.total_time = total_time;
  return p;
}

TEST(WaitingTime, ExponentialForShapeOne) {
  RandomStream rng(11);
  const int n = 1'000'000;
  std::vector<double> draws(n);
  for (auto& d : draws) d = engine::sample_waiting_time(1, rng);
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= n;
  EXPECT_NEAR(mean, 1.0, 0.01);

  // Kolmogorov-Smirnov against 1 - e^{-t}; 1.63 / sqrt(n) is the 1% critical value.
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = 1.0 - std::exp(-draws[i]);
    ks = std::max({ks, std::abs(cdf - double(i) / n), std::abs(cdf - double(i + 1) / n)});
  }
  EXPECT_LT(ks, 1.63 / std::sqrt(double(n)));
}

TEST(WaitingTime, VarianceIsOneOverShape) {
  RandomStream rng(12);
  const int n = 1'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = engine::sample_waiting_time(4, rng);
    s += d;
    s2 += d * d;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(s2 / n - mean * mean, 0.25, 0.01);
  EXPECT_THROW(engine::sample_waiting_time(0, rng), InvalidParameter);
}

TEST(Latent, SwitchRateIsOne) {
  auto p = params(1, 1000.0);
  p.burn_in = 0.0;
  RandomStream rng(5);
  const auto latent = engine::generate_latent(p, rng);
  ASSERT_EQ(latent.size(), 100000u);
  const double n = static_cast<double>(engine::count_switches(latent));
  EXPECT_NEAR(n, 1000.0, 3.0 * std::sqrt(1000.0));
}

TEST(Latent, FairInitialSign) {
  auto p = params(3, 1.0);
  p.burn_in = 0.0;
  int plus = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    RandomStream rng(derive_seed(77, i));
    plus += engine::generate_latent(p, rng).front() == 1;
  }
  EXPECT_NEAR(plus, n / 2, 3.0 * std::sqrt(n / 4.0));
}

TEST(Latent, ValuesAreSigns) {
  RandomStream rng(9);
  const auto latent = engine::generate_latent(params(5), rng);
  EXPECT_EQ(latent.size(), params(5).burn_in_steps() + params(5).grid_length());
  for (auto c : latent) EXPECT_TRUE(c == 1 || c == -1);
}

TEST(Grid, LengthIsRobustToRepresentationError) {
  EXPECT_EQ(params(1, 30.0).grid_length(), 3000u);
  EXPECT_EQ(params(1, 30.0).burn_in_steps(), 500u);
  auto p = params(1, 30.0);
  p.stride = 30;
  EXPECT_EQ(p.token_count(), 100u);
}

TEST(EulerMaruyama, FreeDiffusionVariance) {
  const double d = 0.5, dt = 0.01;
  const int steps = 200, n = 20000;
  const std::vector<std::int8_t> centers(steps + 1, 1);
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    RandomStream rng(derive_seed(3, i));
    const auto x = engine::euler_maruyama(0.0, 0.0, d, dt, 1.0, centers, rng);
    s2 += x.back() * x.back();
  }
  const double var = s2 / n, want = 2.0 * d * steps * dt;
  EXPECT_NEAR(var, want, 3.0 * want * std::sqrt(2.0 / n));
}

TEST(EulerMaruyama, NoiselessRelaxation) {
  const double kappa = 2.0, dt = 0.001;
  const std::vector<std::int8_t> centers(3001, 1);
  RandomStream rng(1);
  const auto x = engine::euler_maruyama(-1.0, kappa, 0.0, dt, 1.0, centers, rng);
  for (std::size_t i = 0; i < x.size(); i += 250) {
    const double t = static_cast<double>(i) * dt;
    EXPECT_NEAR(x[i], 1.0 - 2.0 * std::exp(-kappa * t), 2.0 * kappa * dt);
  }
}

TEST(Integrate, RejectsUnstableStepAndWrongLength) {
  auto p = params(1);
  RandomStream rng(1);
  auto latent = engine::generate_latent(p, rng);
  latent.pop_back();
  EXPECT_THROW(engine::integrate_ssou(p, latent, rng), ShapeError);
  p.kappa = 250.0;
  latent = engine::generate_latent(p, rng);
  EXPECT_THROW(engine::integrate_ssou(p, latent, rng), StabilityError);
  p.kappa = -1.0;
  EXPECT_THROW(p.validate(), InvalidParameter);
}

TEST(Simulate, DeterministicPerSeed) {
  const auto a = engine::simulate(params(2), 42);
  const auto b = engine::simulate(params(2), 42);
  const auto c = engine::simulate(params(2), 43);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.c, b.c);
  EXPECT_NE(a.x, c.x);
  EXPECT_EQ(a.x.size(), params(2).grid_length());
}

TEST(Dataset, IndependentOfWorkerCount) {
  auto p = params(3, 30.0);
  p.stride = 30;
  const auto one = engine::make_dataset(p, 40, 99, 1);
  const auto four = engine::make_dataset(p, 40, 99, 4);
  EXPECT_EQ(one.inputs, four.inputs);
  EXPECT_EQ(one.targets, four.targets);
  ASSERT_EQ(one.inputs[0].size(), 100u);
  const auto traj = engine::simulate(p, engine::trajectory_seed(99, 7));
  EXPECT_EQ(one.inputs[7][3], traj.x[90]);
  EXPECT_EQ(one.targets[7][3], (1 + traj.c[90]) / 2);
}

TEST(Dataset, CsvRoundTrip) {
  auto p = params(2, 3.0);
  p.stride = 10;
  const auto data = engine::make_dataset(p, 5, 1234);
  std::stringstream buf;
  engine::write_dataset_csv(buf, data);
  const auto back = engine::read_dataset_csv(buf);
  EXPECT_EQ(back.inputs, data.inputs);
  EXPECT_EQ(back.targets, data.targets);
  EXPECT_EQ(back.base_seed, 1234u);
  EXPECT_EQ(back.params.stride, 10);
  EXPECT_EQ(back.params.memory_k, 2);
  std::stringstream bad("sequence_id,token_index,x,y\n");
  EXPECT_THROW(engine::read_dataset_csv(bad), InvalidParameter);
}

TEST(Decimate, KeepsEveryFactorthPoint) {
  const auto t = engine::simulate(params(1, 1.0), 8);
  const auto d = engine::decimate(t, 10);
  ASSERT_EQ(d.x.size(), 10u);
  EXPECT_EQ(d.x[3], t.x[30]);
  EXPECT_DOUBLE_EQ(d.dt, 0.1);
}

TEST(Stationarity, MomentsMatchTheory) {
  // At dt = 0.01 the O(dt) integrator bias reaches 1.5% for k >= 5, about 4 standard errors here.
  for (int k : {1, 2, 5, 10}) {
    const auto p = params(k, 10.0, 0.0025);
    const auto ensemble = engine::simulate_ensemble(p, 5000, derive_seed(2024, k));
    std::vector<std::vector<double>> xs;
    for (const auto& t : ensemble) xs.push_back(t.x);
    const auto var = stats::ensemble_second_moment(xs);
    const auto cov = stats::ensemble_cross_moment(ensemble);
    EXPECT_NEAR(var.value, theory::variance_x(k, p.kappa, p.diffusion), 3.0 * var.std_error) << k;
    EXPECT_NEAR(cov.value, theory::cov_xc(k, p.kappa), 3.0 * cov.std_error) << k;
  }
}

TEST(Stationarity, AutocorrelationMatchesTheoryAtFineStep) {
  const auto p = params(1, 10.0, 0.005);
  const auto ensemble = engine::simulate_ensemble(p, 4000, 31337);
  std::vector<double> lags;
  for (int i = 0; i <= 20; ++i) lags.push_back(0.25 * i);
  const auto c = stats::empirical_autocorr(ensemble, lags);
  for (std::size_t i = 0; i < lags.size(); ++i)
    EXPECT_NEAR(c[i].value, theory::x_autocorr(1, 2.0, 0.5, lags[i]), 3.0 * c[i].std_error) << lags[i];
}

}  // namespace
