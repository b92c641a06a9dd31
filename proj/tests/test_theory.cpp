// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ssou/error.hpp"
#include "ssou/theory.hpp"

namespace {

namespace th = ssou::theory;
using th::DimensionlessPoint;

TEST(SpectralModes, WeightsSumToOne) {
  for (int k = 1; k <= 50; ++k) {
    const auto modes = th::spectral_modes(k);
    std::complex<double> sum = 0.0;
    for (const auto& q : modes.Q) sum += q;
    EXPECT_NEAR(sum.real(), 1.0, 1e-10) << k;
    EXPECT_NEAR(sum.imag(), 0.0, 1e-10) << k;
  }
}

TEST(SpectralModes, ComeInConjugatePairs) {
  for (int k = 1; k <= 20; ++k) {
    const auto modes = th::spectral_modes(k);
    for (std::size_t i = 0; i < modes.q.size(); ++i) {
      bool paired = std::abs(modes.q[i].imag()) < 1e-12;
      for (std::size_t j = 0; j < modes.q.size() && !paired; ++j)
        paired = std::abs(modes.q[j] - std::conj(modes.q[i])) < 1e-12 &&
                 std::abs(modes.Q[j] - std::conj(modes.Q[i])) < 1e-12;
      EXPECT_TRUE(paired) << "k=" << k << " mode " << i;
    }
  }
}

TEST(LatentAutocorr, ExponentialForMarkovSwitching) {
  for (double t = 0.0; t <= 10.0; t += 0.125) EXPECT_NEAR(th::latent_autocorr(1, t), std::exp(-2.0 * t), 1e-12);
}

TEST(LatentAutocorr, BoundedByOne) {
  for (int k : {1, 2, 3, 5, 10, 20})
    for (double t = 0.0; t <= 10.0; t += 0.05) EXPECT_LE(std::abs(th::latent_autocorr(k, t)), 1.0 + 1e-12);
  EXPECT_DOUBLE_EQ(th::latent_autocorr(3, 0.0, 2.0), 4.0);
}

TEST(LatentAutocorr, OscillatesForLargeShape) {
  // Nearly periodic switching anticorrelates after one mean waiting time.
  EXPECT_LT(th::latent_autocorr(20, 1.0), -0.5);
  EXPECT_GT(th::latent_autocorr(20, 2.0), 0.3);
}

TEST(XAutocorr, DecaysToZero) {
  for (int k : {1, 5}) EXPECT_NEAR(th::x_autocorr(k, 2.0, 0.5, 50.0), 0.0, 1e-8);
}

TEST(XAutocorr, VarianceAndClosedForms) {
  EXPECT_NEAR(th::variance_x(1, 2.0, 0.5), 0.75, 1e-14);
  EXPECT_NEAR(th::variance_x(2, 2.0, 0.5), 0.65, 1e-14);
  for (int k : {1, 2, 7})
    EXPECT_DOUBLE_EQ(th::variance_x(k, 1.3, 0.4, 0.8), th::x_autocorr(k, 1.3, 0.4, 0.0, 0.8));
  // k = 1: D/kappa e^{-kappa t} + C0^2 kappa (2 e^{-kappa t} - kappa e^{-2t}) / (4 - kappa^2)
  const double kappa = 3.0, d = 0.7, t = 0.6;
  const double want = d / kappa * std::exp(-kappa * t) +
                      kappa * (2.0 * std::exp(-kappa * t) - kappa * std::exp(-2.0 * t)) / (4.0 - kappa * kappa);
  EXPECT_NEAR(th::x_autocorr(1, kappa, d, t), want, 1e-14);
}

TEST(XAutocorr, ContinuousAcrossResonance) {
  // For k = 1 the telegraph rate equals kappa at kappa = 2.
  for (double t : {0.0, 0.3, 1.0, 4.0}) {
    const double at = th::x_autocorr(1, 2.0, 0.5, t);
    EXPECT_NEAR(th::x_autocorr(1, 2.0 + 1e-5, 0.5, t), at, 1e-5);
    EXPECT_NEAR(th::x_autocorr(1, 2.0 - 1e-5, 0.5, t), at, 1e-5);
  }
}

TEST(CovXC, ClosedFormAndModeSumAgree) {
  EXPECT_NEAR(th::cov_xc(1, 2.0), 0.5, 1e-14);
  EXPECT_NEAR(th::cov_xc(2, 2.0), 0.4, 1e-14);
  for (int k = 1; k <= 30; ++k)
    for (double kappa : {0.1, 0.7, 2.0, 5.0, 40.0})
      EXPECT_NEAR(th::cov_xc(k, kappa), th::cov_xc_modes(k, kappa), 1e-10) << k << ' ' << kappa;
}

TEST(PowerSpectrum, LimitsAndTail) {
  EXPECT_NEAR(th::psd_c(1, 0.0), 1.0, 1e-14);
  EXPECT_NEAR(th::psd_c(1, 1.0), 0.8, 1e-14);
  for (int k : {1, 2, 5}) {
    EXPECT_NEAR(th::psd_c(k, 0.0), 1.0 / k, 1e-12);
    const double w = 1e3;
    EXPECT_NEAR(th::psd_x(k, 2.0, 0.5, w) * w * w / (2.0 * 0.5), 1.0, 0.01);
  }
}

TEST(PowerSpectrum, InverseTransformRecoversAutocorrelation) {
  // C(t) = (1/pi) int_0^inf S(w) cos(w t) dw; truncation at W costs at most 2D/(pi W).
  const double kappa = 2.0, d = 0.5, h = 0.001, top = 4000.0;
  for (int k : {1, 3}) {
    for (double t : {0.0, 0.5, 1.0, 2.0, 3.5, 5.0}) {
      double sum = 0.5 * th::psd_x(k, kappa, d, 0.0);
      const auto n = static_cast<long>(top / h);
      for (long i = 1; i < n; ++i) {
        const double w = static_cast<double>(i) * h;
        sum += th::psd_x(k, kappa, d, w) * std::cos(w * t);
      }
      EXPECT_NEAR(sum * h / std::numbers::pi, th::x_autocorr(k, kappa, d, t), 1e-3) << k << ' ' << t;
    }
  }
}

TEST(StationaryDensity, MatchesFrozenQuadrature) {
  struct Case {
    double x, zeta, chi, value;
  };
  // mpmath quadrature at 40 digits.
  constexpr Case cases[] = {
      {0.0, 0.5, 2.0, 0.37162239994456671},
      {0.7, 0.5, 20.0, 0.49855815821106613},
      {1.3, 0.3, 5.0, 0.21596883822087581},
      {0.2, 2.0, 1.0, 0.45901503161514492},
  };
  for (const auto& c : cases)
    EXPECT_NEAR(th::stationary_density(c.x, {c.zeta, c.chi}), c.value, 1e-10 * c.value);
}

TEST(StationaryDensity, NormalizedAndEven) {
  for (const DimensionlessPoint p : {DimensionlessPoint{0.5, 20.0}, DimensionlessPoint{0.2, 3.0},
                                     DimensionlessPoint{2.0, 1.0}, DimensionlessPoint{0.9, 50.0}}) {
    const double edge = 1.0 + 8.0 * std::sqrt(1.0 / (2.0 * p.chi));
    const int n = 4000;
    const double h = 2.0 * edge / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = -edge + i * h;
      sum += (i == 0 || i == n ? 0.5 : 1.0) * th::stationary_density(x, p);
    }
    EXPECT_NEAR(sum * h, 1.0, 1e-6) << p.zeta << ' ' << p.chi;
    for (double x : {0.1, 0.77, 1.4}) EXPECT_DOUBLE_EQ(th::stationary_density(x, p), th::stationary_density(-x, p));
  }
}

TEST(StationaryDensity, BimodalAboveBoundary) {
  const DimensionlessPoint bimodal{0.5, 20.0};
  EXPECT_GT(th::stationary_density(0.9, bimodal), th::stationary_density(0.0, bimodal));
  const DimensionlessPoint unimodal{2.0, 20.0};
  EXPECT_LT(th::stationary_density(0.9, unimodal), th::stationary_density(0.0, unimodal));
}

TEST(StationaryDensity, RejectsInvalidPoints) {
  EXPECT_THROW(th::stationary_density(0.0, {0.0, 1.0}), ssou::InvalidParameter);
  EXPECT_THROW(th::stationary_density(0.0, {0.5, -1.0}), ssou::InvalidParameter);
  EXPECT_THROW(th::stationary_density(0.0, {0.01, 5.0}), ssou::NumericError);
}

TEST(PhaseBoundary, MatchesFrozenRoots) {
  struct Root {
    double zeta, chi;
  };
  // mpmath findroot on the residual at 40 digits.
  constexpr Root roots[] = {{0.1, 0.65203194253925939},
                            {0.25, 0.92839548923349542},
                            {0.5, 1.5799568426871359},
                            {0.75, 2.7281583956741216},
                            {0.9, 4.1972281716287222}};
  for (const auto& r : roots) EXPECT_NEAR(th::phase_boundary(r.zeta), r.chi, 1e-8 * r.chi);
}

TEST(PhaseBoundary, CurvatureVanishesAndFlips) {
  for (double zeta = 0.1; zeta < 0.96; zeta += 0.05) {
    const double chi = th::phase_boundary(zeta);
    EXPECT_LT(std::abs(th::density_curvature_origin({zeta, chi})), 1e-6) << zeta;
    EXPECT_LT(std::abs(th::phase_boundary_residual(zeta, chi)), 1e-9 * chi) << zeta;
  }
  const double chi = th::phase_boundary(0.5);
  EXPECT_LT(th::density_curvature_origin({0.5, 0.9 * chi}), 0.0);
  EXPECT_GT(th::density_curvature_origin({0.5, 1.1 * chi}), 0.0);
}

TEST(PhaseBoundary, CurvatureMatchesFiniteDifference) {
  for (const DimensionlessPoint p : {DimensionlessPoint{0.5, 1.0}, DimensionlessPoint{0.3, 4.0},
                                     DimensionlessPoint{1.5, 2.0}}) {
    const double h = 1e-3;
    const double fd = (th::stationary_density(h, p) - 2.0 * th::stationary_density(0.0, p) +
                       th::stationary_density(-h, p)) / (h * h);
    EXPECT_NEAR(th::density_curvature_origin(p), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(PhaseBoundary, MonotoneInZetaWithLimits) {
  double prev = 0.0;
  for (double zeta = 0.01; zeta < 0.99; zeta += 0.02) {
    const double chi = th::phase_boundary(zeta);
    EXPECT_GT(chi, prev);
    prev = chi;
  }
  EXPECT_NEAR(th::phase_boundary(0.002), 0.5, 0.01);
}

TEST(PhaseBoundary, NoBoundaryForSlowTraps) {
  EXPECT_THROW(th::phase_boundary(1.0), ssou::NumericError);
  EXPECT_THROW(th::phase_boundary(2.0), ssou::NumericError);
  EXPECT_THROW(th::phase_boundary(0.0), ssou::InvalidParameter);
  for (double chi : {0.1, 1.0, 10.0, 100.0}) EXPECT_LT(th::density_curvature_origin({2.0, chi}), 0.0);
}

TEST(DimensionlessPoint, FromPhysical) {
  const auto p = DimensionlessPoint::from_physical(2.0, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(p.zeta, 0.5);
  EXPECT_DOUBLE_EQ(p.chi, 2.0);
}

}  // namespace
