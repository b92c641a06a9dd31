// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "ssou/special.hpp"

namespace ssou::theory {

/// zeta = 1/kappa (relaxation time over mean waiting time), chi = kappa/(2D)
/// with C0 = 1 (diffusive time over relaxation time).
struct DimensionlessPoint {
  double zeta = 0.0;
  double chi = 0.0;

  static DimensionlessPoint from_physical(double kappa, double diffusion, double trap_center = 1.0);
  void validate() const;
};

/// Stationary density of x for exponential waiting times (k = 1): the
/// equilibrium Gaussian of width 1/sqrt(2 chi) convolved with the
/// (1 - z^2)^(zeta - 1) trap-position density on (-1, 1).
/// Throws NumericError when the quadrature cannot reach 1e-8 absolute.
double stationary_density(double x, const DimensionlessPoint& p);

/// Second derivative of the k = 1 stationary density at the origin.
double density_curvature_origin(const DimensionlessPoint& p);

/// chi - (zeta + 1/2) 1F1(1/2, zeta + 1/2, -chi) / 1F1(3/2, zeta + 3/2, -chi);
/// vanishes on the unimodal/bimodal boundary.
double phase_boundary_residual(double zeta, double chi);

/**
 * @brief Critical chi* at which p''(0) changes sign.
 *
 * Bisection on log chi over [1e-3, 1e3], widened by decades when the sign
 * does not change. A boundary exists only for zeta < 1; there chi* grows
 * without bound as zeta -> 1 and tends to 1/2 as zeta -> 0. Throws
 * InvalidParameter outside zeta in (1e-3, 1e3) and NumericError for
 * zeta >= 1 or when no bracket is found.
 */
double phase_boundary(double zeta);

/// Complex decay rates k q_n and weights Q_n of the telegraph
/// autocorrelation, C_C(t) = C0^2 sum_n Q_n exp(-k q_n t).
struct SpectralModes {
  int k = 1;
  std::vector<std::complex<double>> q;
  std::vector<std::complex<double>> Q;
};

SpectralModes spectral_modes(int k);

double latent_autocorr(int k, double t, double trap_center = 1.0);

/// Stationary autocorrelation <X(s+t) X(s)> of the SSOU position.
double x_autocorr(int k, double kappa, double diffusion, double t, double trap_center = 1.0);

/// x_autocorr at t = 0.
double variance_x(int k, double kappa, double diffusion, double trap_center = 1.0);

/// <x_t c_t> in units of C0, closed form.
double cov_xc(int k, double kappa);

/// Same quantity as a mode sum, kappa sum_n Q_n / (k q_n + kappa).
double cov_xc_modes(int k, double kappa);

/// Power spectra with S(w) = int C(t) e^{-iwt} dt and C(t) = (1/2pi) int S(w) e^{iwt} dw.
double psd_c(int k, double omega, double trap_center = 1.0);
double psd_x(int k, double kappa, double diffusion, double omega, double trap_center = 1.0);

}  // namespace ssou::theory
