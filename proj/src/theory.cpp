// SPDX-License-Identifier: Apache-2.0
#include "ssou/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ssou/error.hpp"

namespace ssou::theory {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void require_k(int k) {
  if (k < 1) throw InvalidParameter("memory_k must be >= 1");
}

boost::math::quadrature::tanh_sinh<double>& integrator() {
  thread_local boost::math::quadrature::tanh_sinh<double> instance;
  return instance;
}

// (lambda e^{-kappa t} - kappa e^{-lambda t}) / (lambda^2 - kappa^2), with the
// lambda -> kappa limit taken explicitly.
cplx relaxation_kernel(cplx lambda, double kappa, double t) {
  const cplx denom = lambda * lambda - kappa * kappa;
  if (std::abs(denom) < 1e-8) return std::exp(-kappa * t) * (1.0 + kappa * t) / (2.0 * kappa);
  return (lambda * std::exp(-kappa * t) - kappa * std::exp(-lambda * t)) / denom;
}

}  // namespace

DimensionlessPoint DimensionlessPoint::from_physical(double kappa, double diffusion,
                                                     double trap_center) {
  if (!(kappa > 0.0) || !(diffusion > 0.0) || !(trap_center > 0.0))
    throw InvalidParameter("kappa, diffusion and trap_center must be > 0");
  return {1.0 / kappa, kappa * trap_center * trap_center / (2.0 * diffusion)};
}

void DimensionlessPoint::validate() const {
  if (!(zeta > 0.0) || !(chi > 0.0) || !std::isfinite(zeta) || !std::isfinite(chi))
    throw InvalidParameter("zeta and chi must be finite and > 0");
}

double stationary_density(double x, const DimensionlessPoint& p) {
  p.validate();
  if (!std::isfinite(x)) throw InvalidParameter("density argument must be finite");
  const double zeta = p.zeta;
  const double chi = p.chi;

  // The quadrature cannot resolve the endpoint spike closer than ~4*DBL_MIN;
  // the mass it misses there scales like that distance to the power zeta.
  const double log_min_gap = std::log(4.0 * std::numeric_limits<double>::min());
  if (zeta < 1.0 && zeta * log_min_gap > std::log(1e-11)) {
    std::ostringstream msg;
    msg << "stationary_density: endpoint singularity too strong for quadrature (zeta=" << zeta
        << ")";
    throw NumericError(msg.str());
  }

  const double norm = std::exp(std::lgamma(zeta + 0.5) - std::lgamma(zeta)) / std::sqrt(kPi);
  const double gauss = std::sqrt(chi / kPi);

  // f(z, zc): zc is the signed distance to the nearer interval end, which
  // keeps 1 - z^2 accurate right next to z = +-1.
  x = std::abs(x);  // the density is even; this keeps p(x) == p(-x) bitwise
  auto piece = [&](double a, double b) {
    auto f = [&](double z, double zc) {
      double one_minus_sq;
      if (a == -1.0 && zc < 0.0) {
        const double d = -zc;
        one_minus_sq = d * (2.0 - d);
      } else if (b == 1.0 && zc > 0.0) {
        one_minus_sq = zc * (2.0 - zc);
      } else {
        one_minus_sq = (1.0 - z) * (1.0 + z);
      }
      if (one_minus_sq <= 0.0) return 0.0;
      const double u = x - z;
      return gauss * std::exp(-chi * u * u) * std::pow(one_minus_sq, zeta - 1.0);
    };
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    double value = 0.0;
    try {
      value = integrator().integrate(f, a, b, 1e-13, &error, &l1, &levels);
    } catch (const std::exception& e) {
      throw NumericError(std::string("stationary_density quadrature failed: ") + e.what());
    }
    if (!std::isfinite(value) || norm * error > 1e-9) {
      std::ostringstream msg;
      msg << "stationary_density quadrature did not converge (x=" << x << ", zeta=" << zeta
          << ", chi=" << chi << ", error estimate " << norm * error << ")";
      throw NumericError(msg.str());
    }
    return value;
  };

  if (x >= 1.0) return norm * piece(-1.0, 1.0);
  // Split at the Gaussian peak so neither piece hides a narrow interior bump.
  return norm * (piece(-1.0, x) + piece(x, 1.0));
}

double density_curvature_origin(const DimensionlessPoint& p) {
  p.validate();
  const double zeta = p.zeta;
  const double chi = p.chi;
  const double f_half = kummer_1f1(0.5, zeta + 0.5, -chi);
  const double f_three_half = kummer_1f1(1.5, zeta + 1.5, -chi);
  return 2.0 * std::pow(chi, 1.5) / std::sqrt(kPi) *
         (chi / (zeta + 0.5) * f_three_half - f_half);
}

double phase_boundary_residual(double zeta, double chi) {
  DimensionlessPoint{zeta, chi}.validate();
  return chi - (zeta + 0.5) * kummer_1f1(0.5, zeta + 0.5, -chi) /
                   kummer_1f1(1.5, zeta + 1.5, -chi);
}

double phase_boundary(double zeta) {
  if (!(zeta > 1e-3 && zeta < 1e3)) throw InvalidParameter("phase_boundary: zeta outside (1e-3, 1e3)");
  // (1 - z^2)^(zeta - 1) is log-concave for zeta >= 1, so its Gaussian convolution is unimodal.
  if (zeta >= 1.0) throw NumericError("phase_boundary: no bimodal phase for zeta >= 1");
  // Sign of p''(0), free of the positive prefactors.
  auto side = [zeta](double log_chi) {
    const double chi = std::exp(log_chi);
    return chi * kummer_1f1(1.5, zeta + 1.5, -chi) - (zeta + 0.5) * kummer_1f1(0.5, zeta + 0.5, -chi);
  };
  double lo = std::log(1e-3);
  double hi = std::log(1e3);
  double f_lo = side(lo);
  double f_hi = side(hi);
  for (int widen = 0; widen < 4 && (f_lo > 0.0) == (f_hi > 0.0); ++widen) {
    lo -= std::log(10.0);
    hi += std::log(10.0);
    f_lo = side(lo);
    f_hi = side(hi);
  }
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    std::ostringstream msg;
    msg << "phase_boundary: no sign change of p''(0) for chi in [" << std::exp(lo) << ", "
        << std::exp(hi) << "] at zeta=" << zeta << " (no bimodal phase for zeta >= 1)";
    throw NumericError(msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = side(mid);
    if (f_mid == 0.0) return std::exp(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

SpectralModes spectral_modes(int k) {
  require_k(k);
  SpectralModes modes;
  modes.k = k;
  modes.q.reserve(k);
  modes.Q.reserve(k);
  for (int n = 0; n < k; ++n) {
    const cplx q = 1.0 - std::polar(1.0, kPi * (1.0 + 2.0 * n) / k);
    const cplx kq = static_cast<double>(k) * q;
    modes.q.push_back(q);
    modes.Q.push_back(-4.0 * (1.0 - q) / (kq * kq));
  }
  return modes;
}

double latent_autocorr(int k, double t, double trap_center) {
  if (!(t >= 0.0)) throw InvalidParameter("lag must be >= 0");
  const SpectralModes modes = spectral_modes(k);
  cplx sum = 0.0;
  for (int n = 0; n < k; ++n) sum += modes.Q[n] * std::exp(-static_cast<double>(k) * modes.q[n] * t);
  return trap_center * trap_center * sum.real();
}

double x_autocorr(int k, double kappa, double diffusion, double t, double trap_center) {
  if (!(kappa > 0.0) || !(diffusion > 0.0)) throw InvalidParameter("kappa and diffusion must be > 0");
  if (!(t >= 0.0)) throw InvalidParameter("lag must be >= 0");
  const SpectralModes modes = spectral_modes(k);
  cplx sum = 0.0;
  for (int n = 0; n < k; ++n)
    sum += modes.Q[n] * relaxation_kernel(static_cast<double>(k) * modes.q[n], kappa, t);
  return diffusion / kappa * std::exp(-kappa * t) +
         trap_center * trap_center * kappa * sum.real();
}

double variance_x(int k, double kappa, double diffusion, double trap_center) {
  return x_autocorr(k, kappa, diffusion, 0.0, trap_center);
}

double cov_xc(int k, double kappa) {
  require_k(k);
  if (!(kappa > 0.0)) throw InvalidParameter("kappa must be > 0");
  const double g = std::pow(1.0 + kappa / k, k);
  return 1.0 - 2.0 / kappa * (g - 1.0) / (g + 1.0);
}

double cov_xc_modes(int k, double kappa) {
  if (!(kappa > 0.0)) throw InvalidParameter("kappa must be > 0");
  const SpectralModes modes = spectral_modes(k);
  cplx sum = 0.0;
  for (int n = 0; n < k; ++n) sum += modes.Q[n] / (static_cast<double>(k) * modes.q[n] + kappa);
  return kappa * sum.real();
}

double psd_c(int k, double omega, double trap_center) {
  require_k(k);
  const double c2 = trap_center * trap_center;
  if (omega == 0.0) return c2 / k;
  const double u = omega / k;
  const double log_r2 = k * std::log1p(u * u);
  // Written in 1/R so large k * omega neither overflows nor cancels.
  const double inv_r = std::exp(-0.5 * log_r2);
  const double phi = k * std::atan(u);
  const double num = -std::expm1(-log_r2);
  const double den = 1.0 + inv_r * inv_r + 2.0 * inv_r * std::cos(phi);
  return 4.0 * c2 / (omega * omega) * num / den;
}

double psd_x(int k, double kappa, double diffusion, double omega, double trap_center) {
  if (!(kappa > 0.0) || !(diffusion > 0.0)) throw InvalidParameter("kappa and diffusion must be > 0");
  return (2.0 * diffusion + kappa * kappa * psd_c(k, omega, trap_center)) /
         (kappa * kappa + omega * omega);
}

}  // namespace ssou::theory
