// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>

#include "ssou/error.hpp"
#include "ssou/special.hpp"

namespace {

using ssou::theory::kummer_1f1;
using ssou::theory::kummer_1f1_asymptotic;
using ssou::theory::kummer_1f1_series;

struct Frozen {
  double a, b, z, value;
};

// 40-digit mpmath evaluations, rounded to 17 significant digits.
constexpr Frozen kFrozen[] = {
    {0.5, 1.5, -0.7, 0.80849580691258348},
    {1.5, 2.0, 3.2, 14.040813100817478},
    {0.5, 0.6, -25.0, 0.031906172621692819},
    {1.5, 1.6, -29.0, 0.0006320080939440915},
    {0.5, 1.1, -45.0, 0.095665764136896888},
    {1.5, 2.5, -120.0, 0.00101126349612276},
    {0.5, 10.5, -300.0, 0.17765560042406124},
    {1.5, 11.5, -1000.0, 0.0010231019415555088},
    {0.5, 1.5, -10000.0, 0.0088622692545275801},
    {2.0, 3.0, 10.0, 3964.783843065209},
    {0.25, 0.75, -5.0, 0.47765143238952966},
    {3.0, 1.5, -60.0, 1.982122740739563e-6},
    {0.5, 0.51, -0.01, 0.99024461213836885},
    {1.0, 2.0, 40.0, 5884631670925499.6},
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

TEST(Kummer1F1, MatchesFrozenHighPrecisionValues) {
  for (const auto& f : kFrozen) {
    EXPECT_LT(rel(kummer_1f1(f.a, f.b, f.z), f.value), 1e-11) << f.a << ' ' << f.b << ' ' << f.z;
  }
}

TEST(Kummer1F1, SeriesAndAsymptoticRoutesAgree) {
  for (double b : {0.6, 1.5, 3.5, 10.5}) {
    for (double z : {-40.0, -80.0, -200.0, -1000.0}) {
      const auto asym = kummer_1f1_asymptotic(0.5, b, z);
      if (!asym) continue;
      EXPECT_LT(rel(*asym, kummer_1f1_series(0.5, b, z)), 1e-11) << b << ' ' << z;
    }
  }
}

TEST(Kummer1F1, AgreesWithBoostOnBoundaryArguments) {
  for (double zeta : {0.05, 0.3, 0.7, 0.95}) {
    for (double chi : {0.01, 0.5, 2.0, 10.0, 35.0}) {
      const double ours = kummer_1f1(0.5, zeta + 0.5, -chi);
      const double ref = boost::math::hypergeometric_1F1(0.5, zeta + 0.5, -chi);
      EXPECT_LT(rel(ours, ref), 1e-10) << zeta << ' ' << chi;
    }
  }
}

TEST(Kummer1F1, AsymptoticDeclinesAtSmallArgument) {
  EXPECT_FALSE(kummer_1f1_asymptotic(0.5, 1.5, -2.0).has_value());
  EXPECT_FALSE(kummer_1f1_asymptotic(0.5, 1.5, 2.0).has_value());
}

TEST(Kummer1F1, SpecialValues) {
  EXPECT_EQ(kummer_1f1(0.7, 1.3, 0.0), 1.0);
  // 1F1(a; a; z) = e^z
  EXPECT_LT(rel(kummer_1f1(1.7, 1.7, -3.0), std::exp(-3.0)), 1e-13);
  EXPECT_THROW(kummer_1f1(0.5, -2.0, 1.0), ssou::InvalidParameter);
  EXPECT_THROW(kummer_1f1(0.5, 1.5, std::nan("")), ssou::InvalidParameter);
}

}  // namespace
