#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ssh/errors.hpp"
#include "ssh/hartley.hpp"

using namespace ssh;

namespace {

Matrix re_minus_im(const ComplexSpectrum& f) {
  return f.real.coeffs() - f.imag.coeffs();
}

}  // namespace

TEST(Cas, Values) {
  EXPECT_DOUBLE_EQ(cas(0.0), 1.0);
  EXPECT_NEAR(cas(std::numbers::pi / 4), 0.0, 1e-15);
  EXPECT_NEAR(cas(std::numbers::pi / 2), -1.0, 1e-15);
  EXPECT_EQ(kHartleySineSign, -1.0);
}

TEST(Dht2, ConstantIsDcOnly) {
  const double c = 2.5;
  const Spectrum h = dht2(Matrix::filled(4, 4, c));
  for (std::size_t u = 0; u < 4; ++u) {
    for (std::size_t v = 0; v < 4; ++v) {
      EXPECT_NEAR(h(u, v), (u == 0 && v == 0) ? 16 * c : 0.0, 1e-12);
    }
  }
}

TEST(Dht2, ImpulseGivesAllOnes) {
  Matrix w(4, 4);
  w(0, 0) = 1.0;
  const Spectrum h = dht2(w);
  for (double x : h.coeffs().data()) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(Dht2, EmptyInputRejected) {
  EXPECT_THROW(dht1(std::span<const double>{}), DimensionError);
}

TEST(Dht2, MatchesDirectKernel) {
  Rng rng(10);
  for (auto [d1, d2] : {std::pair{1, 1}, {1, 8}, {8, 1}, {3, 5}, {4, 4}, {6, 8}, {8, 8}, {7, 16}}) {
    const Matrix w = random_normal(rng, d1, d2);
    EXPECT_LE(relative_error(dht2(w).coeffs(), oracle::dht2_direct(w)), 1e-12)
        << d1 << "x" << d2;
  }
}

TEST(Dht2, EqualsReMinusImOfDft) {
  Rng rng(11);
  const Matrix w = random_normal(rng, 8, 8);
  const Matrix want = re_minus_im(dft2_oracle(w));
  EXPECT_LE(oracle::max_abs_diff(dht2(w).coeffs(), want), 1e-9);
}

TEST(DftOracle, ConstantAndHermitian) {
  const ComplexSpectrum f = dft2_oracle(Matrix::filled(3, 4, 1.0));
  EXPECT_NEAR(f.real(0, 0), 12.0, 1e-12);
  for (std::size_t i = 0; i < 12; ++i) {
    if (i != 0) EXPECT_NEAR(f.real.coeffs().data()[i], 0.0, 1e-12);
    EXPECT_NEAR(f.imag.coeffs().data()[i], 0.0, 1e-12);
  }

  Rng rng(12);
  const Matrix w = random_normal(rng, 5, 6);
  const ComplexSpectrum g = dft2_oracle(w);
  for (std::size_t u = 0; u < 5; ++u) {
    for (std::size_t v = 0; v < 6; ++v) {
      const std::size_t cu = (5 - u) % 5, cv = (6 - v) % 6;
      EXPECT_NEAR(g.real(u, v), g.real(cu, cv), 1e-10);
      EXPECT_NEAR(g.imag(u, v), -g.imag(cu, cv), 1e-10);
    }
  }
}

TEST(DftOracle, RefusesLargeInputs) {
  EXPECT_THROW(dft2_oracle(Matrix(kDftOracleMaxSide + 1, 2)), ContractError);
}

TEST(Idht2, Involution) {
  Rng rng(13);
  const std::size_t sides[] = {2, 3, 4, 8, 15, 16, 32};
  for (std::size_t d1 : sides) {
    for (std::size_t d2 : sides) {
      const Matrix w = random_normal(rng, d1, d2);
      EXPECT_LE(relative_error(idht2(dht2(w)), w), 1e-9) << d1 << "x" << d2;
    }
  }
}

TEST(Idht2, ZeroAndUnitCoefficient) {
  EXPECT_EQ(idht2(Spectrum(3, 5)), Matrix(3, 5));

  Spectrum h(4, 4);
  h(1, 0) = 1.0;
  const Matrix w = idht2(h);
  for (std::size_t x = 0; x < 4; ++x) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(x) / 4.0;
    for (std::size_t y = 0; y < 4; ++y) {
      EXPECT_NEAR(w(x, y), (std::cos(t) - std::sin(t)) / 16.0, 1e-15);
    }
  }
}

TEST(Dht2, Linearity) {
  Rng rng(14);
  const Matrix x = random_normal(rng, 8, 12);
  const Matrix y = random_normal(rng, 8, 12);
  const double a = 1.7, b = -0.3;
  const Matrix lhs = dht2(a * x + b * y).coeffs();
  const Matrix rhs = a * dht2(x).coeffs() + b * dht2(y).coeffs();
  EXPECT_LE(oracle::max_abs_diff(lhs, rhs), 1e-10);
}

TEST(Dht2, ParsevalAndSelfInverse) {
  Rng rng(15);
  for (auto [d1, d2] : {std::pair{2, 2}, {3, 7}, {16, 16}, {15, 17}, {32, 32}}) {
    const Matrix w = random_normal(rng, d1, d2);
    const Spectrum h = dht2(w);
    const double cells = static_cast<double>(d1 * d2);
    const double want = cells * squared_norm(w);
    EXPECT_LE(std::abs(squared_norm(h.coeffs()) - want) / want, 1e-8);
    EXPECT_LE(relative_error(dht2(h.coeffs()).coeffs(), cells * w), 1e-9);
  }
}

TEST(Dht1, RadixAndDirectPathsAgree) {
  Rng rng(16);
  for (std::size_t n : {1u, 2u, 4u, 8u, 64u, 5u, 12u}) {
    const Matrix row = random_normal(rng, 1, n);
    const auto fast = dht1(row.data());
    const Matrix direct = oracle::dht2_direct(row);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(fast[k], direct(0, k), 1e-11) << n;
  }
}
