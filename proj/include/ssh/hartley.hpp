#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ssh/numerics.hpp"

namespace ssh {

// Sign applied to the sine term of the Hartley kernel.
//
// The kernel used throughout is cos(theta) - sin(theta). Classical literature
// writes cas = cos + sin; with this sign the forward transform equals
// Re(F) - Im(F) where F is the DFT with a positive exponent (see
// dft2_oracle). Every oracle test depends on this constant; do not flip it.
inline constexpr double kHartleySineSign = -1.0;

// Hartley kernel: cos(theta) + kHartleySineSign * sin(theta).
double cas(double theta);

// 2D Hartley spectrum H(u, v), same shape as the matrix it came from.
class Spectrum {
 public:
  Spectrum(std::size_t rows, std::size_t cols) : coeffs_(rows, cols) {}
  explicit Spectrum(Matrix coeffs) : coeffs_(std::move(coeffs)) {}

  std::size_t rows() const noexcept { return coeffs_.rows(); }
  std::size_t cols() const noexcept { return coeffs_.cols(); }
  std::size_t size() const noexcept { return coeffs_.size(); }

  double& operator()(std::size_t u, std::size_t v) noexcept { return coeffs_(u, v); }
  double operator()(std::size_t u, std::size_t v) const noexcept { return coeffs_(u, v); }

  const Matrix& coeffs() const noexcept { return coeffs_; }
  Matrix& coeffs() noexcept { return coeffs_; }

 private:
  Matrix coeffs_;
};

// 1D transform with the same kernel, unnormalized. Radix-2 fast path for
// power-of-two lengths, direct O(n^2) summation otherwise.
std::vector<double> dht1(std::span<const double> x);

// Forward 2D transform, unnormalized:
//   H(u,v) = sum_x sum_y W(x,y) * cas(2*pi*u*x/d1 + 2*pi*v*y/d2)
Spectrum dht2(const Matrix& w);

// Inverse 2D transform: dht2 applied to the coefficients, scaled by 1/(d1*d2).
Matrix idht2(const Spectrum& h);

// Largest side accepted by dft2_oracle.
inline constexpr std::size_t kDftOracleMaxSide = 64;

struct ComplexSpectrum {
  Spectrum real;
  Spectrum imag;
};

// Direct-summation 2D DFT with a positive exponent:
//   F(u,v) = sum_x sum_y W(x,y) * exp(+i*(2*pi*u*x/d1 + 2*pi*v*y/d2))
// so that dht2(W) = Re(F) - Im(F). The textbook (negative exponent) DFT is
// the complex conjugate of this one. O((d1*d2)^2); refuses sides above
// kDftOracleMaxSide.
ComplexSpectrum dft2_oracle(const Matrix& w);

}  // namespace ssh
