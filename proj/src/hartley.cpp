#include "ssh/hartley.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ssh/errors.hpp"

namespace ssh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

struct Twiddles {
  std::vector<double> cos;
  std::vector<double> sin;
  std::vector<double> kernel;  // cos + s sin

  explicit Twiddles(std::size_t n) : cos(n), sin(n), kernel(n) {
    for (std::size_t k = 0; k < n; ++k) {
      const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      cos[k] = std::cos(theta);
      sin[k] = std::sin(theta);
      kernel[k] = cos[k] + kHartleySineSign * sin[k];
    }
  }
};

// Decimation in time. With E, O the transforms of the even and odd samples
// (length m = n/2) and phi = 2*pi*k/n:
//   H(k) = E(k mod m) + cos(phi) O(k mod m) + s sin(phi) O(-k mod m)
// where s is kHartleySineSign.
void fht_radix2(const double* in, std::size_t stride, std::size_t n, double* out,
                std::size_t tw_step, const Twiddles& tw) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t m = n / 2;
  std::vector<double> halves(n);
  fht_radix2(in, 2 * stride, m, halves.data(), 2 * tw_step, tw);
  fht_radix2(in + stride, 2 * stride, m, halves.data() + m, 2 * tw_step, tw);
  const double* even = halves.data();
  const double* odd = halves.data() + m;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t km = k % m;
    const std::size_t kneg = (m - km) % m;
    const std::size_t t = k * tw_step;
    out[k] = even[km] + tw.cos[t] * odd[km] + kHartleySineSign * tw.sin[t] * odd[kneg];
  }
}

void dht1_direct(const double* in, std::size_t stride, std::size_t n, double* out,
                 const Twiddles& tw) {
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    std::size_t t = 0;  // k*j mod n
    for (std::size_t j = 0; j < n; ++j) {
      acc += in[j * stride] * tw.kernel[t];
      t += k;
      if (t >= n) t -= n;
    }
    out[k] = acc;
  }
}

void dht1_strided(const double* in, std::size_t stride, std::size_t n, double* out,
                  const Twiddles& tw) {
  if (is_power_of_two(n)) {
    fht_radix2(in, stride, n, out, 1, tw);
  } else {
    dht1_direct(in, stride, n, out, tw);
  }
}

Matrix transform_2d(const Matrix& w) {
  const std::size_t d1 = w.rows();
  const std::size_t d2 = w.cols();

  // Separable pass: S = (1D along rows) then (1D along columns).
  Matrix rows_done(d1, d2);
  const Twiddles tw_cols(d2);
  for (std::size_t x = 0; x < d1; ++x) {
    dht1_strided(w.data().data() + x * d2, 1, d2, rows_done.data().data() + x * d2, tw_cols);
  }
  Matrix separable(d1, d2);
  const Twiddles tw_rows(d1);
  std::vector<double> column(d1);
  for (std::size_t y = 0; y < d2; ++y) {
    dht1_strided(rows_done.data().data() + y, d2, d1, column.data(), tw_rows);
    for (std::size_t u = 0; u < d1; ++u) separable(u, y) = column[u];
  }

  // cas(a+b) = 1/2 [cas a cas b + cas a cas(-b) + cas(-a) cas b - cas(-a) cas(-b)]
  // holds for either kernel sign, so the 2D kernel follows from index reversal.
  Matrix out(d1, d2);
  for (std::size_t u = 0; u < d1; ++u) {
    const std::size_t un = (d1 - u) % d1;
    for (std::size_t v = 0; v < d2; ++v) {
      const std::size_t vn = (d2 - v) % d2;
      out(u, v) = 0.5 * (separable(u, v) + separable(u, vn) + separable(un, v) -
                         separable(un, vn));
    }
  }
  return out;
}

}  // namespace

double cas(double theta) { return std::cos(theta) + kHartleySineSign * std::sin(theta); }

std::vector<double> dht1(std::span<const double> x) {
  if (x.empty()) throw DimensionError("dht1: empty input");
  std::vector<double> out(x.size());
  const Twiddles tw(x.size());
  dht1_strided(x.data(), 1, x.size(), out.data(), tw);
  return out;
}

Spectrum dht2(const Matrix& w) {
  ensure_finite(w, "dht2 input");
  return Spectrum(transform_2d(w));
}

Matrix idht2(const Spectrum& h) {
  ensure_finite(h.coeffs(), "idht2 input");
  Matrix out = transform_2d(h.coeffs());
  out *= 1.0 / static_cast<double>(h.size());
  return out;
}

ComplexSpectrum dft2_oracle(const Matrix& w) {
  const std::size_t d1 = w.rows();
  const std::size_t d2 = w.cols();
  if (d1 > kDftOracleMaxSide || d2 > kDftOracleMaxSide) {
    throw ContractError("dft2_oracle: " + std::to_string(d1) + "x" + std::to_string(d2) +
                        " exceeds the " + std::to_string(kDftOracleMaxSide) +
                        " per-side cap of the direct-summation oracle");
  }
  ComplexSpectrum f{Spectrum(d1, d2), Spectrum(d1, d2)};
  for (std::size_t u = 0; u < d1; ++u) {
    for (std::size_t v = 0; v < d2; ++v) {
      double re = 0.0;
      double im = 0.0;
      for (std::size_t x = 0; x < d1; ++x) {
        for (std::size_t y = 0; y < d2; ++y) {
          // Reduce the phase in integer arithmetic before scaling.
          const double phase =
              kTwoPi * (static_cast<double>((u * x) % d1) / static_cast<double>(d1) +
                        static_cast<double>((v * y) % d2) / static_cast<double>(d2));
          re += w(x, y) * std::cos(phase);
          im += w(x, y) * std::sin(phase);
        }
      }
      f.real(u, v) = re;
      f.imag(u, v) = im;
    }
  }
  return f;
}

}  // namespace ssh
