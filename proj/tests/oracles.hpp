#pragma once

// Reference implementations used only by tests. None of them call into the
// library's transform or selection code.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ssh/numerics.hpp"

namespace ssh::oracle {

// Triple loop, no blocking, no reordering.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

// Direct O((d1*d2)^2) evaluation of the 2D kernel cos(t) - sin(t).
inline Matrix dht2_direct(const Matrix& w) {
  const std::size_t d1 = w.rows();
  const std::size_t d2 = w.cols();
  Matrix h(d1, d2);
  for (std::size_t u = 0; u < d1; ++u) {
    for (std::size_t v = 0; v < d2; ++v) {
      double s = 0.0;
      for (std::size_t x = 0; x < d1; ++x) {
        for (std::size_t y = 0; y < d2; ++y) {
          const double t = 2.0 * std::numbers::pi *
                           (static_cast<double>((u * x) % d1) / static_cast<double>(d1) +
                            static_cast<double>((v * y) % d2) / static_cast<double>(d2));
          s += w(x, y) * (std::cos(t) - std::sin(t));
        }
      }
      h(u, v) = s;
    }
  }
  return h;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace ssh::oracle
