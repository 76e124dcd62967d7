#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace ssh {

// Dense row-major matrix of doubles. Dimensions are always >= 1.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> data)
      : Matrix(rows, cols, std::vector<double>(data)) {}

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix filled(std::size_t rows, std::size_t cols, double value);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  // Bitwise equality of shape and contents.
  bool operator==(const Matrix& other) const noexcept;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& a);
double squared_norm(const Matrix& a);
// ||a - b||_F / max(||b||_F, tiny)
double relative_error(const Matrix& a, const Matrix& b);

// Throws NumericError naming `what` if any entry is NaN/Inf.
void ensure_finite(const Matrix& m, const char* what);

// Deterministic PRNG: xoshiro256** seeded through splitmix64.
//
// The four state words are the first four splitmix64 outputs for the seed.
// uniform() takes the top 53 bits of next_u64(); below(n) uses rejection on
// the top of the 64-bit range so every residue is equally likely; normal()
// is Box-Muller without caching the second variate. Streams are identical on
// every platform for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;                       // [0, 1)
  double uniform(double lo, double hi) noexcept;   // [lo, hi)
  std::uint64_t below(std::uint64_t bound);        // [0, bound), bound >= 1
  double normal() noexcept;                        // N(0, 1)

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Kaiming-uniform with linear gain: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
std::vector<double> kaiming_init(Rng& rng, std::size_t count, std::size_t fan_in);
double kaiming_bound(std::size_t fan_in);

Matrix random_normal(Rng& rng, std::size_t rows, std::size_t cols, double stddev = 1.0);
Matrix random_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi);

using LossFn = std::function<double(const Matrix&)>;

// Central-difference gradient of loss_fn at `at`, one entry at a time.
Matrix finite_diff_grad(const LossFn& loss_fn, const Matrix& at, double epsilon);

}  // namespace ssh
