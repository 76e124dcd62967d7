#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssh/hartley.hpp"
#include "ssh/numerics.hpp"

namespace ssh {

struct Position {
  std::uint32_t u = 0;
  std::uint32_t v = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

struct SelectionConfig {
  std::size_t n = 1;       // total trainable coefficients
  double delta = 1.0;      // energy ratio in [0, 1]
  std::uint64_t seed = 0;  // drives the random remainder

  // Throws ContractError for delta outside [0,1] or n == 0, CapacityError for
  // n > d1*d2.
  void validate(std::size_t d1, std::size_t d2) const;

  // floor(delta * n). A 1e-9 slack absorbs products such as 0.29 * 100 that
  // land just below an integer in binary floating point.
  std::size_t energy_count() const;
};

// The set of trainable spectral positions, split into the energy-ranked part
// and the seeded random remainder. Energy positions come first in every
// ordered view.
class FrequencyMask {
 public:
  // Validates bounds, duplicates, and disjointness; throws ContractError.
  FrequencyMask(std::size_t rows, std::size_t cols, std::vector<Position> energy_positions,
                std::vector<Position> random_positions);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return energy_.size() + random_.size(); }

  const std::vector<Position>& energy_positions() const noexcept { return energy_; }
  const std::vector<Position>& random_positions() const noexcept { return random_; }
  // Energy positions followed by random positions.
  std::vector<Position> positions() const;

  bool contains(Position p) const;
  // Dense 0/1 indicator with exactly size() ones.
  Matrix indicator() const;

  // FNV-1a over the shape and the ordered position list.
  std::uint64_t hash() const noexcept;

  friend bool operator==(const FrequencyMask& a, const FrequencyMask& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.energy_ == b.energy_ &&
           a.random_ == b.random_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Position> energy_;
  std::vector<Position> random_;
  std::vector<bool> member_;
};

// E(u,v) = H(u,v)^2.
Matrix energy_map(const Spectrum& h);

// Row-major cell indices ordered by descending energy, ties by ascending index.
std::vector<std::size_t> energy_ranking(const Matrix& energy);

// Top floor(delta*n) cells by energy plus n - floor(delta*n) cells drawn
// without replacement (partial Fisher-Yates seeded by cfg.seed) from the
// remaining cells.
FrequencyMask select_frequencies(const Spectrum& h0, const SelectionConfig& cfg);

// M o G: keeps masked-in entries, zeroes the rest.
Spectrum apply_mask(const Spectrum& grad_spectrum, const FrequencyMask& mask);

}  // namespace ssh
