#include "ssh/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ssh/errors.hpp"

namespace ssh {

void SelectionConfig::validate(std::size_t d1, std::size_t d2) const {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw ContractError("selection: delta must lie in [0, 1], got " + std::to_string(delta));
  }
  if (n == 0) throw ContractError("selection: n must be at least 1");
  if (n > d1 * d2) {
    throw CapacityError("selection: n = " + std::to_string(n) + " exceeds the " +
                        std::to_string(d1 * d2) + " available coefficients");
  }
}

std::size_t SelectionConfig::energy_count() const {
  const double raw = std::floor(delta * static_cast<double>(n) + 1e-9);
  return std::min(n, static_cast<std::size_t>(raw));
}

FrequencyMask::FrequencyMask(std::size_t rows, std::size_t cols,
                             std::vector<Position> energy_positions,
                             std::vector<Position> random_positions)
    : rows_(rows),
      cols_(cols),
      energy_(std::move(energy_positions)),
      random_(std::move(random_positions)),
      member_(rows * cols, false) {
  if (rows == 0 || cols == 0) throw DimensionError("mask: shape must be positive");
  auto mark = [this](const Position& p) {
    if (p.u >= rows_ || p.v >= cols_) {
      throw ContractError("mask: position (" + std::to_string(p.u) + "," + std::to_string(p.v) +
                          ") out of bounds");
    }
    const std::size_t idx = std::size_t{p.u} * cols_ + p.v;
    if (member_[idx]) {
      throw ContractError("mask: duplicate position (" + std::to_string(p.u) + "," +
                          std::to_string(p.v) + ")");
    }
    member_[idx] = true;
  };
  std::for_each(energy_.begin(), energy_.end(), mark);
  std::for_each(random_.begin(), random_.end(), mark);
}

std::vector<Position> FrequencyMask::positions() const {
  std::vector<Position> all = energy_;
  all.insert(all.end(), random_.begin(), random_.end());
  return all;
}

bool FrequencyMask::contains(Position p) const {
  if (p.u >= rows_ || p.v >= cols_) return false;
  return member_[std::size_t{p.u} * cols_ + p.v];
}

Matrix FrequencyMask::indicator() const {
  Matrix m(rows_, cols_);
  for (std::size_t i = 0; i < member_.size(); ++i) m.data()[i] = member_[i] ? 1.0 : 0.0;
  return m;
}

std::uint64_t FrequencyMask::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(rows_);
  mix(cols_);
  mix(energy_.size());
  for (const auto& p : energy_) mix((std::uint64_t{p.u} << 32) | p.v);
  for (const auto& p : random_) mix((std::uint64_t{p.u} << 32) | p.v);
  return h;
}

Matrix energy_map(const Spectrum& h) {
  Matrix e(h.rows(), h.cols());
  const auto src = h.coeffs().data();
  auto dst = e.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * src[i];
  return e;
}

std::vector<std::size_t> energy_ranking(const Matrix& energy) {
  std::vector<std::size_t> order(energy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto e = energy.data();
  std::stable_sort(order.begin(), order.end(),
                   [&e](std::size_t a, std::size_t b) { return e[a] > e[b]; });
  return order;
}

FrequencyMask select_frequencies(const Spectrum& h0, const SelectionConfig& cfg) {
  const std::size_t d1 = h0.rows();
  const std::size_t d2 = h0.cols();
  cfg.validate(d1, d2);

  const std::size_t n_energy = cfg.energy_count();
  const std::size_t n_random = cfg.n - n_energy;
  auto to_pos = [d2](std::size_t idx) {
    return Position{static_cast<std::uint32_t>(idx / d2), static_cast<std::uint32_t>(idx % d2)};
  };

  const std::vector<std::size_t> ranking = energy_ranking(energy_map(h0));
  std::vector<Position> energy_set;
  energy_set.reserve(n_energy);
  std::vector<bool> taken(d1 * d2, false);
  for (std::size_t i = 0; i < n_energy; ++i) {
    energy_set.push_back(to_pos(ranking[i]));
    taken[ranking[i]] = true;
  }

  std::vector<std::size_t> pool;
  pool.reserve(d1 * d2 - n_energy);
  for (std::size_t idx = 0; idx < d1 * d2; ++idx) {
    if (!taken[idx]) pool.push_back(idx);
  }
  Rng rng(cfg.seed);
  std::vector<Position> random_set;
  random_set.reserve(n_random);
  for (std::size_t i = 0; i < n_random; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    random_set.push_back(to_pos(pool[i]));
  }
  return FrequencyMask(d1, d2, std::move(energy_set), std::move(random_set));
}

Spectrum apply_mask(const Spectrum& grad_spectrum, const FrequencyMask& mask) {
  if (grad_spectrum.rows() != mask.rows() || grad_spectrum.cols() != mask.cols()) {
    throw DimensionError("apply_mask: spectrum and mask shapes differ");
  }
  Spectrum out(grad_spectrum.rows(), grad_spectrum.cols());
  for (const auto& p : mask.positions()) out(p.u, p.v) = grad_spectrum(p.u, p.v);
  return out;
}

}  // namespace ssh
