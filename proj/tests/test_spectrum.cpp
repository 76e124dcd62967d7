#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ssh/errors.hpp"
#include "ssh/hartley.hpp"
#include "ssh/spectrum.hpp"

using namespace ssh;

namespace {

Spectrum random_spectrum(Rng& rng, std::size_t d1, std::size_t d2) {
  return Spectrum(random_normal(rng, d1, d2));
}

double energy_at(const Matrix& e, Position p) { return e(p.u, p.v); }

}  // namespace

TEST(EnergyMap, SquaresEntries) {
  EXPECT_EQ(energy_map(Spectrum(3, 3)), Matrix(3, 3));
  Spectrum h(2, 2);
  h(1, 0) = -3.0;
  EXPECT_EQ(energy_map(h)(1, 0), 9.0);

  Rng rng(1);
  const Spectrum r = random_spectrum(rng, 6, 7);
  double total = 0.0;
  const Matrix e = energy_map(r);
  for (double x : e.data()) total += x;
  EXPECT_NEAR(total, squared_norm(r.coeffs()), 1e-12);
}

TEST(Select, ArgmaxCase) {
  Spectrum h(4, 5);
  h(2, 3) = 5.0;
  h(0, 0) = 1.0;
  const FrequencyMask m = select_frequencies(h, {1, 1.0, 0});
  ASSERT_EQ(m.energy_positions().size(), 1u);
  EXPECT_EQ(m.energy_positions()[0], (Position{2, 3}));
  EXPECT_TRUE(m.random_positions().empty());
}

TEST(Select, SortedFourByFour) {
  Matrix values(4, 4);
  for (std::size_t i = 0; i < 16; ++i) values.data()[i] = static_cast<double>(i + 1);
  const FrequencyMask m = select_frequencies(Spectrum(values), {4, 0.5, 9});
  // Exhaustive oracle: the two largest of 1..16 are 16 at (3,3) and 15 at (3,2).
  ASSERT_EQ(m.energy_positions().size(), 2u);
  EXPECT_EQ(m.energy_positions()[0], (Position{3, 3}));
  EXPECT_EQ(m.energy_positions()[1], (Position{3, 2}));
  ASSERT_EQ(m.random_positions().size(), 2u);
  for (const auto& p : m.random_positions()) {
    EXPECT_FALSE(p == (Position{3, 3}) || p == (Position{3, 2}));
  }
  EXPECT_EQ(m, select_frequencies(Spectrum(values), {4, 0.5, 9}));
}

TEST(Select, TieBreakIsRowMajor) {
  const FrequencyMask m = select_frequencies(Spectrum(3, 3), {4, 1.0, 0});
  const std::vector<Position> want = {{0, 0}, {0, 1}, {0, 2}, {1, 0}};
  EXPECT_EQ(m.energy_positions(), want);
}

TEST(Select, RandomPartIsSeeded) {
  Rng rng(2);
  const Spectrum h = random_spectrum(rng, 16, 16);
  const auto a = select_frequencies(h, {10, 0.0, 1});
  const auto b = select_frequencies(h, {10, 0.0, 1});
  const auto c = select_frequencies(h, {10, 0.0, 2});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_FALSE(a == c);
  EXPECT_TRUE(a.energy_positions().empty());
}

TEST(Select, CountsAndDominance) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d1 = 1 + rng.below(12), d2 = 1 + rng.below(12);
    const std::size_t n = 1 + rng.below(d1 * d2);
    const double delta = rng.below(4) == 0 ? static_cast<double>(rng.below(2)) : rng.uniform();
    SelectionConfig cfg{n, delta, rng.next_u64()};
    // Coarse values force ties.
    Matrix coarse(d1, d2);
    for (double& x : coarse.data()) x = static_cast<double>(rng.below(5)) - 2.0;
    const Spectrum h(coarse);
    const FrequencyMask m = select_frequencies(h, cfg);

    const std::size_t k = cfg.energy_count();
    EXPECT_EQ(k, static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) + 1e-9)));
    EXPECT_EQ(m.energy_positions().size(), k);
    EXPECT_EQ(m.size(), n);
    EXPECT_EQ(squared_norm(m.indicator()), static_cast<double>(n));

    const Matrix e = energy_map(h);
    std::set<std::pair<std::uint32_t, std::uint32_t>> top;
    double min_top = 1e300;
    for (const auto& p : m.energy_positions()) {
      top.insert({p.u, p.v});
      min_top = std::min(min_top, energy_at(e, p));
    }
    if (k == 0) continue;
    for (std::uint32_t u = 0; u < d1; ++u) {
      for (std::uint32_t v = 0; v < d2; ++v) {
        if (!top.contains({u, v})) EXPECT_GE(min_top, e(u, v));
      }
    }
  }
}

TEST(Select, EnergyCountFloorSlack) {
  EXPECT_EQ((SelectionConfig{100, 0.29, 0}.energy_count()), 29u);
  EXPECT_EQ((SelectionConfig{3, 0.5, 0}.energy_count()), 1u);
  EXPECT_EQ((SelectionConfig{7, 1.0, 0}.energy_count()), 7u);
}

TEST(Select, Contracts) {
  const Spectrum h(2, 3);
  EXPECT_THROW(select_frequencies(h, {7, 0.5, 0}), CapacityError);
  EXPECT_THROW(select_frequencies(h, {0, 0.5, 0}), ContractError);
  EXPECT_THROW(select_frequencies(h, {2, 1.5, 0}), ContractError);
  EXPECT_THROW(select_frequencies(h, {2, -0.1, 0}), ContractError);
}

TEST(Mask, ValidatesConstruction) {
  EXPECT_THROW(FrequencyMask(2, 2, {{2, 0}}, {}), ContractError);
  EXPECT_THROW(FrequencyMask(2, 2, {{1, 1}}, {{1, 1}}), ContractError);
  EXPECT_THROW(FrequencyMask(2, 2, {{0, 1}, {0, 1}}, {}), ContractError);
  const FrequencyMask m(2, 2, {{1, 1}}, {{0, 1}});
  const std::vector<Position> order = {{1, 1}, {0, 1}};
  EXPECT_EQ(m.positions(), order);
  EXPECT_TRUE(m.contains({0, 1}));
  EXPECT_FALSE(m.contains({0, 0}));
}

TEST(ApplyMask, MatchesDenseIndicator) {
  Rng rng(4);
  const Spectrum g = random_spectrum(rng, 9, 11);
  const FrequencyMask m = select_frequencies(random_spectrum(rng, 9, 11), {30, 0.4, 5});
  const Spectrum out = apply_mask(g, m);
  const Matrix ind = m.indicator();
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(out.coeffs().data()[i], ind.data()[i] * g.coeffs().data()[i]);
    nonzero += out.coeffs().data()[i] != 0.0 ? 1 : 0;
  }
  EXPECT_LE(nonzero, 30u);
  EXPECT_EQ(apply_mask(out, m).coeffs(), out.coeffs());
}

TEST(ApplyMask, FullMaskIsIdentityAndShapeChecked) {
  Rng rng(5);
  const Spectrum g = random_spectrum(rng, 4, 6);
  const FrequencyMask full = select_frequencies(g, {24, 1.0, 0});
  EXPECT_EQ(apply_mask(g, full).coeffs(), g.coeffs());
  EXPECT_THROW(apply_mask(Spectrum(4, 5), full), DimensionError);
}
