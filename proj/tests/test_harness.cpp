#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "oracles.hpp"
#include "ssh/checkpoint.hpp"
#include "ssh/config.hpp"
#include "ssh/errors.hpp"
#include "ssh/experiments.hpp"
#include "ssh/hartley.hpp"
#include "ssh/matrix_io.hpp"
#include "ssh/reports.hpp"

using namespace ssh;

namespace {

std::string to_bytes(const Matrix& m) {
  std::ostringstream out;
  write_matrix(out, m);
  return out.str();
}

std::int64_t parse_offset(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_matrix(in);
  } catch (const ParseError& e) {
    return e.offset();
  }
  return -2;
}

std::string checkpoint_bytes(const SshLayer& layer) {
  std::ostringstream out;
  write_checkpoint(out, layer);
  return out.str();
}

SshLayer load_bytes(const std::string& bytes, const Matrix& w0) {
  std::istringstream in(bytes);
  return read_checkpoint(in, w0);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.d1 = 16;
  cfg.d2 = 16;
  cfg.planted = 8;
  cfg.selection = {24, 0.5, 0};
  cfg.epochs = 400;
  return cfg;
}

}  // namespace

TEST(MatrixIo, RoundTripAtFloatPrecision) {
  Rng rng(1);
  const Matrix m = random_normal(rng, 5, 7);
  std::istringstream in(to_bytes(m));
  const Matrix back = read_matrix(in);
  ASSERT_TRUE(back.same_shape(m));
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(back.data()[i], static_cast<double>(static_cast<float>(m.data()[i])));
  }
  EXPECT_EQ(to_bytes(m).size(), 16u + 4 * 35);
}

TEST(MatrixIo, ErrorsCarryOffsets) {
  const std::string good = to_bytes(Matrix::filled(2, 3, 1.0));
  std::string bad_magic = good;
  bad_magic[3] = 'X';
  EXPECT_EQ(parse_offset(bad_magic), 3);
  EXPECT_EQ(parse_offset(good.substr(0, 12)), 12);
  EXPECT_EQ(parse_offset(good.substr(0, 20)), 20);

  std::string zero_rows = good;
  zero_rows[8] = zero_rows[9] = zero_rows[10] = zero_rows[11] = 0;
  EXPECT_EQ(parse_offset(zero_rows), 8);

  std::string nan = good;
  const float q = std::nanf("");
  std::memcpy(&nan[16 + 4 * 2], &q, 4);
  EXPECT_EQ(parse_offset(nan), 24);

  EXPECT_EQ(parse_offset(good + "x"), static_cast<std::int64_t>(good.size()));

  // Huge declared shape with no payload fails as truncation, not an allocation.
  std::string huge = good.substr(0, 16);
  for (int i = 8; i < 16; ++i) huge[i] = static_cast<char>(0xff);
  EXPECT_EQ(parse_offset(huge), 16);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d1 = 1 + rng.below(12), d2 = 1 + rng.below(12);
    const Matrix w0 = random_normal(rng, d1, d2);
    const SshLayer layer =
        SshLayer::init(w0, {1 + rng.below(d1 * d2), rng.uniform(), rng.next_u64()},
                       rng.uniform(0.1, 300.0), rng);
    const std::string first = checkpoint_bytes(layer);
    const SshLayer back = load_bytes(first, w0);
    EXPECT_EQ(checkpoint_bytes(back), first);
    EXPECT_EQ(back.mask(), layer.mask());
    EXPECT_EQ(back.alpha(), layer.alpha());
    EXPECT_EQ(first.size(), 8u + 24 + 12 * layer.num_trainable() + 8);
  }
}

TEST(Checkpoint, DistinctErrors) {
  Rng rng(3);
  const Matrix w0 = random_normal(rng, 6, 6);
  const SshLayer layer = SshLayer::init(w0, {5, 0.6, 1}, 2.0, rng);
  const std::string good = checkpoint_bytes(layer);

  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(load_bytes(bad, w0), CheckpointMagicError);

  const std::pair<std::size_t, const char*> cuts[] = {
      {4, "magic"}, {20, "header"}, {40, "positions"}, {80, "values"}, {good.size() - 1, "digest"}};
  for (const auto& [len, section] : cuts) {
    try {
      load_bytes(good.substr(0, len), w0);
      ADD_FAILURE() << "no error at " << len;
    } catch (const CheckpointTruncatedError& e) {
      EXPECT_EQ(e.section(), section);
    }
  }

  Matrix other = w0;
  other(2, 2) += 1e-12;
  EXPECT_THROW(load_bytes(good, other), CheckpointDigestError);
  EXPECT_THROW(load_bytes(good, Matrix(6, 5)), CheckpointDigestError);
}

TEST(Config, ParsesAndRejects) {
  const ExperimentConfig c = parse_config(
      R"({"task": "planted-recovery", "d1": 8, "d2": 4, "n": 6, "delta": 0.25,
          "seed": 9, "baseline": {"lora": 2}, "deltas": [0, 1]})");
  EXPECT_EQ(c.d1, 8u);
  EXPECT_EQ(c.selection.n, 6u);
  EXPECT_EQ(c.baseline.kind, Baseline::Kind::Lora);
  EXPECT_EQ(c.baseline.rank, 2u);
  EXPECT_EQ(parse_config(config_to_json(c)).selection.delta, 0.25);

  EXPECT_THROW(parse_config(R"({"nn": 3})"), ParseError);
  EXPECT_THROW(parse_config(R"({"n": "three"})"), ParseError);
  EXPECT_THROW(parse_config(R"({"n": -1})"), ParseError);
  EXPECT_THROW(parse_config(R"({"task": "unknown"})"), ParseError);
  try {
    parse_config("{\"n\": 3,, }");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.offset(), 8);
  }
}

TEST(Config, SubstreamsDiffer) {
  EXPECT_NE(derive_seed(0, 1), derive_seed(0, 2));
  EXPECT_NE(derive_seed(0, 1), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}

TEST(Recovery, ReachesToleranceWhenMaskCoversSupport) {
  ExperimentConfig cfg;  // 32x32, m = 20, n = 40, delta = 0.5
  cfg.epochs = 2000;
  const TrainingResult r = run_planted_recovery(cfg);
  ASSERT_EQ(r.support_capture, 1.0);
  EXPECT_TRUE(r.check_applicable);
  EXPECT_LE(r.final_error, 1e-6);
  EXPECT_EQ(r.losses.size(), cfg.epochs + 1);
  EXPECT_LT(r.eta, r.stable_eta_bound);
}

TEST(Recovery, OffMaskPlateausAtPlantedEnergy) {
  ExperimentConfig cfg = small_config();
  cfg.support = SupportPlacement::OffMask;
  const TrainingResult r = run_planted_recovery(cfg);
  EXPECT_EQ(r.support_capture, 0.0);

  // Independent floor: half the squared norm of the planted delta in weight space.
  Matrix w0 = make_base_weight(cfg);
  SelectionConfig sel = cfg.selection;
  sel.seed = cfg.effective_selection_seed();
  const FrequencyMask mask = select_frequencies(dht2(w0), sel);
  const PlantedProblem p = make_planted_problem(cfg, w0, mask);
  const double floor = 0.5 * squared_norm(cfg.alpha * idht2(p.planted));
  EXPECT_NEAR(r.predicted_floor, floor, 1e-12 * floor);
  EXPECT_NEAR(r.final_loss, floor, 1e-9 * floor);
}

TEST(Recovery, ZeroStepKeepsLossConstant) {
  ExperimentConfig cfg = small_config();
  cfg.eta = 0.0;
  cfg.epochs = 30;
  const TrainingResult r = run_planted_recovery(cfg);
  for (double l : r.losses) EXPECT_EQ(l, r.losses.front());
  EXPECT_FALSE(r.check_applicable);
}

TEST(Recovery, FullMaskReachesTightTolerance) {
  ExperimentConfig cfg = small_config();
  cfg.selection = {256, 0.5, 0};
  cfg.support = SupportPlacement::Random;
  const TrainingResult r = run_planted_recovery(cfg);
  EXPECT_EQ(r.support_capture, 1.0);
  EXPECT_LE(r.final_error, 1e-8);
}

TEST(Recovery, UnstableStepIsReported) {
  ExperimentConfig cfg = small_config();
  cfg.eta = 0.0;
  const double bound = run_planted_recovery(cfg).stable_eta_bound;
  cfg.eta = 1.5 * bound;
  EXPECT_THROW(run_planted_recovery(cfg), DivergenceError);
}

TEST(Recovery, OtherTasksTrain) {
  for (Task task : {Task::Regression, Task::ClassificationToy}) {
    ExperimentConfig cfg = small_config();
    cfg.task = task;
    cfg.baseline = {Baseline::Kind::Lora, 2};
    const TrainingResult r = run_experiment(cfg);
    EXPECT_LT(r.final_loss, r.losses.front()) << task_name(task);
    ASSERT_TRUE(r.baseline.has_value());
    EXPECT_EQ(r.baseline->trainable_params, 2u * 32);
    EXPECT_EQ(r.accuracy.has_value(), task == Task::ClassificationToy);
  }
}

TEST(Sweep, RowsSortedAndTagged) {
  ExperimentConfig cfg = small_config();
  cfg.epochs = 50;
  const auto rows = run_delta_sweep(cfg, {1.0, 0.0, 0.5});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].delta, 0.0);
  EXPECT_EQ(rows[2].delta, 1.0);
  EXPECT_NE(rows[0].mask_hash, rows[2].mask_hash);
  EXPECT_EQ(rows[2].support_capture, 1.0);
  EXPECT_EQ(run_delta_sweep(cfg, {0.5}).size(), 1u);
}

TEST(Sweep, RandomCaptureMatchesHypergeometricMean) {
  ExperimentConfig cfg = small_config();
  cfg.selection = {64, 0.0, 0};
  cfg.epochs = 1;
  const auto summary = run_delta_sweep_repeats(cfg, {0.0}, 400);
  // E[capture] = n / (d1 d2); standard error of the mean here is about 0.0075.
  EXPECT_NEAR(summary[0].mean_capture, 64.0 / 256.0, 0.03);
}

TEST(Sweep, MeanCaptureNonDecreasingInDelta) {
  ExperimentConfig cfg = small_config();
  cfg.epochs = 1;
  const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  const auto summary = run_delta_sweep_repeats(cfg, grid, 20);
  for (std::size_t i = 1; i < summary.size(); ++i) {
    EXPECT_GE(summary[i].mean_capture, summary[i - 1].mean_capture) << grid[i];
  }
  EXPECT_EQ(summary.back().min_capture, 1.0);
}

TEST(Reports, IdenticalRunsGiveIdenticalCsv) {
  const ExperimentConfig cfg = small_config();
  std::ostringstream a, b;
  write_losses_csv(a, run_planted_recovery(cfg));
  write_losses_csv(b, run_planted_recovery(cfg));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, 11), "epoch,loss\n");
}

TEST(Profile, IdentityMatchesDirectSummation) {
  const Matrix id = Matrix::identity(8);
  const SpectrumReport r = profile_spectrum(id, {5, 1.0, 0});
  EXPECT_EQ(r.cells.size(), 64u);

  std::vector<double> energy;
  const Matrix h_direct = oracle::dht2_direct(id);
  for (double h : h_direct.data()) energy.push_back(h * h);
  std::sort(energy.rbegin(), energy.rend());
  double total = 0.0, top = 0.0;
  for (std::size_t i = 0; i < energy.size(); ++i) {
    total += energy[i];
    if (i < 5) top += energy[i];
  }
  EXPECT_NEAR(r.total_energy, total, 1e-9 * total);
  EXPECT_NEAR(r.topn_capture, top / total, 1e-12);
  EXPECT_NEAR(r.mask_capture, r.topn_capture, 1e-12);
}

TEST(Profile, ZeroMatrixConvention) {
  const SpectrumReport r = profile_spectrum(Matrix(4, 4), {3, 0.5, 0});
  EXPECT_EQ(r.total_energy, 0.0);
  EXPECT_EQ(r.topn_capture, 0.0);
  EXPECT_EQ(r.mask_capture, 0.0);
}

TEST(Profile, GaussianRandomMaskCapturesProportionalEnergy) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Matrix w = random_normal(rng, 16, 16);
    const SpectrumReport r = profile_spectrum(w, {32, 0.0, seed});
    sum += r.mask_capture;
    // The n highest cells always hold at least their share.
    EXPECT_GE(r.topn_capture, 32.0 / 256.0);
  }
  EXPECT_NEAR(sum / 100.0, 32.0 / 256.0, 0.01);
}

TEST(Profile, CsvHasOneRowPerCell) {
  Rng rng(4);
  const SpectrumReport r = profile_spectrum(random_normal(rng, 3, 5), {2, 0.5, 0});
  std::ostringstream out;
  write_spectrum_csv(out, r);
  const std::string csv = out.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
}
