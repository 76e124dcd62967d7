#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssh/accounting.hpp"
#include "ssh/adapter.hpp"
#include "ssh/config.hpp"
#include "ssh/spectrum.hpp"

namespace ssh {

// Loss increases (beyond a 1e-12 * initial-loss noise floor) over this many
// consecutive epochs abort a run with DivergenceError.
inline constexpr std::size_t kDivergenceWindow = 10;

struct PlantedProblem {
  Matrix w0;
  Matrix target;                  // W* = w0 + alpha * idht2(planted)
  Spectrum planted;               // dense hidden delta, zero off the support
  std::vector<Position> support;  // ordered as drawn
};

// Base weight whose spectrum is N(0,1) noise plus `planted` peaks of
// magnitude peak_amplitude * U(1, 1.5) at random cells.
Matrix make_base_weight(const ExperimentConfig& cfg);

// Hidden support per cfg.support and coefficients of magnitude U(0.5, 1.5)
// with random sign. `mask` is only consulted for OffMask placement.
PlantedProblem make_planted_problem(const ExperimentConfig& cfg, Matrix w0,
                                    const FrequencyMask& mask);

// Fraction of `support` contained in `mask`.
double support_capture(const FrequencyMask& mask, const std::vector<Position>& support);

struct BaselineResult {
  Baseline::Kind kind = Baseline::Kind::None;
  std::uint64_t trainable_params = 0;
  double eta = 0.0;
  double final_loss = 0.0;
  double final_error = 0.0;
  bool diverged = false;
};

struct TrainingResult {
  Task task = Task::PlantedRecovery;
  std::vector<double> losses;  // losses[e] is the loss before update e; last entry is final
  double final_loss = 0.0;
  double final_error = 0.0;      // ||W - W*||_F
  double predicted_floor = 0.0;  // planted task: 1/2 alpha^2/(d1 d2) * sum of off-mask planted^2
  double eta = 0.0;
  double stable_eta_bound = 0.0;  // 2 / lambda_max of the loss in coefficient space
  double support_capture = 0.0;
  std::uint64_t mask_hash = 0;
  std::size_t num_trainable = 0;
  std::optional<double> accuracy;  // classification-toy only
  bool check_applicable = false;   // planted task, full capture, stable step
  bool check_passed = true;
  std::optional<BaselineResult> baseline;
};

// Builds w0, the SSH layer, the planted target, then trains by full-batch
// gradient descent for cfg.epochs epochs on the task loss:
//   planted-recovery    1/2 ||W - W*||_F^2
//   regression          1/(2B) ||W X - W* X||_F^2, X ~ N(0,1) of shape (d2, B)
//   classification-toy  mean softmax cross-entropy of W X against argmax(W* X)
// Throws DivergenceError from the guard above.
TrainingResult run_experiment(const ExperimentConfig& cfg);

// Same as run_experiment but also hands back the trained layer.
TrainingResult run_experiment(const ExperimentConfig& cfg, std::optional<SshLayer>& trained);

TrainingResult run_planted_recovery(const ExperimentConfig& cfg);

struct SweepRow {
  double delta = 0.0;
  double final_error = 0.0;
  double final_loss = 0.0;
  double support_capture = 0.0;
  std::uint64_t mask_hash = 0;
};

// One planted-recovery run per delta, shared seed and budget; rows sorted by
// delta. Points run concurrently.
std::vector<SweepRow> run_delta_sweep(const ExperimentConfig& base, std::vector<double> deltas);

struct SweepSummaryRow {
  double delta = 0.0;
  std::size_t seeds = 0;
  double mean_capture = 0.0;
  double min_capture = 0.0;
  double max_capture = 0.0;
  double mean_final_error = 0.0;
};

// Repeats the sweep for seeds base.seed, base.seed+1, ..., base.seed+repeats-1.
std::vector<SweepSummaryRow> run_delta_sweep_repeats(const ExperimentConfig& base,
                                                     std::vector<double> deltas,
                                                     std::size_t repeats);

inline constexpr double kGradcheckTolerance = 1e-4;
inline constexpr double kGradcheckEpsilon = 1e-5;
// Denominator floor for the gated error, as a fraction of the trial's
// gradient scale alpha/(d1*d2) * sum |dL/dW|.
inline constexpr double kGradcheckScaleFloor = 1e-3;

struct GradcheckTrial {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t n = 0;
  double alpha = 0.0;
  double max_rel_error = 0.0;         // gated
  double max_strict_rel_error = 0.0;  // |a - b| / max(|a|, |b|)
};

struct GradcheckReport {
  std::vector<GradcheckTrial> trials;
  double max_rel_error = 0.0;
  double max_strict_rel_error = 0.0;
  bool passed = false;  // max_rel_error <= kGradcheckTolerance
};

// Per trial: random layer (shape cycles through `shapes`, n cycles through
// {1, 8, d1*d2/2, d1*d2}), random quadratic loss
//   L(W) = 1/2 sum q_ij (W_ij - T_ij)^2 + sum C_ij (W_ij - w0_ij)
// and a comparison of SshLayer::backward with central differences over the
// coefficients. The gated error per coefficient is
//   |a - b| / max(|a|, |b|, kGradcheckScaleFloor * alpha/(d1*d2) * sum |dL/dW|)
// Each coefficient gradient is a sum of d1*d2 signed terms bounded by that
// scale. Central-difference roundoff is absolute (about eps_mach * |L| /
// epsilon), so the unfloored ratio is unbounded on coefficients whose terms
// nearly cancel. Both are reported; pass/fail uses the gated one. The loss is
// accumulated in long double to keep that roundoff small.
GradcheckReport run_gradcheck(const std::vector<LayerShape>& shapes, std::size_t trials,
                              std::uint64_t seed);

struct SpectrumCell {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double energy = 0.0;
  bool selected = false;
};

struct SpectrumReport {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t n = 0;
  std::vector<SpectrumCell> cells;  // row-major, d1*d2 entries
  double total_energy = 0.0;
  // Energy quantiles at 0, .25, .5, .75, .9, .99, 1.
  std::vector<std::pair<double, double>> quantiles;
  double topn_capture = 0.0;  // share of total energy in the n highest cells; 0 if total is 0
  double mask_capture = 0.0;  // share of total energy in the selected mask; 0 if total is 0
};

SpectrumReport profile_spectrum(const Matrix& w, const SelectionConfig& selection);

}  // namespace ssh
