#include "ssh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <numeric>
#include <string>

#include "ssh/errors.hpp"
#include "ssh/hartley.hpp"

namespace ssh {

namespace {

// Substreams of the experiment seed. Stream 1 is the selection seed.
enum Stream : std::uint64_t {
  kStreamBaseWeight = 2,
  kStreamPeaks = 3,
  kStreamInit = 4,
  kStreamSupport = 5,
  kStreamPlanted = 6,
  kStreamData = 7,
  kStreamLora = 8,
};

Position cell(std::size_t idx, std::size_t cols) {
  return Position{static_cast<std::uint32_t>(idx / cols), static_cast<std::uint32_t>(idx % cols)};
}

// First k entries of a seeded partial Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool, std::size_t k,
                                                  Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> all_cells(std::size_t count) {
  std::vector<std::size_t> v(count);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Loss value and dL/dW at W.
using WeightLoss = std::function<double(const Matrix& w, Matrix& grad)>;

struct TaskSetup {
  WeightLoss loss;
  // Upper bound on the largest Hessian eigenvalue of the loss w.r.t. W.
  double weight_curvature = 1.0;
  std::optional<Matrix> inputs;
};

// Gershgorin bound on the largest eigenvalue of X X^T / B.
double gram_curvature_bound(const Matrix& x) {
  const Matrix gram = matmul(x, transpose(x));
  const double scale = 1.0 / static_cast<double>(x.cols());
  double bound = 0.0;
  for (std::size_t i = 0; i < gram.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < gram.cols(); ++j) row += std::abs(gram(i, j));
    bound = std::max(bound, row * scale);
  }
  return bound;
}

TaskSetup make_task(const ExperimentConfig& cfg, const Matrix& target) {
  TaskSetup setup;
  if (cfg.task == Task::PlantedRecovery) {
    setup.loss = [target](const Matrix& w, Matrix& grad) {
      grad = w - target;
      return 0.5 * squared_norm(grad);
    };
    setup.weight_curvature = 1.0;
    return setup;
  }

  Rng data_rng(derive_seed(cfg.seed, kStreamData));
  Matrix x = random_normal(data_rng, cfg.d2, cfg.batch);
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch);
  const Matrix xt = transpose(x);
  const Matrix y = matmul(target, x);
  setup.inputs = x;

  if (cfg.task == Task::Regression) {
    setup.loss = [x, xt, y, inv_batch](const Matrix& w, Matrix& grad) {
      const Matrix residual = matmul(w, x) - y;
      grad = inv_batch * matmul(residual, xt);
      return 0.5 * inv_batch * squared_norm(residual);
    };
    setup.weight_curvature = gram_curvature_bound(x);
    return setup;
  }

  // classification-toy: rows of W are class scores.
  std::vector<std::size_t> labels(cfg.batch);
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < y.rows(); ++c) {
      if (y(c, b) > y(best, b)) best = c;
    }
    labels[b] = best;
  }
  setup.loss = [x, xt, labels, inv_batch](const Matrix& w, Matrix& grad) {
    Matrix probs = matmul(w, x);
    double loss = 0.0;
    for (std::size_t b = 0; b < probs.cols(); ++b) {
      double top = probs(0, b);
      for (std::size_t c = 1; c < probs.rows(); ++c) top = std::max(top, probs(c, b));
      double z = 0.0;
      for (std::size_t c = 0; c < probs.rows(); ++c) z += std::exp(probs(c, b) - top);
      loss += std::log(z) + top - probs(labels[b], b);
      for (std::size_t c = 0; c < probs.rows(); ++c) probs(c, b) = std::exp(probs(c, b) - top) / z;
      probs(labels[b], b) -= 1.0;
    }
    grad = inv_batch * matmul(probs, xt);
    return inv_batch * loss;
  };
  // Softmax cross-entropy has logit Hessian diag(p) - p p^T <= I/2.
  setup.weight_curvature = 0.5 * gram_curvature_bound(x);
  return setup;
}

double classification_accuracy(const Matrix& w, const Matrix& target, const Matrix& x) {
  const Matrix scores = matmul(w, x);
  const Matrix truth = matmul(target, x);
  std::size_t hits = 0;
  for (std::size_t b = 0; b < x.cols(); ++b) {
    std::size_t pred = 0;
    std::size_t label = 0;
    for (std::size_t c = 1; c < scores.rows(); ++c) {
      if (scores(c, b) > scores(pred, b)) pred = c;
      if (truth(c, b) > truth(label, b)) label = c;
    }
    hits += pred == label ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(x.cols());
}

BaselineResult run_baseline(const ExperimentConfig& cfg, const TaskSetup& task, const Matrix& w0,
                            const Matrix& target) {
  BaselineResult r;
  r.kind = cfg.baseline.kind;
  Matrix grad(w0.rows(), w0.cols());
  try {
    if (cfg.baseline.kind == Baseline::Kind::Full) {
      r.trainable_params = w0.size();
      r.eta = cfg.eta_fraction * 2.0 / task.weight_curvature;
      Matrix w = w0;
      for (std::size_t e = 0; e < cfg.epochs; ++e) {
        task.loss(w, grad);
        w -= r.eta * grad;
        ensure_finite(w, "full baseline");
      }
      r.final_loss = task.loss(w, grad);
      r.final_error = frobenius_norm(w - target);
    } else {
      Rng rng(derive_seed(cfg.seed, kStreamLora));
      LoraLayer lora = LoraLayer::init(w0, cfg.baseline.rank, rng);
      r.trainable_params = lora.param_count();
      r.eta = cfg.baseline_eta;
      for (std::size_t e = 0; e < cfg.epochs; ++e) {
        task.loss(lora.merge_weights(), grad);
        lora.sgd_step(lora.backward(grad), r.eta);
      }
      const Matrix w = lora.merge_weights();
      r.final_loss = task.loss(w, grad);
      r.final_error = frobenius_norm(w - target);
    }
    r.diverged = !std::isfinite(r.final_loss);
  } catch (const NumericError&) {
    r.diverged = true;
    r.final_loss = std::numeric_limits<double>::infinity();
    r.final_error = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace

Matrix make_base_weight(const ExperimentConfig& cfg) {
  Rng noise(derive_seed(cfg.seed, kStreamBaseWeight));
  Spectrum h0(random_normal(noise, cfg.d1, cfg.d2));
  Rng peaks(derive_seed(cfg.seed, kStreamPeaks));
  const auto where = draw_without_replacement(all_cells(cfg.d1 * cfg.d2), cfg.planted, peaks);
  for (std::size_t idx : where) {
    const double sign = peaks.uniform() < 0.5 ? -1.0 : 1.0;
    h0.coeffs().data()[idx] = sign * cfg.peak_amplitude * peaks.uniform(1.0, 1.5);
  }
  return idht2(h0);
}

PlantedProblem make_planted_problem(const ExperimentConfig& cfg, Matrix w0,
                                    const FrequencyMask& mask) {
  const std::size_t total = cfg.d1 * cfg.d2;
  std::vector<std::size_t> chosen;
  Rng support_rng(derive_seed(cfg.seed, kStreamSupport));
  switch (cfg.support) {
    case SupportPlacement::TopEnergy: {
      const auto ranking = energy_ranking(energy_map(dht2(w0)));
      chosen.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(cfg.planted));
      break;
    }
    case SupportPlacement::Random:
      chosen = draw_without_replacement(all_cells(total), cfg.planted, support_rng);
      break;
    case SupportPlacement::OffMask: {
      std::vector<std::size_t> pool;
      for (std::size_t idx = 0; idx < total; ++idx) {
        if (!mask.contains(cell(idx, cfg.d2))) pool.push_back(idx);
      }
      if (pool.size() < cfg.planted) throw CapacityError("off-mask support: not enough free cells");
      chosen = draw_without_replacement(std::move(pool), cfg.planted, support_rng);
      break;
    }
  }

  Rng value_rng(derive_seed(cfg.seed, kStreamPlanted));
  PlantedProblem p{std::move(w0), Matrix(cfg.d1, cfg.d2), Spectrum(cfg.d1, cfg.d2), {}};
  for (std::size_t idx : chosen) {
    const double sign = value_rng.uniform() < 0.5 ? -1.0 : 1.0;
    p.planted.coeffs().data()[idx] = sign * value_rng.uniform(0.5, 1.5);
    p.support.push_back(cell(idx, cfg.d2));
  }
  p.target = p.w0 + cfg.alpha * idht2(p.planted);
  return p;
}

double support_capture(const FrequencyMask& mask, const std::vector<Position>& support) {
  if (support.empty()) return 0.0;
  const auto hits = std::count_if(support.begin(), support.end(),
                                  [&mask](const Position& p) { return mask.contains(p); });
  return static_cast<double>(hits) / static_cast<double>(support.size());
}

TrainingResult run_experiment(const ExperimentConfig& cfg, std::optional<SshLayer>& trained) {
  cfg.validate();
  Matrix w0 = make_base_weight(cfg);
  SelectionConfig selection = cfg.selection;
  selection.seed = cfg.effective_selection_seed();
  Rng init_rng(derive_seed(cfg.seed, kStreamInit));
  SshLayer layer = SshLayer::init(w0, selection, cfg.alpha, init_rng);
  const PlantedProblem problem = make_planted_problem(cfg, std::move(w0), layer.mask());
  const TaskSetup task = make_task(cfg, problem.target);

  TrainingResult r;
  r.task = cfg.task;
  r.num_trainable = layer.num_trainable();
  r.mask_hash = layer.mask().hash();
  r.support_capture = support_capture(layer.mask(), problem.support);

  const double n_cells = static_cast<double>(cfg.d1 * cfg.d2);
  const double lambda_max = cfg.alpha * cfg.alpha / n_cells * task.weight_curvature;
  r.stable_eta_bound = 2.0 / lambda_max;
  r.eta = cfg.eta ? *cfg.eta : cfg.eta_fraction * r.stable_eta_bound;

  if (cfg.task == Task::PlantedRecovery) {
    double off_mask = 0.0;
    for (const auto& p : problem.support) {
      if (!layer.mask().contains(p)) off_mask += problem.planted(p.u, p.v) * problem.planted(p.u, p.v);
    }
    r.predicted_floor = 0.5 * cfg.alpha * cfg.alpha / n_cells * off_mask;
  }

  Matrix grad(cfg.d1, cfg.d2);
  r.losses.reserve(cfg.epochs + 1);
  std::size_t rising = 0;
  for (std::size_t e = 0; e <= cfg.epochs; ++e) {
    const double loss = task.loss(layer.merge_weights(), grad);
    if (!std::isfinite(loss)) {
      throw DivergenceError("training: loss became non-finite at epoch " + std::to_string(e) +
                            " (eta " + std::to_string(r.eta) + ", stable bound " +
                            std::to_string(r.stable_eta_bound) + ")");
    }
    if (e > 0 && loss - r.losses.back() > 1e-12 * r.losses.front()) {
      ++rising;
    } else {
      rising = 0;
    }
    r.losses.push_back(loss);
    if (rising >= kDivergenceWindow) {
      throw DivergenceError("training: loss rose for " + std::to_string(kDivergenceWindow) +
                            " consecutive epochs, now " + std::to_string(loss) + " at epoch " +
                            std::to_string(e) + " (eta " + std::to_string(r.eta) +
                            ", stable bound " + std::to_string(r.stable_eta_bound) + ")");
    }
    if (e == cfg.epochs) break;
    layer.sgd_step(layer.backward(grad), r.eta);
  }

  const Matrix w = layer.merge_weights();
  r.final_loss = r.losses.back();
  r.final_error = frobenius_norm(w - problem.target);
  if (task.inputs && cfg.task == Task::ClassificationToy) {
    r.accuracy = classification_accuracy(w, problem.target, *task.inputs);
  }
  r.check_applicable = cfg.task == Task::PlantedRecovery && r.support_capture == 1.0 &&
                       r.eta > 0.0 && r.eta < r.stable_eta_bound;
  r.check_passed = !r.check_applicable || r.final_error <= cfg.tolerance;
  if (cfg.baseline.kind != Baseline::Kind::None) {
    r.baseline = run_baseline(cfg, task, problem.w0, problem.target);
  }
  trained.emplace(std::move(layer));
  return r;
}

TrainingResult run_experiment(const ExperimentConfig& cfg) {
  std::optional<SshLayer> discard;
  return run_experiment(cfg, discard);
}

TrainingResult run_planted_recovery(const ExperimentConfig& cfg) {
  if (cfg.task != Task::PlantedRecovery) {
    throw ContractError("run_planted_recovery: config task is not planted-recovery");
  }
  return run_experiment(cfg);
}

std::vector<SweepRow> run_delta_sweep(const ExperimentConfig& base, std::vector<double> deltas) {
  if (deltas.empty()) throw ContractError("sweep: no delta values");
  std::stable_sort(deltas.begin(), deltas.end());
  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(deltas.size());
  for (double delta : deltas) {
    ExperimentConfig cfg = base;
    cfg.task = Task::PlantedRecovery;
    cfg.selection.delta = delta;
    jobs.push_back(std::async(std::launch::async, [cfg]() {
      const TrainingResult r = run_experiment(cfg);
      return SweepRow{cfg.selection.delta, r.final_error, r.final_loss, r.support_capture,
                      r.mask_hash};
    }));
  }
  std::vector<SweepRow> rows;
  rows.reserve(jobs.size());
  for (auto& job : jobs) rows.push_back(job.get());
  return rows;
}

std::vector<SweepSummaryRow> run_delta_sweep_repeats(const ExperimentConfig& base,
                                                     std::vector<double> deltas,
                                                     std::size_t repeats) {
  if (repeats == 0) throw ContractError("sweep: repeats must be positive");
  std::stable_sort(deltas.begin(), deltas.end());
  std::vector<SweepSummaryRow> summary(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    summary[i].delta = deltas[i];
    summary[i].min_capture = 1.0;
  }
  for (std::size_t k = 0; k < repeats; ++k) {
    ExperimentConfig cfg = base;
    cfg.seed = base.seed + k;
    const auto rows = run_delta_sweep(cfg, deltas);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto& s = summary[i];
      s.seeds += 1;
      s.mean_capture += rows[i].support_capture;
      s.min_capture = std::min(s.min_capture, rows[i].support_capture);
      s.max_capture = std::max(s.max_capture, rows[i].support_capture);
      s.mean_final_error += rows[i].final_error;
    }
  }
  for (auto& s : summary) {
    s.mean_capture /= static_cast<double>(s.seeds);
    s.mean_final_error /= static_cast<double>(s.seeds);
  }
  return summary;
}

GradcheckReport run_gradcheck(const std::vector<LayerShape>& shapes, std::size_t trials,
                              std::uint64_t seed) {
  if (shapes.empty()) throw ContractError("gradcheck: no shapes");
  for (const auto& s : shapes) {
    if (s.rows == 0 || s.cols == 0 || s.rows > 16 || s.cols > 16) {
      throw ContractError("gradcheck: shapes must lie within 1x1 .. 16x16");
    }
  }
  GradcheckReport report;
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const LayerShape shape = shapes[t % shapes.size()];
    const std::size_t cells = shape.rows * shape.cols;
    const std::size_t choices[4] = {1, std::min<std::size_t>(8, cells), std::max<std::size_t>(1, cells / 2),
                                    cells};
    const std::size_t n = choices[(t + t / shapes.size()) % 4];

    const Matrix w0 = random_normal(rng, shape.rows, shape.cols);
    SelectionConfig sel{n, rng.uniform(), rng.next_u64()};
    const double alpha = rng.uniform(0.5, 2.0);
    SshLayer layer = SshLayer::init(w0, sel, alpha, rng);

    const Matrix q = random_uniform(rng, shape.rows, shape.cols, 0.5, 1.5);
    const Matrix anchor = w0 + random_normal(rng, shape.rows, shape.cols);
    const Matrix linear = random_normal(rng, shape.rows, shape.cols, 0.1);
    auto weight_loss = [&](const Matrix& w, Matrix* grad) {
      long double loss = 0.0L;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = w.data()[i] - anchor.data()[i];
        const long double dl = static_cast<long double>(w.data()[i]) - anchor.data()[i];
        loss += 0.5L * q.data()[i] * dl * dl +
                static_cast<long double>(linear.data()[i]) *
                    (static_cast<long double>(w.data()[i]) - w0.data()[i]);
        if (grad) grad->data()[i] = q.data()[i] * d + linear.data()[i];
      }
      return static_cast<double>(loss);
    };

    Matrix grad_w(shape.rows, shape.cols);
    weight_loss(layer.merge_weights(), &grad_w);
    const std::vector<double> analytic = layer.backward(grad_w);

    SshLayer probe = layer;
    const Matrix coeffs(n, 1, std::vector<double>(layer.values().begin(), layer.values().end()));
    const Matrix numeric = finite_diff_grad(
        [&](const Matrix& c) {
          probe.set_values(c.data());
          return weight_loss(probe.merge_weights(), nullptr);
        },
        coeffs, kGradcheckEpsilon);

    // |cas| <= sqrt(2), so every coefficient gradient is bounded by this sum.
    double abs_sum = 0.0;
    for (double g : grad_w.data()) abs_sum += std::abs(g);
    const double floor = kGradcheckScaleFloor * alpha * abs_sum / static_cast<double>(cells);

    GradcheckTrial trial{shape.rows, shape.cols, n, alpha, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double a = analytic[i];
      const double b = numeric.data()[i];
      const double diff = std::abs(a - b);
      const double scale = std::max(std::abs(a), std::abs(b));
      const double strict = scale == 0.0 ? 0.0 : diff / scale;
      const double gated = std::max(scale, floor) == 0.0 ? 0.0 : diff / std::max(scale, floor);
      trial.max_rel_error = std::max(trial.max_rel_error, gated);
      trial.max_strict_rel_error = std::max(trial.max_strict_rel_error, strict);
    }
    report.max_rel_error = std::max(report.max_rel_error, trial.max_rel_error);
    report.max_strict_rel_error = std::max(report.max_strict_rel_error, trial.max_strict_rel_error);
    report.trials.push_back(trial);
  }
  report.passed = report.max_rel_error <= kGradcheckTolerance;
  return report;
}

SpectrumReport profile_spectrum(const Matrix& w, const SelectionConfig& selection) {
  const Spectrum h = dht2(w);
  const Matrix energy = energy_map(h);
  const FrequencyMask mask = select_frequencies(h, selection);

  SpectrumReport r;
  r.rows = w.rows();
  r.cols = w.cols();
  r.n = selection.n;
  r.cells.reserve(energy.size());
  for (std::size_t idx = 0; idx < energy.size(); ++idx) {
    const Position p = cell(idx, w.cols());
    r.cells.push_back({p.u, p.v, energy.data()[idx], mask.contains(p)});
    r.total_energy += energy.data()[idx];
  }

  std::vector<double> sorted(energy.data().begin(), energy.data().end());
  std::sort(sorted.begin(), sorted.end());
  for (double level : {0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0}) {
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    r.quantiles.emplace_back(level, sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }

  if (r.total_energy > 0.0) {
    double top = 0.0;
    for (std::size_t i = 0; i < selection.n; ++i) top += sorted[sorted.size() - 1 - i];
    r.topn_capture = top / r.total_energy;
    double in_mask = 0.0;
    for (const auto& c : r.cells) {
      if (c.selected) in_mask += c.energy;
    }
    r.mask_capture = in_mask / r.total_energy;
  }
  return r;
}

}  // namespace ssh
