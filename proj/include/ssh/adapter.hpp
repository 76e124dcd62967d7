#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ssh/hartley.hpp"
#include "ssh/numerics.hpp"
#include "ssh/spectrum.hpp"

namespace ssh {

// Trainable coefficients restricted to the mask support, in mask order.
struct SpectralDelta {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Position> positions;
  std::vector<double> values;

  // Scatter onto a rows x cols grid, zeros elsewhere.
  Spectrum densify() const;
  bool is_zero() const noexcept;
};

// Frozen weight plus a sparse Hartley-domain delta:
//   W = w0 + alpha * idht2(densify(delta))
//
// Single-owner: forward/backward/sgd_step on one layer must be serialized.
// The delta-weight cache is keyed on a version counter bumped by every
// mutation of the coefficients.
class SshLayer {
 public:
  // Selects the mask from dht2(w0) and draws Kaiming-uniform coefficients
  // with fan_in = d2.
  static SshLayer init(Matrix w0, const SelectionConfig& cfg, double alpha, Rng& init_rng);

  // Rebuilds a layer from stored parts (checkpoint load).
  static SshLayer restore(Matrix w0, FrequencyMask mask, std::vector<double> values, double alpha);

  std::size_t rows() const noexcept { return w0_.rows(); }
  std::size_t cols() const noexcept { return w0_.cols(); }
  std::size_t num_trainable() const noexcept { return delta_.values.size(); }
  double alpha() const noexcept { return alpha_; }
  std::uint64_t version() const noexcept { return version_; }

  const Matrix& base_weight() const noexcept { return w0_; }
  const FrequencyMask& mask() const noexcept { return mask_; }
  const SpectralDelta& delta() const noexcept { return delta_; }
  std::span<const double> values() const noexcept { return delta_.values; }

  // Replaces all coefficients (length must equal num_trainable()).
  void set_values(std::span<const double> values);

  // alpha * idht2(densify(delta)), memoized.
  const Matrix& delta_weight() const;
  // w0 + delta_weight(); returns w0 unchanged when the delta is zero or alpha == 0.
  Matrix merge_weights() const;

  // y = W x, with x of shape (d2, batch).
  Matrix forward(const Matrix& x) const;

  // dL/d(coefficients) in mask order given dL/dW, i.e.
  // alpha/(d1*d2) * dht2(grad_w) gathered at the mask positions.
  std::vector<double> backward(const Matrix& grad_w) const;

  // values[i] -= eta * grads[i].
  void sgd_step(std::span<const double> grads, double eta);

 private:
  SshLayer(Matrix w0, FrequencyMask mask, SpectralDelta delta, double alpha);

  Matrix w0_;
  FrequencyMask mask_;
  SpectralDelta delta_;
  double alpha_;
  std::uint64_t version_ = 0;
  mutable std::optional<Matrix> cached_dw_;
  mutable std::uint64_t cached_version_ = 0;
};

// Plain low-rank baseline: W = w0 + b a, b (d1 x r) zero-initialized,
// a (r x d2) Kaiming-uniform with fan_in = d2.
class LoraLayer {
 public:
  static LoraLayer init(Matrix w0, std::size_t rank, Rng& rng);

  std::size_t rank() const noexcept { return a_.rows(); }
  const Matrix& base_weight() const noexcept { return w0_; }
  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }

  Matrix merge_weights() const;
  Matrix forward(const Matrix& x) const;
  std::size_t param_count() const noexcept { return a_.size() + b_.size(); }

  struct Grads {
    Matrix a;
    Matrix b;
  };
  // dL/da = b^T G, dL/db = G a^T for G = dL/dW.
  Grads backward(const Matrix& grad_w) const;
  void sgd_step(const Grads& grads, double eta);

 private:
  LoraLayer(Matrix w0, Matrix a, Matrix b)
      : w0_(std::move(w0)), a_(std::move(a)), b_(std::move(b)) {}

  Matrix w0_;
  Matrix a_;
  Matrix b_;
};

// r * (d1 + d2) for one adapted matrix.
std::size_t lora_param_count(std::size_t d1, std::size_t d2, std::size_t rank);

}  // namespace ssh
