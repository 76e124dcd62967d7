#include "ssh/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssh/errors.hpp"

namespace ssh {

Spectrum SpectralDelta::densify() const {
  Spectrum dense(rows, cols);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    dense(positions[i].u, positions[i].v) = values[i];
  }
  return dense;
}

bool SpectralDelta::is_zero() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

SshLayer::SshLayer(Matrix w0, FrequencyMask mask, SpectralDelta delta, double alpha)
    : w0_(std::move(w0)), mask_(std::move(mask)), delta_(std::move(delta)), alpha_(alpha) {
  if (!std::isfinite(alpha_)) throw NumericError("ssh layer: alpha must be finite");
  ensure_finite(w0_, "ssh layer base weight");
}

SshLayer SshLayer::init(Matrix w0, const SelectionConfig& cfg, double alpha, Rng& init_rng) {
  FrequencyMask mask = select_frequencies(dht2(w0), cfg);
  SpectralDelta delta{w0.rows(), w0.cols(), mask.positions(),
                      kaiming_init(init_rng, mask.size(), w0.cols())};
  return SshLayer(std::move(w0), std::move(mask), std::move(delta), alpha);
}

SshLayer SshLayer::restore(Matrix w0, FrequencyMask mask, std::vector<double> values,
                           double alpha) {
  if (mask.rows() != w0.rows() || mask.cols() != w0.cols()) {
    throw DimensionError("ssh layer: mask shape does not match base weight");
  }
  if (values.size() != mask.size()) {
    throw ContractError("ssh layer: " + std::to_string(values.size()) +
                        " values for a mask of " + std::to_string(mask.size()));
  }
  SpectralDelta delta{w0.rows(), w0.cols(), mask.positions(), std::move(values)};
  return SshLayer(std::move(w0), std::move(mask), std::move(delta), alpha);
}

void SshLayer::set_values(std::span<const double> values) {
  if (values.size() != delta_.values.size()) {
    throw ContractError("set_values: expected " + std::to_string(delta_.values.size()) +
                        " values, got " + std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), delta_.values.begin());
  ++version_;
}

const Matrix& SshLayer::delta_weight() const {
  if (!cached_dw_ || cached_version_ != version_) {
    Matrix dw = idht2(delta_.densify());
    dw *= alpha_;
    ensure_finite(dw, "ssh layer delta weight");
    cached_dw_ = std::move(dw);
    cached_version_ = version_;
  }
  return *cached_dw_;
}

Matrix SshLayer::merge_weights() const {
  if (alpha_ == 0.0 || delta_.is_zero()) return w0_;
  return w0_ + delta_weight();
}

Matrix SshLayer::forward(const Matrix& x) const {
  if (x.rows() != cols()) {
    throw DimensionError("ssh forward: input has " + std::to_string(x.rows()) +
                         " rows, layer expects " + std::to_string(cols()));
  }
  return matmul(merge_weights(), x);
}

std::vector<double> SshLayer::backward(const Matrix& grad_w) const {
  if (!grad_w.same_shape(w0_)) {
    throw DimensionError("ssh backward: gradient shape does not match the weight");
  }
  const Spectrum g = dht2(grad_w);
  const double scale = alpha_ / static_cast<double>(w0_.size());
  std::vector<double> grads(delta_.positions.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    grads[i] = scale * g(delta_.positions[i].u, delta_.positions[i].v);
  }
  return grads;
}

void SshLayer::sgd_step(std::span<const double> grads, double eta) {
  if (grads.size() != delta_.values.size()) {
    throw ContractError("sgd_step: expected " + std::to_string(delta_.values.size()) +
                        " gradients, got " + std::to_string(grads.size()));
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ContractError("sgd_step: learning rate must be finite and non-negative");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const double next = delta_.values[i] - eta * grads[i];
    if (!std::isfinite(next)) throw NumericError("sgd_step: coefficient became non-finite");
    delta_.values[i] = next;
  }
  ++version_;
}

LoraLayer LoraLayer::init(Matrix w0, std::size_t rank, Rng& rng) {
  if (rank < 1 || rank > std::min(w0.rows(), w0.cols())) {
    throw ContractError("lora: rank " + std::to_string(rank) + " outside [1, min(d1, d2)]");
  }
  Matrix a(rank, w0.cols(), kaiming_init(rng, rank * w0.cols(), w0.cols()));
  Matrix b(w0.rows(), rank);
  return LoraLayer(std::move(w0), std::move(a), std::move(b));
}

Matrix LoraLayer::merge_weights() const { return w0_ + matmul(b_, a_); }

Matrix LoraLayer::forward(const Matrix& x) const {
  if (x.rows() != w0_.cols()) throw DimensionError("lora forward: input row count mismatch");
  return matmul(merge_weights(), x);
}

LoraLayer::Grads LoraLayer::backward(const Matrix& grad_w) const {
  if (!grad_w.same_shape(w0_)) throw DimensionError("lora backward: gradient shape mismatch");
  return Grads{matmul(transpose(b_), grad_w), matmul(grad_w, transpose(a_))};
}

void LoraLayer::sgd_step(const Grads& grads, double eta) {
  a_ -= eta * grads.a;
  b_ -= eta * grads.b;
}

std::size_t lora_param_count(std::size_t d1, std::size_t d2, std::size_t rank) {
  return rank * (d1 + d2);
}

}  // namespace ssh
