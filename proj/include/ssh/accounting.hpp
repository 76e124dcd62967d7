#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssh {

struct LayerShape {
  std::size_t rows = 0;  // d1, output dimension
  std::size_t cols = 0;  // d2, input dimension
};

struct ModelConfig {
  std::string name;
  std::vector<LayerShape> layer_shapes;

  std::size_t num_layers() const noexcept { return layer_shapes.size(); }
  // Throws ContractError when empty or any dimension is zero.
  void validate() const;
};

// Uniform preset: `layers` copies of one shape.
ModelConfig uniform_model(std::string name, std::size_t layers, std::size_t d1, std::size_t d2);

enum class Method { Ssh, Lora, FourierFtModel, Full };

std::string_view method_name(Method m);

// Storage convention: 32-bit values, sparse indices not counted.
inline constexpr std::uint64_t kBytesPerParam = 4;

struct BudgetReport {
  Method method = Method::Ssh;
  std::uint64_t trainable_params = 0;
  std::uint64_t required_bytes = 0;
  double flop_estimate = 0.0;  // modeled delta-reconstruction cost per forward
};

BudgetReport ssh_budget(const ModelConfig& cfg, std::size_t n);
BudgetReport lora_budget(const ModelConfig& cfg, std::size_t rank);
BudgetReport fourierft_budget(const ModelConfig& cfg, std::size_t n);
BudgetReport full_budget(const ModelConfig& cfg);

// FLOP model (an analytical estimate, never a measurement).
//
// A length-N 1D transform costs c * N * log2(N) real operations with
// c = 2.5 for the real Hartley transform and c = 5 for the complex FFT.
// A d1 x d2 2D transform is row-column composed:
//   c * (d1 * d2 * log2(d2) + d2 * d1 * log2(d1)).
inline constexpr double kRealTransformFlopsPerNLogN = 2.5;
inline constexpr double kComplexTransformFlopsPerNLogN = 5.0;

// Transform term only. Defined for Ssh and FourierFtModel.
double transform_flops(Method method, std::size_t d1, std::size_t d2);

// Per-layer delta reconstruction:
//   Ssh:            real 2D transform + n scatter ops
//   FourierFtModel: complex 2D inverse FFT + 2n scatter ops (real and imaginary)
//   Lora:           2 * d1 * d2 * n for the b a product, with n read as the rank
//   Full:           0 (no reconstruction)
double flop_model(Method method, std::size_t d1, std::size_t d2, std::size_t n);

// A value as printed in a table cell, e.g. "4.8K" or "131.6KB".
struct PrintedQuantity {
  std::string text;
  double number = 0.0;
  int decimals = 0;
  double unit = 1.0;  // K=1e3, M=1e6 for counts; KB=1024, MB=1024^2 for bytes
};

// Parses "<number><K|M>" (counts) or "<number><KB|MB>" (bytes).
PrintedQuantity parse_printed(std::string_view text);
// value / unit rounded half away from zero to `decimals` places.
std::string render_like(double value, const PrintedQuantity& like);
bool matches_printed(double value, const PrintedQuantity& printed);

struct PrintedCell {
  std::string printed;
  // Non-empty when the printed value is known not to follow from the
  // formula; explains what the numbers suggest.
  std::string known_discrepancy;
};

struct Table1Setting {
  std::size_t lora_rank;
  PrintedCell lora_params;
  PrintedCell lora_bytes;
  std::size_t ssh_n;
  PrintedCell ssh_params;
  PrintedCell ssh_bytes;
};

struct ModelPreset {
  std::string key;    // CLI name, e.g. "roberta-base"
  std::string label;  // table label
  ModelConfig model;
  std::string adapted;  // which matrices are adapted
  bool inferred;        // adapted set reverse-engineered from the table arithmetic
  std::vector<Table1Setting> settings;
};

const std::vector<ModelPreset>& model_presets();
// Throws ContractError listing the available keys.
const ModelPreset& find_preset(std::string_view key);

struct Table1Cell {
  std::string column;  // "lora_params", "lora_bytes", "ssh_params", "ssh_bytes"
  std::uint64_t computed = 0;
  std::string computed_text;
  std::string printed;
  bool match = false;
  std::string known_discrepancy;
};

struct Table1Row {
  std::string preset;
  std::size_t lora_rank = 0;
  std::size_t ssh_n = 0;
  std::size_t num_layers = 0;
  std::vector<Table1Cell> cells;
};

std::vector<Table1Row> reproduce_table1(const ModelPreset& preset);

}  // namespace ssh
