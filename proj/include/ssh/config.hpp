#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssh/spectrum.hpp"

namespace ssh {

enum class Task { PlantedRecovery, Regression, ClassificationToy };

// Where the hidden spectral delta lives relative to the base weight.
enum class SupportPlacement {
  TopEnergy,  // the m highest-energy cells of dht2(w0), tie-break as in selection
  Random,     // m cells uniformly at random
  OffMask,    // m cells drawn from outside the layer's mask
};

struct Baseline {
  enum class Kind { None, Lora, Full };
  Kind kind = Kind::None;
  std::size_t rank = 0;  // Lora only
};

struct ExperimentConfig {
  Task task = Task::PlantedRecovery;
  std::size_t d1 = 32;
  std::size_t d2 = 32;
  SelectionConfig selection{40, 0.5, 0};
  bool selection_seed_set = false;  // otherwise derived from `seed`
  double alpha = 1.0;
  std::optional<double> eta;   // absolute learning rate
  double eta_fraction = 0.1;   // used when eta is absent: eta = fraction * 2 / lambda_max
  std::size_t epochs = 1000;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
  std::size_t planted = 20;  // m, size of the hidden support
  SupportPlacement support = SupportPlacement::TopEnergy;
  double peak_amplitude = 20.0;  // spectral peaks planted in w0
  double tolerance = 1e-6;       // recovery threshold on ||W - W*||_F
  Baseline baseline;
  double baseline_eta = 0.05;
  std::vector<double> deltas;  // sweep-delta grid
  std::size_t repeats = 1;     // sweep-delta seeds

  // Throws ContractError / CapacityError on inconsistent values.
  void validate() const;
  // Selection seed actually used (explicit or derived).
  std::uint64_t effective_selection_seed() const;
};

std::string_view task_name(Task t);
std::string_view placement_name(SupportPlacement p);

// Strict JSON parsing: unknown keys and type mismatches are ParseErrors,
// syntax errors carry the byte offset.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

// Independent substreams of one experiment seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ssh
