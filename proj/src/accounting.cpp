#include "ssh/accounting.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

#include "ssh/errors.hpp"

namespace ssh {

void ModelConfig::validate() const {
  if (layer_shapes.empty()) throw ContractError("model '" + name + "': no adapted layers");
  for (const auto& s : layer_shapes) {
    if (s.rows == 0 || s.cols == 0) {
      throw ContractError("model '" + name + "': layer dimensions must be positive");
    }
  }
}

ModelConfig uniform_model(std::string name, std::size_t layers, std::size_t d1, std::size_t d2) {
  return ModelConfig{std::move(name), std::vector<LayerShape>(layers, LayerShape{d1, d2})};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Ssh:
      return "SSH";
    case Method::Lora:
      return "LoRA";
    case Method::FourierFtModel:
      return "FourierFT-model";
    case Method::Full:
      return "Full";
  }
  return "?";
}

namespace {

BudgetReport make_report(Method m, std::uint64_t params, double flops) {
  return BudgetReport{m, params, kBytesPerParam * params, flops};
}

double row_column_nlogn(std::size_t d1, std::size_t d2) {
  const double a = static_cast<double>(d1);
  const double b = static_cast<double>(d2);
  return a * b * std::log2(b) + b * a * std::log2(a);
}

}  // namespace

BudgetReport ssh_budget(const ModelConfig& cfg, std::size_t n) {
  cfg.validate();
  if (n == 0) throw ContractError("ssh budget: n must be at least 1");
  double flops = 0.0;
  for (const auto& s : cfg.layer_shapes) {
    if (n > s.rows * s.cols) {
      throw CapacityError("ssh budget: n exceeds the coefficients of a " +
                          std::to_string(s.rows) + "x" + std::to_string(s.cols) + " layer");
    }
    flops += flop_model(Method::Ssh, s.rows, s.cols, n);
  }
  return make_report(Method::Ssh, std::uint64_t{n} * cfg.num_layers(), flops);
}

BudgetReport lora_budget(const ModelConfig& cfg, std::size_t rank) {
  cfg.validate();
  if (rank == 0) throw ContractError("lora budget: rank must be at least 1");
  std::uint64_t params = 0;
  double flops = 0.0;
  for (const auto& s : cfg.layer_shapes) {
    params += std::uint64_t{rank} * (s.rows + s.cols);
    flops += flop_model(Method::Lora, s.rows, s.cols, rank);
  }
  return make_report(Method::Lora, params, flops);
}

BudgetReport fourierft_budget(const ModelConfig& cfg, std::size_t n) {
  cfg.validate();
  if (n == 0) throw ContractError("fourierft budget: n must be at least 1");
  double flops = 0.0;
  for (const auto& s : cfg.layer_shapes) flops += flop_model(Method::FourierFtModel, s.rows, s.cols, n);
  return make_report(Method::FourierFtModel, std::uint64_t{n} * cfg.num_layers(), flops);
}

BudgetReport full_budget(const ModelConfig& cfg) {
  cfg.validate();
  std::uint64_t params = 0;
  for (const auto& s : cfg.layer_shapes) params += std::uint64_t{s.rows} * s.cols;
  return make_report(Method::Full, params, 0.0);
}

double transform_flops(Method method, std::size_t d1, std::size_t d2) {
  switch (method) {
    case Method::Ssh:
      return kRealTransformFlopsPerNLogN * row_column_nlogn(d1, d2);
    case Method::FourierFtModel:
      return kComplexTransformFlopsPerNLogN * row_column_nlogn(d1, d2);
    default:
      throw ContractError("transform_flops: only SSH and FourierFT-model use a transform");
  }
}

double flop_model(Method method, std::size_t d1, std::size_t d2, std::size_t n) {
  switch (method) {
    case Method::Ssh:
      return transform_flops(method, d1, d2) + static_cast<double>(n);
    case Method::FourierFtModel:
      return transform_flops(method, d1, d2) + 2.0 * static_cast<double>(n);
    case Method::Lora:
      return 2.0 * static_cast<double>(d1) * static_cast<double>(d2) * static_cast<double>(n);
    case Method::Full:
      return 0.0;
  }
  return 0.0;
}

PrintedQuantity parse_printed(std::string_view text) {
  std::size_t split = 0;
  while (split < text.size() && (std::isdigit(static_cast<unsigned char>(text[split])) ||
                                 text[split] == '.')) {
    ++split;
  }
  const std::string number(text.substr(0, split));
  const std::string_view suffix = text.substr(split);
  if (number.empty()) throw ParseError("printed quantity '" + std::string(text) + "' has no number");

  PrintedQuantity q;
  q.text = std::string(text);
  q.number = std::stod(number);
  const auto dot = number.find('.');
  q.decimals = dot == std::string::npos ? 0 : static_cast<int>(number.size() - dot - 1);
  if (suffix == "K") {
    q.unit = 1e3;
  } else if (suffix == "M") {
    q.unit = 1e6;
  } else if (suffix == "KB") {
    q.unit = 1024.0;
  } else if (suffix == "MB") {
    q.unit = 1024.0 * 1024.0;
  } else {
    throw ParseError("printed quantity '" + std::string(text) + "' has unknown unit");
  }
  return q;
}

namespace {

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

}  // namespace

std::string render_like(double value, const PrintedQuantity& like) {
  const double scaled = round_to(value / like.unit, like.decimals);
  const std::string_view suffix = std::string_view(like.text).substr(
      like.text.find_first_not_of("0123456789."));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", like.decimals, scaled);
  return std::string(buf) + std::string(suffix);
}

bool matches_printed(double value, const PrintedQuantity& printed) {
  return std::abs(round_to(value / printed.unit, printed.decimals) - printed.number) <
         0.5 * std::pow(10.0, -printed.decimals - 1);
}

namespace {

// Known discrepancy notes, shared across rows.
constexpr const char* kBytesFromRoundedParams =
    "printed bytes follow 4 x the rounded printed count, not the exact count";
constexpr const char* kMegabyteIs1000KiB =
    "printed MB consistent with 1000 x 1024 bytes rather than 1024^2";
constexpr const char* kParamsCopiedFromRowAbove =
    "printed count does not follow n x L for any L shared with the LoRA column";
constexpr const char* kBytesUnexplained = "printed bytes not 4 x params under any single unit";
constexpr const char* kNoPresetFits =
    "no integer adapted-layer count reproduces the printed value";

PrintedCell ok(const char* printed) { return PrintedCell{printed, {}}; }
PrintedCell off(const char* printed, const char* why) { return PrintedCell{printed, why}; }

std::vector<ModelPreset> build_presets() {
  std::vector<ModelPreset> p;

  // 12 encoder blocks, query + value.
  p.push_back({"roberta-base", "RoBERTa Base", uniform_model("roberta-base", 24, 768, 768),
               "query+value x 12 blocks", false,
               {{4, ok("147K"), off("574KB", kBytesFromRoundedParams), 200, ok("4.8K"),
                 ok("18.8KB")},
                {8, ok("295K"), ok("1.13MB"), 200, off("24K", kParamsCopiedFromRowAbove),
                 off("94KB", kBytesFromRoundedParams)}}});

  p.push_back({"roberta-large", "RoBERTa Large", uniform_model("roberta-large", 48, 1024, 1024),
               "query+value x 24 blocks", false,
               {{4, ok("393K"), ok("1.5MB"), 200, ok("9.6K"), off("36.5KB", kBytesUnexplained)},
                {8, ok("786K"), ok("3MB"), 750, ok("36.0K"),
                 off("131.6KB", kBytesUnexplained)}}});

  // c_attn query+value slices over 24 blocks.
  p.push_back({"gpt2-medium", "GPT-2 Medium", uniform_model("gpt2-medium", 48, 1024, 1024),
               "query+value x 24 blocks", false,
               {{4, off("400K", kNoPresetFits), off("1.34MB", kBytesUnexplained), 375,
                 off("18.1K", "formula gives 375 x 48 = 18,000 (18.0K)"),
                 off("65.8KB", kBytesUnexplained)},
                {8, ok("786K"), ok("3MB"), 750, ok("36.0K"), off("131.6KB", kBytesUnexplained)}}});

  p.push_back({"gpt2-large", "GPT-2 Large", uniform_model("gpt2-large", 72, 1280, 1280),
               "query+value x 36 blocks", false,
               {{4, ok("737K"), ok("2.81MB"), 375, off("18.1K", kParamsCopiedFromRowAbove),
                 off("105.8KB", kBytesUnexplained)},
                {8, ok("1.47M"), off("5.74MB", kBytesUnexplained), 750,
                 off("36.0K", kParamsCopiedFromRowAbove), off("211.5KB", kBytesUnexplained)}}});

  p.push_back({"llama2-7b", "LLaMA-2 7B", uniform_model("llama2-7b", 64, 4096, 4096),
               "query+value x 32 blocks", true,
               {{16, ok("8.39M"), off("32.8MB", kMegabyteIs1000KiB), 750, ok("48.0K"),
                 off("187KB", "formula gives 187.5KB; printed value truncated")},
                {64, off("33.5M", "formula gives 33,554,432 (33.6M); printed value truncated"),
                 off("131.1MB", kMegabyteIs1000KiB), 1500, ok("96.0K"), ok("375KB")}}});

  p.push_back({"llama2-13b", "LLaMA-2 13B", uniform_model("llama2-13b", 80, 5120, 5120),
               "query+value x 40 blocks", true,
               {{16, ok("13.1M"), off("51.2MB", kMegabyteIs1000KiB), 750, ok("60K"), ok("234KB")},
                {64, ok("52.4M"), off("204.8MB", kMegabyteIs1000KiB), 1500, ok("120K"),
                 ok("469KB")}}});

  // Grouped-query attention: value projection is 1024 x 4096.
  {
    ModelConfig m{"llama3.1-8b", {}};
    for (int block = 0; block < 32; ++block) {
      m.layer_shapes.push_back({4096, 4096});
      m.layer_shapes.push_back({1024, 4096});
    }
    p.push_back({"llama3.1-8b", "LLaMA-3.1 8B", std::move(m),
                 "query (4096x4096) + value (1024x4096) x 32 blocks", true,
                 {{16, off("13.1M", "printed LoRA columns repeat the LLaMA-2 13B row"),
                   off("51.2MB", "printed LoRA columns repeat the LLaMA-2 13B row"), 750,
                   off("53.7K", kNoPresetFits), off("209KB", kNoPresetFits)},
                  {64, off("52.4M", "printed LoRA columns repeat the LLaMA-2 13B row"),
                   off("204.8MB", "printed LoRA columns repeat the LLaMA-2 13B row"), 1500,
                   off("107.5K", kNoPresetFits), off("420.1KB", kNoPresetFits)}}});
  }

  p.push_back({"vit-base", "ViT Base", uniform_model("vit-base", 24, 768, 768),
               "query+value x 12 blocks", false,
               {{8, ok("295K"), ok("1.13MB"), 2250, ok("54K"), off("210.7KB", kBytesUnexplained)},
                {16, ok("590K"), ok("2.25MB"), 7500,
                 off("179.2K", "formula gives 7500 x 24 = 180,000"),
                 off("700.5KB", kBytesUnexplained)}}});

  p.push_back({"vit-large", "ViT Large", uniform_model("vit-large", 48, 1024, 1024),
               "query+value x 24 blocks", false,
               {{8, ok("786K"), off("2.93MB", kBytesUnexplained), 2250, ok("108K"),
                 off("422.3KB", kBytesUnexplained)},
                {16, ok("1.57M"), ok("6MB"), 7500,
                 off("350K", "formula gives 7500 x 48 = 360,000"),
                 off("1.38MB", kBytesUnexplained)}}});
  return p;
}

Table1Cell make_cell(std::string column, std::uint64_t computed, double compare_value,
                     const PrintedCell& printed) {
  const PrintedQuantity q = parse_printed(printed.printed);
  Table1Cell cell;
  cell.column = std::move(column);
  cell.computed = computed;
  cell.computed_text = render_like(compare_value, q);
  cell.printed = printed.printed;
  cell.match = matches_printed(compare_value, q);
  cell.known_discrepancy = printed.known_discrepancy;
  return cell;
}

}  // namespace

const std::vector<ModelPreset>& model_presets() {
  static const std::vector<ModelPreset> presets = build_presets();
  return presets;
}

const ModelPreset& find_preset(std::string_view key) {
  for (const auto& p : model_presets()) {
    if (p.key == key) return p;
  }
  std::string available;
  for (const auto& p : model_presets()) available += (available.empty() ? "" : ", ") + p.key;
  throw ContractError("unknown preset '" + std::string(key) + "'; available: " + available);
}

std::vector<Table1Row> reproduce_table1(const ModelPreset& preset) {
  std::vector<Table1Row> rows;
  for (const auto& s : preset.settings) {
    const BudgetReport lora = lora_budget(preset.model, s.lora_rank);
    const BudgetReport ssh = ssh_budget(preset.model, s.ssh_n);
    Table1Row row;
    row.preset = preset.key;
    row.lora_rank = s.lora_rank;
    row.ssh_n = s.ssh_n;
    row.num_layers = preset.model.num_layers();
    row.cells.push_back(make_cell("lora_params", lora.trainable_params,
                                  static_cast<double>(lora.trainable_params), s.lora_params));
    row.cells.push_back(make_cell("lora_bytes", lora.required_bytes,
                                  static_cast<double>(lora.required_bytes), s.lora_bytes));
    row.cells.push_back(make_cell("ssh_params", ssh.trainable_params,
                                  static_cast<double>(ssh.trainable_params), s.ssh_params));
    row.cells.push_back(make_cell("ssh_bytes", ssh.required_bytes,
                                  static_cast<double>(ssh.required_bytes), s.ssh_bytes));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ssh
