#include "ssh/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ssh/errors.hpp"
#include "ssh/numerics.hpp"

namespace ssh {

using nlohmann::json;

std::string_view task_name(Task t) {
  switch (t) {
    case Task::PlantedRecovery:
      return "planted-recovery";
    case Task::Regression:
      return "regression";
    case Task::ClassificationToy:
      return "classification-toy";
  }
  return "?";
}

std::string_view placement_name(SupportPlacement p) {
  switch (p) {
    case SupportPlacement::TopEnergy:
      return "top-energy";
    case SupportPlacement::Random:
      return "random";
    case SupportPlacement::OffMask:
      return "off-mask";
  }
  return "?";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (stream * 0xd1b54a32d192ed03ULL);
  return splitmix64(state);
}

std::uint64_t ExperimentConfig::effective_selection_seed() const {
  return selection_seed_set ? selection.seed : derive_seed(seed, 1);
}

void ExperimentConfig::validate() const {
  if (d1 == 0 || d2 == 0) throw ContractError("config: shape must be positive");
  selection.validate(d1, d2);
  if (!std::isfinite(alpha) || alpha == 0.0) throw ContractError("config: alpha must be finite and nonzero");
  if (eta && (!std::isfinite(*eta) || *eta < 0.0)) throw ContractError("config: eta must be >= 0");
  if (!(eta_fraction > 0.0 && eta_fraction < 1.0)) {
    throw ContractError("config: eta_fraction must lie in (0, 1)");
  }
  if (epochs == 0) throw ContractError("config: epochs must be positive");
  if (batch == 0) throw ContractError("config: batch must be positive");
  if (planted == 0 || planted > d1 * d2) throw ContractError("config: planted must lie in [1, d1*d2]");
  if (support == SupportPlacement::OffMask && planted > d1 * d2 - selection.n) {
    throw CapacityError("config: off-mask support needs planted <= d1*d2 - n");
  }
  if (!(peak_amplitude >= 0.0) || !std::isfinite(peak_amplitude)) {
    throw ContractError("config: peak_amplitude must be finite and >= 0");
  }
  if (!(tolerance > 0.0)) throw ContractError("config: tolerance must be positive");
  if (baseline.kind == Baseline::Kind::Lora &&
      (baseline.rank == 0 || baseline.rank > std::min(d1, d2))) {
    throw ContractError("config: lora baseline rank outside [1, min(d1, d2)]");
  }
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= 1.0)) throw ContractError("config: deltas must lie in [0, 1]");
  }
  if (repeats == 0) throw ContractError("config: repeats must be positive");
}

namespace {

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: key '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ParseError(std::string("config: key '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), static_cast<std::int64_t>(e.byte));
  }
  if (!j.is_object()) throw ParseError("config: top level must be an object", 0);

  static const std::set<std::string> known = {
      "task",     "d1",        "d2",          "n",        "delta",          "selection_seed",
      "alpha",    "eta",       "eta_fraction", "epochs",  "batch",          "seed",
      "planted",  "support",   "peak_amplitude", "tolerance", "baseline",   "baseline_eta",
      "deltas",   "repeats"};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw ParseError("config: unknown key '" + item.key() + "'");
  }

  ExperimentConfig c;
  if (j.contains("task")) {
    const auto t = get_as<std::string>(j, "task");
    if (t == "planted-recovery") {
      c.task = Task::PlantedRecovery;
    } else if (t == "regression") {
      c.task = Task::Regression;
    } else if (t == "classification-toy") {
      c.task = Task::ClassificationToy;
    } else {
      throw ParseError("config: unknown task '" + t + "'");
    }
  }
  if (j.contains("d1")) c.d1 = get_count(j, "d1");
  if (j.contains("d2")) c.d2 = get_count(j, "d2");
  if (j.contains("n")) c.selection.n = get_count(j, "n");
  if (j.contains("delta")) c.selection.delta = get_as<double>(j, "delta");
  if (j.contains("selection_seed")) {
    c.selection.seed = get_as<std::uint64_t>(j, "selection_seed");
    c.selection_seed_set = true;
  }
  if (j.contains("alpha")) c.alpha = get_as<double>(j, "alpha");
  if (j.contains("eta")) c.eta = get_as<double>(j, "eta");
  if (j.contains("eta_fraction")) c.eta_fraction = get_as<double>(j, "eta_fraction");
  if (j.contains("epochs")) c.epochs = get_count(j, "epochs");
  if (j.contains("batch")) c.batch = get_count(j, "batch");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("planted")) c.planted = get_count(j, "planted");
  if (j.contains("support")) {
    const auto s = get_as<std::string>(j, "support");
    if (s == "top-energy") {
      c.support = SupportPlacement::TopEnergy;
    } else if (s == "random") {
      c.support = SupportPlacement::Random;
    } else if (s == "off-mask") {
      c.support = SupportPlacement::OffMask;
    } else {
      throw ParseError("config: unknown support placement '" + s + "'");
    }
  }
  if (j.contains("peak_amplitude")) c.peak_amplitude = get_as<double>(j, "peak_amplitude");
  if (j.contains("tolerance")) c.tolerance = get_as<double>(j, "tolerance");
  if (j.contains("baseline")) {
    const json& b = j.at("baseline");
    if (b.is_string() && b.get<std::string>() == "none") {
      c.baseline.kind = Baseline::Kind::None;
    } else if (b.is_string() && b.get<std::string>() == "full") {
      c.baseline.kind = Baseline::Kind::Full;
    } else if (b.is_object() && b.size() == 1 && b.contains("lora")) {
      c.baseline.kind = Baseline::Kind::Lora;
      c.baseline.rank = get_count(b, "lora");
    } else {
      throw ParseError("config: baseline must be \"none\", \"full\" or {\"lora\": rank}");
    }
  }
  if (j.contains("baseline_eta")) c.baseline_eta = get_as<double>(j, "baseline_eta");
  if (j.contains("deltas")) c.deltas = get_as<std::vector<double>>(j, "deltas");
  if (j.contains("repeats")) c.repeats = get_count(j, "repeats");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["task"] = task_name(c.task);
  j["d1"] = c.d1;
  j["d2"] = c.d2;
  j["n"] = c.selection.n;
  j["delta"] = c.selection.delta;
  if (c.selection_seed_set) j["selection_seed"] = c.selection.seed;
  j["alpha"] = c.alpha;
  if (c.eta) j["eta"] = *c.eta;
  j["eta_fraction"] = c.eta_fraction;
  j["epochs"] = c.epochs;
  j["batch"] = c.batch;
  j["seed"] = c.seed;
  j["planted"] = c.planted;
  j["support"] = placement_name(c.support);
  j["peak_amplitude"] = c.peak_amplitude;
  j["tolerance"] = c.tolerance;
  switch (c.baseline.kind) {
    case Baseline::Kind::None:
      j["baseline"] = "none";
      break;
    case Baseline::Kind::Full:
      j["baseline"] = "full";
      break;
    case Baseline::Kind::Lora:
      j["baseline"] = {{"lora", c.baseline.rank}};
      break;
  }
  j["baseline_eta"] = c.baseline_eta;
  if (!c.deltas.empty()) j["deltas"] = c.deltas;
  j["repeats"] = c.repeats;
  return j.dump(2);
}

}  // namespace ssh
