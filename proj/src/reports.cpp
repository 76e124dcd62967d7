#include "ssh/reports.hpp"

#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace ssh {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_losses_csv(std::ostream& out, const TrainingResult& r) {
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < r.losses.size(); ++e) {
    out << e << ',' << format_double(r.losses[e]) << '\n';
  }
}

std::string training_metrics_json(const TrainingResult& r, const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["task"] = task_name(r.task);
  j["seed"] = cfg.seed;
  j["shape"] = {cfg.d1, cfg.d2};
  j["n"] = r.num_trainable;
  j["delta"] = cfg.selection.delta;
  j["alpha"] = cfg.alpha;
  j["eta"] = r.eta;
  j["stable_eta_bound"] = r.stable_eta_bound;
  j["epochs"] = cfg.epochs;
  j["initial_loss"] = r.losses.front();
  j["final_loss"] = r.final_loss;
  j["final_error"] = r.final_error;
  if (r.task == Task::PlantedRecovery) j["predicted_floor"] = r.predicted_floor;
  j["support_capture"] = r.support_capture;
  j["mask_hash"] = hex64(r.mask_hash);
  if (r.accuracy) j["accuracy"] = *r.accuracy;
  j["recovery_check"] = r.check_applicable ? (r.check_passed ? "passed" : "failed") : "not-applicable";
  if (r.baseline) {
    const auto& b = *r.baseline;
    j["baseline"] = {
        {"kind", b.kind == Baseline::Kind::Full ? "full" : "lora"},
        {"trainable_params", b.trainable_params},
        {"eta", b.eta},
        {"final_loss", b.diverged ? ordered_json(nullptr) : ordered_json(b.final_loss)},
        {"final_error", b.diverged ? ordered_json(nullptr) : ordered_json(b.final_error)},
        {"diverged", b.diverged}};
  }
  return j.dump(2) + "\n";
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "delta,final_error,final_loss,support_capture,mask_hash\n";
  for (const auto& r : rows) {
    out << format_double(r.delta) << ',' << format_double(r.final_error) << ','
        << format_double(r.final_loss) << ',' << format_double(r.support_capture) << ','
        << hex64(r.mask_hash) << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& out, const std::vector<SweepSummaryRow>& rows) {
  out << "delta,seeds,mean_capture,min_capture,max_capture,mean_final_error\n";
  for (const auto& r : rows) {
    out << format_double(r.delta) << ',' << r.seeds << ',' << format_double(r.mean_capture) << ','
        << format_double(r.min_capture) << ',' << format_double(r.max_capture) << ','
        << format_double(r.mean_final_error) << '\n';
  }
}

std::string gradcheck_json(const GradcheckReport& r) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["passed"] = r.passed;
  j["tolerance"] = kGradcheckTolerance;
  j["epsilon"] = kGradcheckEpsilon;
  j["scale_floor"] = kGradcheckScaleFloor;
  j["max_rel_error"] = r.max_rel_error;
  j["max_strict_rel_error"] = r.max_strict_rel_error;
  j["trials"] = ordered_json::array();
  for (const auto& t : r.trials) {
    j["trials"].push_back({{"shape", {t.d1, t.d2}},
                           {"n", t.n},
                           {"alpha", t.alpha},
                           {"max_rel_error", t.max_rel_error},
                           {"max_strict_rel_error", t.max_strict_rel_error}});
  }
  return j.dump(2) + "\n";
}

std::string table1_status(const Table1Cell& cell) {
  if (cell.known_discrepancy.empty()) return cell.match ? "match" : "undocumented-mismatch";
  return cell.match ? "stale-note" : "documented-discrepancy";
}

bool table1_consistent(const std::vector<Table1Row>& rows) {
  for (const auto& row : rows) {
    for (const auto& c : row.cells) {
      const std::string s = table1_status(c);
      if (s != "match" && s != "documented-discrepancy") return false;
    }
  }
  return true;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows) {
  out << "preset,lora_r,ssh_n,layers,column,computed,computed_text,printed,match,status,note\n";
  for (const auto& row : rows) {
    for (const auto& c : row.cells) {
      out << row.preset << ',' << row.lora_rank << ',' << row.ssh_n << ',' << row.num_layers << ','
          << c.column << ',' << c.computed << ',' << c.computed_text << ',' << c.printed << ','
          << (c.match ? "true" : "false") << ',' << table1_status(c) << ','
          << csv_quote(c.known_discrepancy) << '\n';
    }
  }
}

void write_spectrum_csv(std::ostream& out, const SpectrumReport& r) {
  out << "u,v,energy,selected\n";
  for (const auto& c : r.cells) {
    out << c.u << ',' << c.v << ',' << format_double(c.energy) << ',' << (c.selected ? 1 : 0)
        << '\n';
  }
}

std::string spectrum_summary_json(const SpectrumReport& r) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["shape"] = {r.rows, r.cols};
  j["n"] = r.n;
  j["total_energy"] = r.total_energy;
  ordered_json q = ordered_json::object();
  for (const auto& [level, value] : r.quantiles) q[format_double(level)] = value;
  j["energy_quantiles"] = q;
  j["topn_capture"] = r.topn_capture;
  j["mask_capture"] = r.mask_capture;
  return j.dump(2) + "\n";
}

std::string budget_json(const std::string& model, const std::vector<BudgetReport>& reports) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = model;
  j["flop_note"] = "analytical model estimate, not a measurement";
  j["reports"] = ordered_json::array();
  for (const auto& r : reports) {
    j["reports"].push_back({{"method", method_name(r.method)},
                            {"trainable_params", r.trainable_params},
                            {"required_bytes", r.required_bytes},
                            {"flop_estimate", r.flop_estimate}});
  }
  return j.dump(2) + "\n";
}

}  // namespace ssh
