#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ssh/accounting.hpp"
#include "ssh/experiments.hpp"

namespace ssh {

// Output schema version, written into every JSON report. CSV column sets are
// fixed per version; see docs/formats.md.
inline constexpr int kReportSchemaVersion = 1;

// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);
std::string hex64(std::uint64_t v);

// epoch,loss
void write_losses_csv(std::ostream& out, const TrainingResult& r);
std::string training_metrics_json(const TrainingResult& r, const ExperimentConfig& cfg);

// delta,final_error,final_loss,support_capture,mask_hash
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
// delta,seeds,mean_capture,min_capture,max_capture,mean_final_error
void write_sweep_summary_csv(std::ostream& out, const std::vector<SweepSummaryRow>& rows);

std::string gradcheck_json(const GradcheckReport& r);

// preset,lora_r,ssh_n,layers,column,computed,computed_text,printed,match,status,note
// status is one of match | documented-discrepancy | undocumented-mismatch | stale-note.
void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows);
std::string table1_status(const Table1Cell& cell);
// True when every cell either matches or carries a note and mismatches.
bool table1_consistent(const std::vector<Table1Row>& rows);

// u,v,energy,selected
void write_spectrum_csv(std::ostream& out, const SpectrumReport& r);
std::string spectrum_summary_json(const SpectrumReport& r);

std::string budget_json(const std::string& model, const std::vector<BudgetReport>& reports);

}  // namespace ssh
