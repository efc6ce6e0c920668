#pragma once

// CSV and plain-text artifacts. Files meant to be compared byte for byte
// (solutions, histories, bounds) carry no wall-clock columns; timings go to
// separate files.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gesha/benchmarks.hpp"
#include "gesha/core_model.hpp"
#include "gesha/evaluator.hpp"
#include "gesha/sha_engine.hpp"

namespace gesha {

// generator,t,x with t 1-based.
void write_solution_csv(std::ostream& out, const Instance& instance, std::span<const double> x);
// Throws DataError on unknown generators, bad steps, duplicates or gaps.
std::vector<double> parse_solution_csv(const std::string& text, const Instance& instance);
std::vector<double> read_solution_csv(const std::filesystem::path& path, const Instance& instance);

// nu,scenario,master_objective,delta,value,flagged
void write_sha_history_csv(std::ostream& out, const std::vector<ShaRecord>& history);
// nu,wall_seconds
void write_sha_timing_csv(std::ostream& out, const std::vector<ShaRecord>& history);
// iteration,lower,upper
void write_benders_history_csv(std::ostream& out, const std::vector<BendersRecord>& history);
// iteration,wall_seconds
void write_benders_timing_csv(std::ostream& out, const std::vector<BendersRecord>& history);

// One row per report: value, ratio to `baseline` (empty when <= 0) and the
// mitigation and cost summaries.
void write_reports_csv(std::ostream& out, const std::vector<EvaluationReport>& reports,
                       double baseline = 0.0);
// Per-scenario rows for one report.
void write_scenarios_csv(std::ostream& out, const EvaluationReport& report);
// Side-by-side table, one column per report.
std::string format_reports_table(const std::vector<EvaluationReport>& reports, double baseline = 0.0);

// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
std::string format_number(double v);

}  // namespace gesha
