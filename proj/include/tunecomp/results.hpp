// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunecomp/pipeline.hpp"

namespace tunecomp {

/// Malformed results or report input; the message names the line.
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kResultsHeader =
    "pipeline,init,rank,prune_ratio,seed,compression_ratio,accuracy,wall_time";
inline constexpr const char* kReportHeader =
    "series,compression_ratio,mean_accuracy,stddev,best_accuracy,n";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

std::string format_record(const RunRecord& r);
/// The row without its wall_time column, for determinism comparisons.
std::string format_record_stable(const RunRecord& r);
RunRecord parse_record(const std::string& line, std::size_t line_no = 0);
/// Throws CsvError if a field breaks the record invariants.
void validate_record(const RunRecord& r, std::size_t line_no = 0);

/// Appends rows, writing the header first when the file is new or empty.
void append_records(const std::filesystem::path& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

/// True when `a` is no worse on both axes and strictly better on one
/// (lower compression ratio, higher accuracy).
bool dominates(const RunRecord& a, const RunRecord& b);
/// Nondominated subset, ordered by ascending compression ratio.
std::vector<RunRecord> pareto_front(const std::vector<RunRecord>& records);

struct ReportRow {
  std::string series;  // "<pipeline>/rho=<ρ>"
  double compression_ratio = 0.0;
  double mean_accuracy = 0.0;
  double stddev = 0.0;  // sample stddev over seeds, 0 for one record
  double best_accuracy = 0.0;
  std::size_t count = 0;
};

/// Groups by (pipeline, ρ) series and compression ratio. Rows are ordered by
/// series, then ascending ratio. Throws CsvError on empty input.
std::vector<ReportRow> build_report(const std::vector<RunRecord>& records);
std::string format_report(const std::vector<ReportRow>& rows);

}  // namespace tunecomp
