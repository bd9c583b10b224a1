// SPDX-License-Identifier: Apache-2.0
#include "tunecomp/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace tunecomp {

namespace fs = std::filesystem;

namespace {

std::string where(std::size_t line_no) {
  return line_no == 0 ? std::string("results") : "line " + std::to_string(line_no);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& s, const char* field, std::size_t line_no) {
  T v{};
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw CsvError(where(line_no) + ": bad " + field + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string format_record_stable(const RunRecord& r) {
  return r.pipeline + ',' + r.init + ',' + std::to_string(r.rank) + ',' + format_double(r.prune_ratio) +
         ',' + std::to_string(r.seed) + ',' + format_double(r.compression_ratio) + ',' +
         format_double(r.accuracy);
}

std::string format_record(const RunRecord& r) {
  return format_record_stable(r) + ',' + format_double(r.wall_time);
}

void validate_record(const RunRecord& r, std::size_t line_no) {
  auto fail = [&](const std::string& msg) { throw CsvError(where(line_no) + ": " + msg); };
  try {
    parse_pipeline(r.pipeline);
  } catch (const std::invalid_argument&) {
    fail("unknown pipeline '" + r.pipeline + "'");
  }
  if (r.init != "none") {
    try {
      parse_init_method(r.init);
    } catch (const std::invalid_argument&) {
      fail("unknown init '" + r.init + "'");
    }
  }
  if (!(r.prune_ratio >= 0.0 && r.prune_ratio <= 1.0)) fail("prune_ratio outside [0, 1]");
  if (!(std::isfinite(r.compression_ratio) && r.compression_ratio > 0.0)) fail("compression_ratio must be positive");
  if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0)) fail("accuracy outside [0, 1]");
  if (!(std::isfinite(r.wall_time) && r.wall_time >= 0.0)) fail("wall_time must be nonnegative");
}

RunRecord parse_record(const std::string& line, std::size_t line_no) {
  const auto f = split_csv(line);
  if (f.size() != 8) {
    throw CsvError(where(line_no) + ": expected 8 columns, got " + std::to_string(f.size()));
  }
  RunRecord r;
  r.pipeline = f[0];
  r.init = f[1];
  r.rank = parse_number<std::size_t>(f[2], "rank", line_no);
  r.prune_ratio = parse_number<double>(f[3], "prune_ratio", line_no);
  r.seed = parse_number<std::uint64_t>(f[4], "seed", line_no);
  r.compression_ratio = parse_number<double>(f[5], "compression_ratio", line_no);
  r.accuracy = parse_number<double>(f[6], "accuracy", line_no);
  r.wall_time = parse_number<double>(f[7], "wall_time", line_no);
  validate_record(r, line_no);
  return r;
}

void append_records(const fs::path& path, const std::vector<RunRecord>& records) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for append");
  std::string text;
  if (fresh) text += std::string(kResultsHeader) + '\n';
  for (const auto& r : records) text += format_record(r) + '\n';
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<RunRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("results file not found: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CsvError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw CsvError(path.string() + ": unexpected header '" + line + "'");
  std::vector<RunRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(parse_record(line, line_no));
  }
  return out;
}

bool dominates(const RunRecord& a, const RunRecord& b) {
  return a.compression_ratio <= b.compression_ratio && a.accuracy >= b.accuracy &&
         (a.compression_ratio < b.compression_ratio || a.accuracy > b.accuracy);
}

std::vector<RunRecord> pareto_front(const std::vector<RunRecord>& records) {
  std::vector<RunRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(), [](const RunRecord& a, const RunRecord& b) {
    if (a.compression_ratio != b.compression_ratio) return a.compression_ratio < b.compression_ratio;
    return a.accuracy > b.accuracy;
  });
  // Every dominator sorts earlier and dominance is transitive, so checking
  // the front built so far is enough.
  std::vector<RunRecord> front;
  for (const auto& r : sorted) {
    bool dominated = false;
    for (const auto& f : front) {
      if (dominates(f, r)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(r);
  }
  return front;
}

std::vector<ReportRow> build_report(const std::vector<RunRecord>& records) {
  if (records.empty()) throw CsvError("report: no records");
  std::map<std::pair<std::string, double>, std::map<double, std::vector<double>>> groups;
  for (const auto& r : records) groups[{r.pipeline, r.prune_ratio}][r.compression_ratio].push_back(r.accuracy);

  std::vector<ReportRow> rows;
  for (const auto& [key, by_ratio] : groups) {
    for (const auto& [ratio, accs] : by_ratio) {
      ReportRow row;
      row.series = key.first + "/rho=" + format_double(key.second);
      row.compression_ratio = ratio;
      row.count = accs.size();
      double sum = 0.0;
      for (double a : accs) sum += a;
      row.mean_accuracy = sum / static_cast<double>(accs.size());
      double ss = 0.0;
      for (double a : accs) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
      row.stddev = accs.size() > 1 ? std::sqrt(ss / static_cast<double>(accs.size() - 1)) : 0.0;
      row.best_accuracy = *std::max_element(accs.begin(), accs.end());
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportHeader) + '\n';
  for (const auto& r : rows) {
    out += r.series + ',' + format_double(r.compression_ratio) + ',' + format_double(r.mean_accuracy) + ',' +
           format_double(r.stddev) + ',' + format_double(r.best_accuracy) + ',' + std::to_string(r.count) + '\n';
  }
  return out;
}

}  // namespace tunecomp
