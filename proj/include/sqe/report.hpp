#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

namespace sqe {

enum class Verdict { pass, fail, info };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct Metric {
  std::string name;
  double estimate = 0;
  double stderr_ = std::nan("");
  Verdict verdict = Verdict::info;
  std::string anchor;     // which claim the metric exercises
  std::string tolerance;  // the declared threshold, human readable
  std::string note;
};

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string to_csv() const;
};

std::string fmt(double x);
// shortest readable form (6 significant digits), for metric names
std::string label(double x);

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string config_echo;
  double wall_seconds = 0;
  bool explosion = false;
  bool aborted = false;
  std::deque<Metric> metrics;  // deque: references returned by add/check stay valid
  std::deque<CsvTable> tables;
  std::vector<std::string> notes;

  Metric& add(Metric m) {
    metrics.push_back(std::move(m));
    return metrics.back();
  }
  // pass iff condition; records the tolerance string
  Metric& check(std::string name, double estimate, bool ok, std::string anchor, std::string tolerance,
                double se = std::nan(""));
  Metric& info(std::string name, double estimate, std::string anchor, double se = std::nan(""));
  CsvTable& table(const std::string& name, std::vector<std::string> header);

  bool all_pass() const;
  // 0 all pass, 1 metric failure, 3 explosion or abort
  int exit_code() const;
  void merge(const ExperimentReport& other, const std::string& prefix = "");
};

std::string report_to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const std::string& text);
std::string report_summary(const ExperimentReport& r);

// JSON report plus one CSV per table; each file is written to a temp name and renamed.
void write_artifacts(const ExperimentReport& r, const std::filesystem::path& dir);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sqe
