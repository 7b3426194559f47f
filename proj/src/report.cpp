#include "sqe/report.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sqe {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "info";
  }
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "pass") return Verdict::pass;
  if (s == "fail") return Verdict::fail;
  if (s == "info") return Verdict::info;
  throw std::runtime_error("unknown verdict '" + s + "'");
}

std::string label(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string CsvTable::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

Metric& ExperimentReport::check(std::string name, double estimate, bool ok, std::string anchor,
                                std::string tolerance, double se) {
  Metric m;
  m.name = std::move(name);
  m.estimate = estimate;
  m.stderr_ = se;
  m.verdict = ok ? Verdict::pass : Verdict::fail;
  m.anchor = std::move(anchor);
  m.tolerance = std::move(tolerance);
  return add(std::move(m));
}

Metric& ExperimentReport::info(std::string name, double estimate, std::string anchor, double se) {
  Metric m;
  m.name = std::move(name);
  m.estimate = estimate;
  m.stderr_ = se;
  m.anchor = std::move(anchor);
  return add(std::move(m));
}

CsvTable& ExperimentReport::table(const std::string& name, std::vector<std::string> header) {
  for (auto& t : tables)
    if (t.name == name) return t;
  tables.push_back({name, std::move(header), {}});
  return tables.back();
}

bool ExperimentReport::all_pass() const {
  for (auto& m : metrics)
    if (m.verdict == Verdict::fail) return false;
  return !explosion && !aborted;
}

int ExperimentReport::exit_code() const {
  if (explosion || aborted) return 3;
  return all_pass() ? 0 : 1;
}

void ExperimentReport::merge(const ExperimentReport& o, const std::string& prefix) {
  for (auto m : o.metrics) {
    m.name = prefix + m.name;
    metrics.push_back(std::move(m));
  }
  for (auto t : o.tables) {
    t.name = prefix + t.name;
    tables.push_back(std::move(t));
  }
  for (auto& n : o.notes) notes.push_back(prefix + n);
  explosion = explosion || o.explosion;
  aborted = aborted || o.aborted;
}

// NaN is not valid JSON; store it as null and read it back as NaN.
static json num(double x) { return std::isfinite(x) ? json(x) : (std::isnan(x) ? json(nullptr) : json(x > 0 ? "inf" : "-inf")); }
static double unnum(const json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) return j.get<std::string>() == "inf" ? HUGE_VAL : -HUGE_VAL;
  return j.get<double>();
}

std::string report_to_json(const ExperimentReport& r) {
  json j;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["config_echo"] = r.config_echo;
  j["wall_seconds"] = r.wall_seconds;
  j["explosion"] = r.explosion;
  j["aborted"] = r.aborted;
  j["exit_code"] = r.exit_code();
  j["metrics"] = json::array();
  for (auto& m : r.metrics)
    j["metrics"].push_back({{"name", m.name},
                            {"estimate", num(m.estimate)},
                            {"stderr", num(m.stderr_)},
                            {"verdict", to_string(m.verdict)},
                            {"anchor", m.anchor},
                            {"tolerance", m.tolerance},
                            {"note", m.note}});
  j["tables"] = json::array();
  for (auto& t : r.tables) j["tables"].push_back({{"name", t.name}, {"header", t.header}, {"rows", t.rows}});
  j["notes"] = r.notes;
  return j.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
  json j = json::parse(text);
  ExperimentReport r;
  r.experiment = j.at("experiment");
  r.seed = j.at("seed");
  r.config_hash = j.at("config_hash");
  r.config_echo = j.at("config_echo");
  r.wall_seconds = j.at("wall_seconds");
  r.explosion = j.at("explosion");
  r.aborted = j.at("aborted");
  for (auto& jm : j.at("metrics")) {
    Metric m;
    m.name = jm.at("name");
    m.estimate = unnum(jm.at("estimate"));
    m.stderr_ = unnum(jm.at("stderr"));
    m.verdict = verdict_from_string(jm.at("verdict"));
    m.anchor = jm.at("anchor");
    m.tolerance = jm.at("tolerance");
    m.note = jm.at("note");
    r.metrics.push_back(std::move(m));
  }
  for (auto& jt : j.at("tables")) {
    CsvTable t;
    t.name = jt.at("name");
    t.header = jt.at("header").get<std::vector<std::string>>();
    t.rows = jt.at("rows").get<std::vector<std::vector<std::string>>>();
    r.tables.push_back(std::move(t));
  }
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

std::string report_summary(const ExperimentReport& r) {
  std::ostringstream os;
  os << "experiment " << r.experiment << "  seed " << r.seed << "  config " << r.config_hash.substr(0, 12)
     << "  wall " << std::fixed << std::setprecision(1) << r.wall_seconds << "s\n";
  os << std::defaultfloat;
  if (r.metrics.empty()) os << "  (no metrics)\n";
  for (auto& m : r.metrics) {
    os << (m.verdict == Verdict::fail ? "! " : "  ") << std::left << std::setw(5) << to_string(m.verdict) << " "
       << m.name << " = " << std::setprecision(6) << m.estimate;
    if (std::isfinite(m.stderr_)) os << " +- " << m.stderr_;
    if (!m.tolerance.empty()) os << "  [" << m.tolerance << "]";
    if (!m.anchor.empty()) os << "  {" << m.anchor << "}";
    if (!m.note.empty()) os << "  " << m.note;
    os << "\n";
  }
  for (auto& n : r.notes) os << "  note: " << n << "\n";
  if (r.explosion) os << "  EXPLOSION recorded\n";
  if (r.aborted) os << "  run aborted\n";
  os << "exit " << r.exit_code() << "\n";
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
  }
  std::filesystem::rename(tmp, path);
}

void write_artifacts(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / (r.experiment + ".json"), report_to_json(r));
  for (auto& t : r.tables) write_file_atomic(dir / (t.name + ".csv"), t.to_csv());
}

}  // namespace sqe
