// Runs every experiment at its default configuration and prints one verdict line per
// acceptance criterion. A criterion passes when its metrics pass and the run fits its budget.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sqe/config.hpp"
#include "sqe/experiments.hpp"
#include "sqe/report.hpp"

using namespace sqe;

namespace {

struct Run {
  ExperimentReport rep;
  double seconds = 0;
};

struct Criterion {
  int id;
  std::string title;
  std::vector<std::string> experiments;
  double budget_seconds;
  // which metrics count; empty means every checked metric
  std::function<bool(const Metric&)> select;
};

Run run(const std::string& name) {
  auto cfg = parse_config(name, nullptr);
  const auto t0 = std::chrono::steady_clock::now();
  Run r{run_experiment(cfg), 0};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_artifacts(r.rep, "acceptance_out/" + name);
  } catch (const std::exception& e) {
    std::cerr << "could not write artifacts for " << name << ": " << e.what() << "\n";
  }
  std::cout << "== " << name << " (" << label(r.seconds) << " s)\n" << report_summary(r.rep) << std::flush;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  auto named = [](std::set<std::string> names) {
    return [names](const Metric& m) { return names.count(m.name) > 0; };
  };
  const std::vector<Criterion> criteria{
      {1, "Wick covariance oracle", {"wick-covariance"}, 120, {}},
      {2, "Hermite shift and restart identities", {"restart-consistency"}, 60,
       named({"restart_binomial_error", "shifted_wick_error"})},
      {3, "Markov restart consistency", {"restart-consistency"}, 60, named({"markov_sup_error[dt=0.001]"})},
      {4, "coming down from infinity", {"dissipation"}, 120, {}},
      {5, "uniform moments", {"moments"}, 600, {}},
      {6, "linearization", {"linearization"}, 120, {}},
      {7, "BEL identity", {"bel"}, 600, {}},
      {8, "equilibrium cross-validation", {"gibbs-compare"}, 900, {}},
      {9, "exponential mixing", {"mixing"}, 1200, {}},
      {10, "control reachability", {"control"}, 60, {}},
      {11, "support probes", {"support-probe"}, 600, {}},
      {12, "Besov and kernel suites", {"besov-suite", "kernel-bounds"}, 300, {}},
  };

  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  std::map<std::string, Run> runs;
  for (auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    for (auto& e : c.experiments)
      if (!runs.count(e)) runs.emplace(e, run(e));
  }

  std::cout << "\n";
  bool all = true;
  for (auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    double seconds = 0;
    std::size_t counted = 0;
    std::vector<std::string> failed;
    bool broken = false;
    for (auto& e : c.experiments) {
      const auto& r = runs.at(e);
      seconds += r.seconds;
      broken = broken || r.rep.aborted || r.rep.explosion;
      for (auto& m : r.rep.metrics) {
        if (m.verdict == Verdict::info) continue;
        if (c.select && !c.select(m)) continue;
        ++counted;
        if (m.verdict == Verdict::fail) failed.push_back(e + ":" + m.name + "=" + fmt(m.estimate));
      }
    }
    const bool in_budget = seconds <= c.budget_seconds;
    const bool ok = !broken && counted > 0 && failed.empty() && in_budget;
    all = all && ok;
    std::cout << "criterion " << c.id << " (" << c.title << "): " << (ok ? "PASS" : "FAIL") << "  runtime "
              << label(seconds) << " s / budget " << label(c.budget_seconds) << " s";
    if (broken) std::cout << "  [aborted or exploded]";
    if (counted == 0) std::cout << "  [no checked metrics]";
    if (!in_budget) std::cout << "  [over budget]";
    for (auto& f : failed) std::cout << "  [" << f << "]";
    std::cout << "\n";
  }
  return all ? 0 : 1;
}
