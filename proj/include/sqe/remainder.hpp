#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqe/besov.hpp"
#include "sqe/noise.hpp"
#include "sqe/report.hpp"

namespace sqe {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RegularityPack {
  double alpha0 = 0.1;
  double alpha = 0.05;
  double alpha_prime = 0.05;
  double beta = 0.3;
  double gamma = 0.25;
};

struct SolverConfig {
  int n = 3;
  std::vector<double> a{0, 0, 0, 1};
  double cutoff = 8;
  double dt = 1e-3;
  double horizon = 1;
  RegularityPack reg;
  double explosion_threshold = 1e8;  // on ||v||_{C^beta}
  // graded grid: dt_k = min(dt, grade * t_k) starting from dt0, for rough or huge initial data
  bool graded = false;
  double dt0 = 1e-8;
  double grade = 0.05;
};

// Throws ConfigError naming the violated constraint.
void check_config(const SolverConfig& c);

std::vector<double> make_time_grid(double T, double dt, bool graded = false, double dt0 = 1e-8, double grade = 0.05);
std::vector<double> make_time_grid(const SolverConfig& c);

// --- nonlinearity -------------------------------------------------------------------

// F(v, Z) = sum_j v^j Z^{(n-j)} projected onto v's modes. Z[j] multiplies v^j, a_n multiplies v^n.
SpectralField nonlinearity_F(const SpectralField& v, const std::vector<SpectralField>& Z, double a_n);

// sum_k a_k H_k(v + X1, R): the same quantity when the diagrams are Hermite powers of X1.
SpectralField hermite_F(const SpectralField& v, const SpectralField& X1, double R, const std::vector<double>& a);
void hermite_F(const SpectralField& v, const SpectralField& X1, double R, const std::vector<double>& a,
               SpectralField& out);

// F~'(v, Z) = sum_k k a_k sum_j binom(k-1, j) v^j <k-1-j>, on its full band. d[k-1] is <k>.
SpectralField nonlinearity_F_prime(const SpectralField& v, const std::vector<SpectralField>& d,
                                   const std::vector<double>& a);
// Pi[F~'(v, Z) h] onto h's modes.
SpectralField apply_F_prime(const SpectralField& v, const std::vector<SpectralField>& d, const std::vector<double>& a,
                            const SpectralField& h);

// Evaluates the nonlinearity at grid index i into `out` (same modes as v).
using Nonlinearity = std::function<void(std::size_t i, const SpectralField& v, SpectralField& out)>;

Nonlinearity z_nonlinearity(const ZVector& Z);
// Fast route: a_k H_k(v + X1_i, R) with X1 the OU path on v's modes.
Nonlinearity hermite_nonlinearity(const Trajectory& X1, double R, std::vector<double> a);

// v -> S(dt) v - phi1(dt) F
SpectralField etd_step(const SpectralField& v, const SpectralField& F, double dt);

struct SolveResult {
  Trajectory v;  // stored states (all grid times unless a stride was requested)
  SpectralField final;
  double final_time = 0;
  bool exploded = false;
  double explosion_time = std::numeric_limits<double>::quiet_NaN();
  std::string explosion_reason;
};

struct SolveOptions {
  bool store = true;
  std::size_t stride = 1;
  // called after v is known at grid index i (including i = 0)
  std::function<void(std::size_t i, double t, const SpectralField& v)> observer;
};

// Exponential Euler on the given grid; explosion (non-finite or C^beta norm above threshold) stops the run.
SolveResult integrate_mild(const SpectralField& x, const std::vector<double>& times, const Nonlinearity& F,
                           const SolverConfig& cfg, const SolveOptions& opt = {});

SolveResult solve_remainder(const SpectralField& x, const ZVector& Z, const SolverConfig& cfg,
                            const SolveOptions& opt = {});

// Cheap upper bound on ||v||_{C^beta} for beta >= 0: 2^{beta K} sum |v(m)|.
double holder_upper_bound(const SpectralField& v, double beta);

// T* = (1 / (C (R + 1)))^{1/theta}
double local_existence_time(double R, double C, double theta);

// --- energy ledger ------------------------------------------------------------------

struct EnergyRecord {
  double time = 0;
  double lp = 0;  // ||v||_p^p
  double K = 0;   // ||v^{p-2} |grad v|^2||_1
  double L = 0;   // ||v^{p+n-1}||_1
  double identity_residual = std::numeric_limits<double>::quiet_NaN();
};

struct EnergyLedger {
  int p = 2;
  std::vector<EnergyRecord> records;
  CsvTable csv(const std::string& name = "energy_ledger") const;
};

// Records per grid time; the residual compares a central difference of (1/p)||v||_p^p with
// -(p-1)K - ||v||_p^p - <Pi F, v^{p-1}>, using the nonlinearity the solver used.
EnergyLedger energy_diagnostics(const Trajectory& v, const Nonlinearity& F, int n, int p);

// --- comparison test and a priori bound ---------------------------------------------

struct ComparisonBound {
  double with_initial = 0;
  double initial_free = 0;
};
ComparisonBound comparison_bound(double f0, double lambda, double c1, double c2, double t);

struct AprioriExponent {
  int j = 0;  // Z^{(n-j)}
  int i = 0;  // 1..5
  double gamma = 0;
  double p = 0;  // 1 / (1 - gamma)
};

// Concrete Young exponents for the weighted sup; requires alpha < 1/((p+n-1)(n-1)).
std::vector<AprioriExponent> apriori_exponents(int n, int p, double alpha);

// For each x: C_x = max_t ||v_t||_p^p / B(t) with B(t) = t^{-1/(lambda-1)} v (sum ...)^{1/lambda};
// pass when max_x C_x / min_x C_x < 1.5. `Z` may be empty (literal zero drive).
ExperimentReport apriori_check(const std::vector<Trajectory>& v_family, const std::vector<std::string>& labels,
                               const std::vector<ZVector>& Z_family, int n, int p, double alpha, double alpha_prime,
                               double t_min, double t_max);

}  // namespace sqe
