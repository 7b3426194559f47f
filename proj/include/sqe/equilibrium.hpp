#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqe/dynamics.hpp"

namespace sqe {

struct GibbsSpec {
  double cutoff = 4;
  std::vector<double> a{0, 0, 0, 1};
  double renorm = -1;  // negative: use the cutoff's own constant
  double step_scale = 2.38;  // proposal scale / sqrt(dim), per-mode std ~ 1/sqrt(I)
  std::size_t chain_length = 200000;
  std::size_t burn_in = 20000;
  std::size_t thin = 10;

  double renorm_value() const;
};

// -sum_m I_m |c_m|^2 - 2 sum_k a_k/(k+1) int H_{k+1}(X, R) dz, up to a constant
double gibbs_log_density(const SpectralField& X, const GibbsSpec& spec);

// Metropolis acceptance ratio for moving from x to y: min(1, pi(y)/pi(x)).
double metropolis_accept(double log_pi_x, double log_pi_y);

struct ChainResult {
  std::vector<SpectralField> samples;  // thinned, after burn-in
  double acceptance = 0;
  std::string warning;  // set when the acceptance rate is outside [0.1, 0.7]
};

// Random-walk Metropolis in the real coordinates (c_0, Re c_m, Im c_m for representatives).
ChainResult metropolis_sample(const GibbsSpec& spec, std::uint64_t seed, const SpectralField* start = nullptr);

// Equilibrium observables: <X, e_0>^2 and ||X||_{C^-alpha}.
struct EquilibriumObservable {
  std::string name;
  double (*eval)(const SpectralField&, double alpha);
};
std::vector<EquilibriumObservable> equilibrium_observables();

struct SeriesSummary {
  double mean = 0;
  double se = 0;   // batch means
  double tau = 1;  // integrated autocorrelation time
  std::size_t n = 0;
};
// Pools independent series: mean of all points, se from per-series batch means combined.
SeriesSummary summarize_series(const std::vector<std::vector<double>>& series);

struct EquilibriumSpec {
  SolverConfig cfg;  // dynamics: cutoff, dt, coefficients
  std::size_t dyn_replicas = 16;
  double burn_in_time = 5;
  double run_time = 500;   // per replica, after burn-in
  double sample_every = 0.05;
  GibbsSpec gibbs;
  std::size_t chains = 8;
  double negative_control_shift = 0.25;  // added to R in a second Metropolis run
  std::uint64_t seed = 0;
  double alpha = 0.05;
};

ExperimentReport equilibrium_compare(const EquilibriumSpec& spec);

// --- mixing -------------------------------------------------------------------------

struct MixingSpec {
  RunSpec run;  // cfg, replicas, seed, dictionary
  SpectralField x, y;
  std::vector<double> times{0.5, 1, 2, 4, 6};
};

ExperimentReport mixing_experiment(const MixingSpec& spec);

// --- control ------------------------------------------------------------------------

enum class ControlScheme { etd1, etdrk2 };

struct ControlProblem {
  SpectralField x, y;
  double T = 1;
  double renorm = 0;
};

struct ControlResult {
  Trajectory X;            // controlled solution
  double endpoint_error;   // ||X(T) - y||_{C^-alpha0}
  double endpoint_max_abs;
  double path_error;       // max over the grid of |X - Xbar| coefficientwise
};

// Target path Xbar(t) = S(t)x + (t/T)(y - S(T)x) and its forcing.
SpectralField control_path(const ControlProblem& p, double t);
SpectralField control_forcing(const ControlProblem& p, const std::vector<double>& a, double t);

ControlResult control_to_target(const ControlProblem& p, const SolverConfig& cfg,
                                ControlScheme scheme = ControlScheme::etdrk2);

ExperimentReport control_experiment(const SolverConfig& cfg, double renorm);

// --- support probes -------------------------------------------------------------------

struct ProbeSpec {
  std::vector<int> m_range{3, 4, 5};
  std::vector<double> renorm_targets{0, 0.25};
  double lambda = 0.5;        // coarse cutoff lambda * 2^m
  double alpha = 0.5;         // regularity of the residual norms
  std::size_t replicas = 16;
  std::vector<double> times{0, 0.25, 0.5, 0.75, 1};
  std::uint64_t seed = 0;
  double max_fine_cutoff = 64;
};

// first m >= 1 with R^m > R
int probe_m0(double renorm, double lambda);
double probe_C(int m, double renorm, double lambda);
// sqrt(2 C) cos(2 pi 2^m (1,1).z) on `ms`
SpectralField probe_f(int m, double C, const ModeSetPtr& ms);
double probe_lambda(int m);

ExperimentReport support_probe(const ProbeSpec& spec);

}  // namespace sqe
