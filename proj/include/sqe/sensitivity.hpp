#pragma once

#include <limits>
#include <vector>

#include "sqe/dynamics.hpp"

namespace sqe {

struct CutoffSpec {
  double r = 0.5;
};

// 1 on |zeta| <= r/2, 0 on |zeta| >= r, 1 - smoothstep7 in between.
double cutoff_chi(double zeta, const CutoffSpec& c);
double cutoff_chi_deriv(double zeta, const CutoffSpec& c);

inline constexpr double kNever = std::numeric_limits<double>::infinity();

// First grid time with max_k t^{(k-1) alpha'} ||Z^{(k)}_t||_{C^-alpha} > r, or kNever.
// Z[k-1] is the trajectory of order k.
double stopping_time(const std::vector<Trajectory>& Z, const CutoffSpec& c, const WeightedNormSpec& spec);

struct LinearFlow {
  double s = 0;
  SpectralField h;
  Trajectory Jh;  // J_{s,t} h on the base grid from s on
};

// dJ = (Delta - 1) J dt - Pi[F~'(v, <.>) J] dt by exponential Euler on the base grid.
LinearFlow solve_linearization(const Trajectory& v, const DiagramSet& d, const std::vector<double>& a, double s,
                               const SpectralField& h);

// Likelihood ratio of the shifted OU increments eta -> eta + delta * d_k.
struct GirsanovWeight {
  double integral = 0;   // sum_k <d_k, eta_k>_{Cov^{-1}}
  double quadratic = 0;  // sum_k |d_k|^2_{Cov^{-1}}
  void add(const SpectralField& eta, const SpectralField& d, const std::vector<double>& var);
  double weight(double delta) const { return std::exp(delta * integral - 0.5 * delta * delta * quadratic); }
};

struct BelSpec {
  RunSpec run;  // cfg, x, replicas, seed
  Observable phi;
  SpectralField h;
  double t = 0.5;
  CutoffSpec cutoff{4.0};
  double fd_step = 1e-6;
  std::vector<double> girsanov_deltas{0.1, 0.5};
  double novikov_safety = 1.0;  // multiplies the deterministic budget
};

struct BelResult {
  double lhs = 0, rhs = 0, se_lhs = 0, se_rhs = 0, se_diff = 0;
  double martingale_term = 0, boundary_term = 0;  // the two parts of rhs
  double p_tau_exceeded = 0;
  std::vector<double> girsanov_mean, girsanov_se;
  double novikov_budget = 0;
  std::size_t novikov_exceeded = 0;
  std::size_t bound_checked = 0, bound_violations = 0;  // s^gamma ||J_s h||_{C^beta} <= 2 ||h||_{C^-alpha0}
  std::size_t replicas = 0;
  bool exploded = false;
};

BelResult bel_estimator(const BelSpec& spec);
ExperimentReport bel_report(const BelSpec& spec, const std::vector<double>& r_sensitivity = {});

// FD of the solution map against J along random directions; observed order between the two deltas.
ExperimentReport linearization_experiment(const SolverConfig& cfg, std::size_t directions, std::uint64_t seed,
                                          double d1 = 1e-3, double d2 = 1e-4);

struct TvSpec {
  RunSpec run;  // x is the reference point
  double t = 0.5;
  std::vector<double> distances{1, 0.1, 0.01, 0.001};  // y = x + eps * direction
  SpectralField direction;  // e_0 when empty
  std::vector<double> r_values{0.3, 0.5, 0.9};
};

ExperimentReport tv_experiment(const TvSpec& spec);

}  // namespace sqe
