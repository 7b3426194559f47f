#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqe/noise.hpp"
#include "sqe/remainder.hpp"
#include "sqe/report.hpp"

namespace sqe {

// Phi(x) = g(<x, phi>) with g in {sin, cos, tanh}; bounded, with a closed-form derivative.
struct Observable {
  enum class G { sin, cos, tanh };
  std::string name;
  G g = G::sin;
  SpectralField phi;

  double pairing(const SpectralField& X) const;
  double value(const SpectralField& X) const;
  // DPhi(X)(Y)
  double derivative(const SpectralField& X, const SpectralField& Y) const;
};

// {sin, cos, tanh} x {e_0, e_(1,0) + e_(-1,0), bump}; phi lives on `ms`.
std::vector<Observable> observable_dictionary(const ModeSetPtr& ms);
SpectralField smooth_bump(const ModeSetPtr& ms);

struct RunSpec {
  SolverConfig cfg;
  SpectralField x;  // projected onto the cutoff modes
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::vector<Observable> dictionary;
  double noise_scale = 1.0;

  // one disjoint stream per replica: the replica index is part of every noise key
  NoiseStream stream(std::size_t replica) const { return NoiseStream{seed, replica, noise_scale}; }
};

struct ProcessState {
  double time = 0;
  OUState ou;  // <1>_{origin, time}
  SpectralField v;
  SpectralField X;
  DiagramOrigin origin = DiagramOrigin::zero_start;
  std::int64_t next_step = 0;  // noise key of the step leaving `time`
};

struct ReplicaPath {
  Trajectory X;  // empty unless stored
  ProcessState final;
  bool exploded = false;
  double explosion_time = 0;
  std::string explosion_reason;
};

using ProcessObserver = std::function<void(std::size_t i, double t, const SpectralField& X)>;

// X = <1>_{0,.} + v with the OU started at zero at times[0]; v from the fast Hermite route.
// Deterministic in (seed, replica).
ReplicaPath simulate_replica(const RunSpec& spec, std::size_t replica, const std::vector<double>& times,
                             const ProcessObserver& obs = {}, bool store = true);
// All replicas on make_time_grid(spec.cfg), in parallel.
std::vector<ReplicaPath> simulate(const RunSpec& spec, bool store = true);

// <k>_{t, t+.} built from the same keyed noise as the run that reached `st`. times[0] must be st.time.
DiagramSet restart_diagrams(const ProcessState& st, const std::vector<double>& times, const NoiseStream& ns, int n);

// max coefficient error of <k>_{0,t+h} = sum_j binom(k,j) (S(h)<1>_{0,t})^j <k-j>_{t,t+h}, k = 1..n
double restart_identity_error(const ModeSetPtr& ms, int n, double t, double h, double dt, const NoiseStream& ns);

struct MarkovResult {
  double sup_error = 0;
  std::size_t compared = 0;
  bool exploded = false;
};

// Direct solve on [0, t+h] against solve to t, re-expansion around X(t) and continuation,
// both through the diagram route F(v, Z). t and t+h must be grid times.
MarkovResult markov_consistency(const SpectralField& x, double t, double h, const RunSpec& spec,
                                std::size_t replica = 0);

// (t^{p/(n-1)} ^ 1) E||X(t;x)||^p_{C^-alpha} per x and t; pairwise agreement at t >= 1.
ExperimentReport moment_survey(const std::vector<SpectralField>& x_family, const std::vector<std::string>& labels,
                               const std::vector<double>& times, int p, const RunSpec& spec);

}  // namespace sqe
