#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sqe/spectral.hpp"

namespace sqe {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based Gaussian source. A draw is a pure function of
// (seed, replica, step, lattice point, component), so restarting a run, or
// running it on a nested mode set, reproduces exactly the same numbers.
struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  double scale = 1.0;  // 0 switches the noise off (test hook)

  double gaussian(std::int64_t step, Mode m, int component) const;
};

// Step index reserved for the stationary initial draw.
inline constexpr std::int64_t kStationaryStep = -1;

// R = sum_m 1/(2 I_m), the stationary variance of <1> at a point.
double renorm_constant(const ModeSet& ms);

// Fills `out` with standard complex white noise: zero mode real N(0,1),
// representative modes (g1 + i g2)/sqrt 2, the rest by Hermitian symmetry.
void standard_noise(const NoiseStream& ns, std::int64_t step, SpectralField& out);

// Per-mode variance of the exact OU increment over dt: (1 - e^{-2 I dt}) / (2 I).
std::vector<double> ou_increment_variance(const ModeSet& ms, double dt);

// eta with Var eta_m = (1 - e^{-2 I_m dt})/(2 I_m), keyed by `step`.
SpectralField ou_increment(const ModeSetPtr& ms, double dt, const NoiseStream& ns, std::int64_t step);

enum class OUStart { stationary, zero_at };

struct OUState {
  SpectralField field;
  OUStart start = OUStart::zero_at;
  double start_time = 0;  // s for zero_at
  double time = 0;
};

OUState sample_stationary_ou(const ModeSetPtr& ms, const NoiseStream& ns, double time = 0);
OUState zero_ou(const ModeSetPtr& ms, double start_time);

// Exact-in-law transition over dt, draws keyed by `step`.
void ou_step(OUState& st, double dt, const NoiseStream& ns, std::int64_t step);

// OU values at every grid time; step k covers (times[k], times[k+1]] and uses key first_step + k.
Trajectory ou_path(OUState start, const std::vector<double>& times, const NoiseStream& ns,
                   std::int64_t first_step = 0);

// --- Hermite polynomials -------------------------------------------------------

double hermite(int k, double X, double C);
// H_0..H_n at X
void hermite_all(int n, double X, double C, double* out);

// H_k(X, C) projected onto X's own mode set.
SpectralField hermite(int k, const SpectralField& X, double C);
// H_1..H_n(X, C) on their full bands (H_k lives on cutoff k * cutoff(X)); index k-1.
std::vector<SpectralField> hermite_full(int n, const SpectralField& X, double C);

// T_w<k> = sum_j binom(k,j) w^j <k-j>, k = 1..n, with <0> = 1, on full bands.
// `d[k-1]` is <k>. Used for shifted Wick powers, restarts and support probes.
std::vector<SpectralField> translate_diagrams(const std::vector<SpectralField>& d, const SpectralField& w);

// --- diagram sets ---------------------------------------------------------------

enum class DiagramOrigin { stationary, zero_start, shifted };

struct DiagramSet {
  int n = 1;
  double renorm = 0;
  DiagramOrigin origin = DiagramOrigin::stationary;
  double origin_time = 0;
  std::vector<Trajectory> diagrams;  // diagrams[k-1] is <k>

  const std::vector<double>& times() const { return diagrams.at(0).times; }
  std::size_t size() const { return diagrams.empty() ? 0 : diagrams[0].size(); }
  std::vector<SpectralField> at(std::size_t i) const;
  // index of grid time t; throws if t is not a grid time
  std::size_t index_of_time(double t) const;
};

DiagramSet wick_trajectory(const Trajectory& ou, int n, double renorm,
                           DiagramOrigin origin = DiagramOrigin::stationary, double origin_time = 0);

// <k>_{s,t} = sum_j binom(k,j) (-S(t-s)<1>_{-inf,s})^j <k-j>_{-inf,t}
std::vector<SpectralField> shifted_wick(const SpectralField& stationary_at_s,
                                        const std::vector<SpectralField>& diagrams_at_t, double lag);

// --- driving vector Z -----------------------------------------------------------

// Z[j] multiplies v^j in F(v, Z) = sum_j v^j Z^{(n-j)}: Z[j] = Z^{(n-j)} for j < n, and a_n for j = n.
struct ZVector {
  int n = 1;
  double a_n = 1;
  std::vector<Trajectory> Z;  // j = 0..n-1

  std::size_t size() const { return Z.empty() ? 0 : Z[0].size(); }
  std::vector<SpectralField> at(std::size_t i) const;
};

void check_coefficients(const std::vector<double>& a);
// Z^{(n-j)} = sum_{k=j}^n a_k binom(k,j) <k-j> at a single time
std::vector<SpectralField> assemble_Z_at(const std::vector<SpectralField>& d, const std::vector<double>& a);
ZVector assemble_Z(const DiagramSet& d, const std::vector<double>& a);

double binomial(int n, int k);

// Spectrum of E[<n>_{t1}(z1) <n>_{t2}(z2)] as a function of z1 - z2: n! (rho^{*n})(m)
// with rho(m) = e^{-I_m |t1-t2|} / (2 I_m), on the band n * cutoff.
SpectralField analytic_wick_covariance(int n, double t1, double t2, const ModeSetPtr& ms);
// E[<n>_{t1}(phi) <n>_{t2}(phi)] = sum_m spec(m) |phi(m)|^2 for real phi
double pair_covariance(const SpectralField& spectrum, const SpectralField& phi);

// --- export ----------------------------------------------------------------------

// columns: time, k, m1, m2, re, im
std::string diagrams_csv(const DiagramSet& d);

// Binary snapshot. Header: "SQE1", u32 version, u32 n, f64 cutoff (of <1>), f64 renorm,
// u32 origin, f64 origin time,
// u64 grid length; then per grid time an f64 time followed by <1>..<n> coefficients
// (interleaved re/im f64) in canonical order of each band.
void write_snapshot(const DiagramSet& d, const std::filesystem::path& path);
DiagramSet read_snapshot(const std::filesystem::path& path);

}  // namespace sqe
