#pragma once

#include <limits>
#include <vector>

#include "sqe/spectral.hpp"

namespace sqe {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// 7th-order smoothstep on [0,1]: S(0)=0, S(1)=1, first three derivatives vanish at both ends.
double smoothstep7(double x);
double smoothstep7_deriv(double x);

// 1 on [0,1], 0 on [4/3, inf), smoothstep in between.
double dyadic_theta(double rho);

// chi_{-1}(m) = theta(|m|), chi_k(m) = theta(|m|/2^{k+1}) - theta(|m|/2^k), then normalised
// by their sum on the lattice. Block k >= 0 lives on 2^k < |m| < (8/3) 2^k.
class DyadicPartition {
 public:
  explicit DyadicPartition(int max_level);
  // smallest max_level with 2^max_level >= cutoff
  static DyadicPartition covering(double cutoff);

  int max_level() const { return K_; }
  // modes with |m| below this are covered (weights sum to one)
  double covered_radius() const { return (8.0 / 3.0) * std::ldexp(1.0, K_); }
  double weight(int kappa, Mode m) const;
  double raw_weight(int kappa, double r) const;

  // weights[kappa+1][i] for every mode of `ms`; cached per (cutoff, max_level)
  const std::vector<std::vector<double>>& weights_for(const ModeSet& ms) const;

 private:
  int K_;
};

struct BesovIndex {
  double alpha = 0;
  double p = kInf;
  double q = kInf;
};

struct NormOptions {
  // real-space grid is the smallest power of two above 2*pad*R; sup norms are
  // sampled there, even-p integrals are exact for pad >= p/2
  int pad = 2;
};

SpectralField lp_block(const SpectralField& f, int kappa, const DyadicPartition& part);

double lp_norm_grid(const std::vector<double>& g, double p);
double lp_norm(const SpectralField& f, double p, NormOptions opt = {});
// ||delta_k f||_{L^p} for k = -1..max_level
std::vector<double> block_norms(const SpectralField& f, double p, const DyadicPartition& part, NormOptions opt = {});
double besov_norm(const SpectralField& f, BesovIndex idx, const DyadicPartition& part, NormOptions opt = {});
// C^alpha = B^alpha_{inf,inf} with a partition covering f
double holder_norm(const SpectralField& f, double alpha, NormOptions opt = {});

struct WeightedNormSpec {
  double alpha = 0.05;
  double alpha_prime = 0.05;
  double horizon = 1.0;
  bool alpha_prime_below_alpha() const { return alpha_prime < alpha; }
};

// max_k t^{(k-1) alpha'} ||Z^{(k)}_t||_{C^{-alpha}} at a single time; Z[0] is order 1.
double weighted_value(const std::vector<SpectralField>& Z_at_t, double t, const WeightedNormSpec& spec,
                      NormOptions opt = {});
// max over k and grid times. Z[k-1] is the trajectory of order k.
double weighted_diagram_norm(const std::vector<Trajectory>& Z, const WeightedNormSpec& spec, NormOptions opt = {});

struct BonyParts {
  SpectralField para_fg;   // f < g: low frequencies of f against high of g
  SpectralField resonant;  // f o g
  SpectralField para_gf;   // f > g
};

// Products on the full band (cutoff_f + cutoff_g).
BonyParts bony_decompose(const SpectralField& f, const SpectralField& g, const DyadicPartition& part);

}  // namespace sqe
