#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sqe/besov.hpp"
#include "sqe/report.hpp"

namespace sqe {

// Random real trigonometric polynomial: Gaussian coefficients scaled by
// (1+|m|^2)^{-s/2} with s drawn in [s_lo, s_hi] and an overall log-uniform amplitude.
SpectralField random_polynomial(const ModeSetPtr& ms, std::mt19937_64& rng, double s_lo = -0.5, double s_hi = 2.0);

struct InequalityCase {
  std::string id;
  std::string anchor;
  // lhs / rhs for one random draw; the constant is the max over draws
  std::function<double(std::mt19937_64&)> ratio;
};

std::vector<InequalityCase> inequality_cases(double cutoff = 12.0);

struct InequalityFit {
  std::string id;
  double constant_n = 0;   // max ratio over the first n draws
  double constant_2n = 0;  // max ratio over 2n draws (superset)
  double drift = 0;        // relative change between the two
  bool finite = false;
};

InequalityFit fit_inequality(const InequalityCase& c, int n_samples, std::uint64_t seed);

// Every case at n and 2n samples; passes when the fit is finite and drifts < 50%.
ExperimentReport inequality_suite(int n_samples, std::uint64_t seed, double cutoff = 12.0);

}  // namespace sqe
