#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace sqe {

// Welford accumulator; merge() is exact for combining disjoint batches.
struct RunningStats {
  std::size_t n = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  void merge(const RunningStats& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    double N = double(n + o.n);
    double d = o.mean - mean;
    mean += d * double(o.n) / N;
    m2 += o.m2 + d * d * double(n) * double(o.n) / N;
    n += o.n;
  }
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
  double stderr_mean() const { return n > 1 ? std::sqrt(variance() / double(n)) : 0.0; }
};

RunningStats stats_of(const std::vector<double>& x);

// Standard error of the mean from non-overlapping batch means.
double batch_means_se(const std::vector<double>& x, std::size_t n_batches = 50);

// Integrated autocorrelation time with Sokal's self-consistent window (c = 5).
double integrated_autocorr_time(const std::vector<double>& x);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  std::size_t dof = 0;
  // two-sided confidence interval on the slope from Student t
  double slope_lo(double level = 0.95) const;
  double slope_hi(double level = 0.95) const;
};

// Weighted least squares y ~ a + b x with weights w (1/sigma^2). Empty w means unit weights.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w = {});

double median(std::vector<double> x);

// Observed order of convergence between two refinement levels: log(e1/e2)/log(h1/h2).
inline double observed_order(double e1, double e2, double h1, double h2) { return std::log(e1 / e2) / std::log(h1 / h2); }

}  // namespace sqe
