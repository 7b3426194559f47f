#pragma once

#include <optional>
#include <vector>

#include "sqe/spectral.hpp"

namespace sqe {

// Positive symmetric kernel on the disc {|m| <= M}, stored on the square [-M, M]^2.
struct Kernel {
  int window = 0;
  double decay = 1.0;  // alpha in K(m) <~ (1 + |m|^2)^{-alpha}
  std::vector<double> table;

  int width() const { return 2 * window + 1; }
  bool in_window(int m1, int m2) const {
    return std::abs(m1) <= window && std::abs(m2) <= window && double(m1) * m1 + double(m2) * m2 <= double(window) * window;
  }
  double operator()(int m1, int m2) const {
    if (!in_window(m1, m2)) return 0.0;
    return table[std::size_t(m1 + window) * width() + (m2 + window)];
  }
  double& ref(int m1, int m2) { return table[std::size_t(m1 + window) * width() + (m2 + window)]; }

  // K(m) = scale / (1 + |m|^2)^alpha
  static Kernel power_law(int M, double alpha, double scale = 1.0);
  // K^gamma(m) = 1 / (1 + |m|^2)^{1 - gamma}
  static Kernel gamma_kernel(int M, double gamma) { return power_law(M, 1.0 - gamma); }
  // smallest A with K(m) <= A (1+|m|^2)^{-decay} on the window
  double envelope_constant() const;
};

enum class ConvRange { full, inner, outer };  // all l, |l| <= N, |l| > N

struct KernelConvolution {
  Kernel result;
  // integral estimate of the terms lost to the finite windows, per mode (same layout as result.table)
  std::vector<double> tail;
  double tail_at(int m1, int m2) const {
    return tail[std::size_t(m1 + result.window) * result.width() + (m2 + result.window)];
  }
};

// result(m) = sum_l K1(m - l) K2(l), l restricted by `range` relative to N.
KernelConvolution kernel_convolve(const Kernel& K1, const Kernel& K2, ConvRange range = ConvRange::full, int N = 0);

// Brute-force double loop, for cross-checks.
double kernel_convolve_direct(const Kernel& K1, const Kernel& K2, Mode m, ConvRange range = ConvRange::full,
                              int N = 0);

// n copies of K convolved together.
KernelConvolution self_convolve(const Kernel& K, int n);

struct KernelBoundFit {
  double constant = 0;       // max over samples of conv(m) * envelope(m)^{-1}
  double tail_constant = 0;  // same for the tail estimate
  bool log_envelope = false;
};

// Envelope (1+|m|^2)^{-(alpha+beta-1)}, or (log|m| v 1)/(1+|m|^2) when alpha = beta = 1.
KernelBoundFit verify_kernel_bound(const KernelConvolution& conv, double alpha, double beta,
                                   const std::vector<Mode>& sample_modes);

// Tail variant: for |m| < N, conv(m) <= C (1+N^2)^{-(alpha+beta-1)}.
KernelBoundFit verify_tail_bound(const KernelConvolution& conv, double alpha, double beta, int N,
                                 const std::vector<Mode>& sample_modes);

// n-fold envelope exponent n*alpha - (n-1); requires alpha in ((n-1)/n, 1].
KernelBoundFit verify_nfold_bound(const KernelConvolution& conv, double alpha, int n,
                                  const std::vector<Mode>& sample_modes);

}  // namespace sqe
