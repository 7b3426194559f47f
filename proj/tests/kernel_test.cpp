#include <doctest.h>

#include <cmath>

#include "sqe/kernel.hpp"

using namespace sqe;

TEST_CASE("kernel convolution at the origin matches the direct sum") {
  auto K = Kernel::power_law(64, 0.9);
  auto c = kernel_convolve(K, K);
  const double direct = kernel_convolve_direct(K, K, {0, 0});
  CHECK(c.result(0, 0) == doctest::Approx(direct).epsilon(1e-10));
  // by hand: sum over the disc of (1+|l|^2)^{-1.8}
  double hand = 0;
  for (int a = -64; a <= 64; ++a)
    for (int b = -64; b <= 64; ++b)
      if (a * a + b * b <= 64 * 64) hand += std::pow(1.0 + a * a + b * b, -1.8);
  CHECK(direct == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("kernel convolution is symmetric and positive") {
  auto K1 = Kernel::power_law(16, 0.9);
  auto K2 = Kernel::power_law(16, 0.8);
  auto c = kernel_convolve(K1, K2);
  const int W = c.result.window;
  for (int a = -W; a <= W; ++a)
    for (int b = -W; b <= W; ++b) {
      if (!c.result.in_window(a, b)) continue;
      CHECK(c.result(a, b) == doctest::Approx(c.result(-a, -b)).epsilon(1e-12));
      CHECK(c.result(a, b) == doctest::Approx(c.result(b, a)).epsilon(1e-12));
      CHECK(c.result(a, b) > 0);
    }
}

TEST_CASE("inner and outer restricted convolutions add up to the full one") {
  auto K1 = Kernel::power_law(12, 0.9);
  auto K2 = Kernel::power_law(12, 0.8);
  const int N = 5;
  auto full = kernel_convolve(K1, K2);
  auto in = kernel_convolve(K1, K2, ConvRange::inner, N);
  auto out = kernel_convolve(K1, K2, ConvRange::outer, N);
  double worst = 0;
  for (int a = -6; a <= 6; ++a)
    for (int b = -6; b <= 6; ++b) {
      if (!full.result.in_window(a, b)) continue;
      worst = std::max(worst, std::abs(in.result(a, b) + out.result(a, b) - full.result(a, b)) / full.result(a, b));
      CHECK(out.result(a, b) == doctest::Approx(kernel_convolve_direct(K1, K2, {a, b}, ConvRange::outer, N)).epsilon(1e-10));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("convolution against direct sums off the origin") {
  auto K1 = Kernel::power_law(10, 1.0);
  auto K2 = Kernel::gamma_kernel(10, 0.25);
  auto c = kernel_convolve(K1, K2);
  for (Mode m : {Mode{1, 0}, Mode{3, 2}, Mode{-4, 1}})
    CHECK(c.result(m.m1, m.m2) == doctest::Approx(kernel_convolve_direct(K1, K2, m)).epsilon(1e-10));
}

TEST_CASE("power law kernel envelope constant") {
  auto K = Kernel::power_law(8, 0.7, 3.0);
  K.decay = 0.7;
  CHECK(K.envelope_constant() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(K(0, 0) == doctest::Approx(3.0));
  CHECK(K(9, 0) == 0.0);
}

TEST_CASE("bound fits are finite on a modest window") {
  auto K = Kernel::power_law(32, 0.9);
  auto K2 = Kernel::power_law(32, 0.8);
  std::vector<Mode> samples;
  for (int a = 0; a <= 8; ++a) samples.push_back({a, a / 2});
  auto fit = verify_kernel_bound(kernel_convolve(K, K2), 0.9, 0.8, samples);
  CHECK(std::isfinite(fit.constant));
  CHECK(fit.constant > 0);
  auto f3 = verify_nfold_bound(self_convolve(K, 3), 0.9, 3, samples);
  CHECK(std::isfinite(f3.constant));
  CHECK(f3.constant > 0);
}
