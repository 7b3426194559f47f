#include "sqe/kernel.hpp"
#include "sqe/fft.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace sqe {

Kernel Kernel::power_law(int M, double alpha, double scale) {
  Kernel K;
  K.window = M;
  K.decay = alpha;
  K.table.assign(std::size_t(K.width()) * K.width(), 0.0);
  for (int a = -M; a <= M; ++a)
    for (int b = -M; b <= M; ++b)
      if (K.in_window(a, b)) K.ref(a, b) = scale * std::pow(1.0 + double(a) * a + double(b) * b, -alpha);
  return K;
}

double Kernel::envelope_constant() const {
  double A = 0;
  for (int a = -window; a <= window; ++a)
    for (int b = -window; b <= window; ++b)
      if (in_window(a, b)) A = std::max(A, (*this)(a, b) * std::pow(1.0 + double(a) * a + double(b) * b, decay));
  return A;
}

namespace {

bool in_range(int l1, int l2, ConvRange range, int N) {
  double r2 = double(l1) * l1 + double(l2) * l2;
  switch (range) {
    case ConvRange::inner: return r2 <= double(N) * N;
    case ConvRange::outer: return r2 > double(N) * N;
    default: return true;
  }
}

// int_M^inf 2 pi r (1+r^2)^{-a} (1 + r^2 + rho^2)^{-b} dr: the l-kernel cut at M, with
// |m - l|^2 replaced by its angular mean r^2 + rho^2
double radial_tail(double M, double rho, double a, double b) {
  if (a + b <= 1.0) return std::numeric_limits<double>::infinity();
  boost::math::quadrature::exp_sinh<double> q;
  auto f = [&](double s) {
    double r = M + s;
    return 2 * kPi * r * std::pow(1 + r * r, -a) * std::pow(1 + r * r + rho * rho, -b);
  };
  return q.integrate(f);
}

// area of {|l| <= M, |m - l| > M} for |m| = rho
double crescent_area(double M, double rho) {
  if (rho <= 0) return 0;
  if (rho >= 2 * M) return kPi * M * M;
  const double lens = 2 * M * M * std::acos(rho / (2 * M)) - 0.5 * rho * std::sqrt(4 * M * M - rho * rho);
  return kPi * M * M - lens;
}

}  // namespace

KernelConvolution kernel_convolve(const Kernel& K1, const Kernel& K2, ConvRange range, int N) {
  const int M1 = K1.window, M2 = K2.window;
  const int M = std::min(M1, M2);
  int L = 4;
  while (L < 2 * M1 + 2 * M2 + 2) L *= 2;

  // linear convolution by zero padding
  fft::ComplexBuffer a(std::size_t(L) * L), b(std::size_t(L) * L), fa(std::size_t(L) * L), fb(std::size_t(L) * L);
  auto wrap = [L](int i) { return i < 0 ? i + L : i; };
  for (int i = -M1; i <= M1; ++i)
    for (int j = -M1; j <= M1; ++j) a[std::size_t(wrap(i)) * L + wrap(j)] = K1(i, j);
  for (int i = -M2; i <= M2; ++i)
    for (int j = -M2; j <= M2; ++j)
      if (in_range(i, j, range, N)) b[std::size_t(wrap(i)) * L + wrap(j)] = K2(i, j);
  fft::c2c(L, a.data(), fa.data(), -1);
  fft::c2c(L, b.data(), fb.data(), -1);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft::c2c(L, fa.data(), a.data(), +1);
  const double norm = 1.0 / (double(L) * L);

  KernelConvolution out;
  out.result.window = M;
  out.result.decay = K1.decay + K2.decay - 1.0;
  out.result.table.assign(std::size_t(out.result.width()) * out.result.width(), 0.0);
  out.tail.assign(out.result.table.size(), 0.0);
  const double A1 = K1.envelope_constant(), A2 = K2.envelope_constant();
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j) {
      if (!out.result.in_window(i, j)) continue;
      // the product of positive kernels is positive; clip FFT rounding
      double v = a[std::size_t(wrap(i)) * L + wrap(j)].real() * norm;
      out.result.ref(i, j) = std::max(v, 0.0);
    }
  // tail estimate depends on |m| only
  std::map<long, double> by_radius;
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j) {
      if (!out.result.in_window(i, j)) continue;
      long r2 = long(i) * i + long(j) * j;
      auto it = by_radius.find(r2);
      if (it == by_radius.end()) {
        double rho = std::sqrt(double(r2));
        // lost terms: l beyond the window (unless only inner l are wanted), plus the crescent where l
        // is kept but m - l falls outside it; the two regions are disjoint
        double t = 0;
        if (range != ConvRange::inner) t += radial_tail(M, rho, K2.decay, K1.decay);
        if (range != ConvRange::inner || N + rho > M)
          t += crescent_area(M, rho) * std::pow(1.0 + double(M) * M, -(K1.decay + K2.decay));
        t *= A1 * A2;
        it = by_radius.emplace(r2, t).first;
      }
      out.tail[std::size_t(i + M) * out.result.width() + (j + M)] = it->second;
    }
  return out;
}

double kernel_convolve_direct(const Kernel& K1, const Kernel& K2, Mode m, ConvRange range, int N) {
  double s = 0;
  const int M2 = K2.window;
  for (int i = -M2; i <= M2; ++i)
    for (int j = -M2; j <= M2; ++j) {
      if (!K2.in_window(i, j) || !in_range(i, j, range, N)) continue;
      s += K1(m.m1 - i, m.m2 - j) * K2(i, j);
    }
  return s;
}

KernelConvolution self_convolve(const Kernel& K, int n) {
  if (n < 2) throw SpectralError("self convolution needs at least two copies");
  KernelConvolution acc = kernel_convolve(K, K);
  for (int k = 3; k <= n; ++k) {
    auto next = kernel_convolve(acc.result, K);
    for (std::size_t i = 0; i < next.tail.size(); ++i) next.tail[i] += acc.tail[i];
    acc = std::move(next);
  }
  return acc;
}

namespace {

KernelBoundFit fit(const KernelConvolution& conv, const std::vector<Mode>& samples, auto envelope) {
  KernelBoundFit f;
  for (const auto& m : samples) {
    if (!conv.result.in_window(m.m1, m.m2))
      throw SpectralError("sample mode outside the convolution window");
    double e = envelope(m);
    f.constant = std::max(f.constant, conv.result(m.m1, m.m2) / e);
    f.tail_constant = std::max(f.tail_constant, conv.tail_at(m.m1, m.m2) / e);
  }
  return f;
}

}  // namespace

KernelBoundFit verify_kernel_bound(const KernelConvolution& conv, double alpha, double beta,
                                   const std::vector<Mode>& sample_modes) {
  if (alpha <= 0 || alpha > 1 || beta <= 0 || beta > 1) throw SpectralError("kernel exponents must lie in (0,1]");
  const double e = alpha + beta - 1.0;
  if (e <= 0) throw SpectralError("kernel bound needs alpha + beta > 1");
  const bool log_case = alpha == 1.0 && beta == 1.0;
  auto f = fit(conv, sample_modes, [&](Mode m) {
    double r2 = norm2(m);
    if (log_case) return std::max(0.5 * std::log(r2), 1.0) / (1.0 + r2);
    return std::pow(1.0 + r2, -e);
  });
  f.log_envelope = log_case;
  return f;
}

KernelBoundFit verify_tail_bound(const KernelConvolution& conv, double alpha, double beta, int N,
                                 const std::vector<Mode>& sample_modes) {
  const double e = alpha + beta - 1.0;
  if (e <= 0) throw SpectralError("kernel bound needs alpha + beta > 1");
  for (const auto& m : sample_modes)
    if (norm2(m) >= double(N) * N) throw SpectralError("tail bound only applies for |m| < N");
  const double env = std::pow(1.0 + double(N) * N, -e);
  return fit(conv, sample_modes, [&](Mode) { return env; });
}

KernelBoundFit verify_nfold_bound(const KernelConvolution& conv, double alpha, int n,
                                  const std::vector<Mode>& sample_modes) {
  if (!(alpha > double(n - 1) / n && alpha <= 1.0)) throw SpectralError("n-fold bound needs alpha in ((n-1)/n, 1]");
  const double e = n * alpha - (n - 1);
  return fit(conv, sample_modes, [&](Mode m) { return std::pow(1.0 + norm2(m), -e); });
}

}  // namespace sqe
