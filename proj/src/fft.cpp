#include "sqe/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace sqe::fft {

namespace {

struct Plans {
  fftw_plan c2r = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex plan_mu;

// FFTW_ESTIMATE keeps plan choice, and therefore rounding, identical run to run.
const Plans& plans(int N) {
  static std::map<int, Plans> cache;
  std::lock_guard lock(plan_mu);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  const std::size_t H = std::size_t(N / 2 + 1);
  double* r = fftw_alloc_real(std::size_t(N) * N);
  fftw_complex* s = fftw_alloc_complex(std::size_t(N) * H);
  fftw_complex* a = fftw_alloc_complex(std::size_t(N) * N);
  fftw_complex* b = fftw_alloc_complex(std::size_t(N) * N);
  Plans p;
  p.c2r = fftw_plan_dft_c2r_2d(N, N, s, r, FFTW_ESTIMATE);
  p.r2c = fftw_plan_dft_r2c_2d(N, N, r, s, FFTW_ESTIMATE);
  p.fwd = fftw_plan_dft_2d(N, N, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_2d(N, N, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(s);
  fftw_free(a);
  fftw_free(b);
  return cache.emplace(N, p).first->second;
}

struct Buffers {
  std::map<int, Workspace> ws;
  ~Buffers() {
    for (auto& [n, w] : ws) {
      fftw_free(w.real);
      fftw_free(w.spec);
    }
  }
};

}  // namespace

Workspace& workspace(int N) {
  thread_local Buffers bufs;
  auto it = bufs.ws.find(N);
  if (it != bufs.ws.end()) return it->second;
  Workspace w;
  w.N = N;
  w.real = fftw_alloc_real(std::size_t(N) * N);
  w.spec = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(std::size_t(N) * (N / 2 + 1)));
  return bufs.ws.emplace(N, w).first->second;
}

void c2r(int N, std::complex<double>* spec, double* out) {
  fftw_execute_dft_c2r(plans(N).c2r, reinterpret_cast<fftw_complex*>(spec), out);
}

void r2c(int N, double* in, std::complex<double>* spec) {
  fftw_execute_dft_r2c(plans(N).r2c, in, reinterpret_cast<fftw_complex*>(spec));
}

void c2c(int N, std::complex<double>* in, std::complex<double>* out, int sign) {
  const auto& p = plans(N);
  fftw_execute_dft(sign < 0 ? p.fwd : p.bwd, reinterpret_cast<fftw_complex*>(in),
                   reinterpret_cast<fftw_complex*>(out));
}

ComplexBuffer::ComplexBuffer(std::size_t n)
    : p_(reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n))), n_(n) {
  std::fill(p_, p_ + n, std::complex<double>{});
}

ComplexBuffer::~ComplexBuffer() { fftw_free(p_); }

}  // namespace sqe::fft
