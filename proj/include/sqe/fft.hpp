#pragma once

// Thin wrapper over FFTW for square real grids. Plans are shared and built
// once per size; scratch buffers are per thread.

#include <complex>
#include <cstddef>

namespace sqe::fft {

struct Workspace {
  int N = 0;
  double* real = nullptr;
  std::complex<double>* spec = nullptr;  // N x (N/2+1)
};

Workspace& workspace(int N);

// Unnormalised: c2r sums spec(m) e^{+2 pi i m.j/N}; r2c uses e^{-...}.
// c2r overwrites `spec`.
void c2r(int N, std::complex<double>* spec, double* out);
void r2c(int N, double* in, std::complex<double>* spec);

// Full complex 2D transforms on an N x N array (sign -1 forward, +1 backward).
// Arrays must come from ComplexBuffer so their alignment matches the plan.
void c2c(int N, std::complex<double>* in, std::complex<double>* out, int sign);

class ComplexBuffer {
 public:
  explicit ComplexBuffer(std::size_t n);
  ~ComplexBuffer();
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  std::complex<double>* data() { return p_; }
  std::complex<double>& operator[](std::size_t i) { return p_[i]; }
  std::size_t size() const { return n_; }

 private:
  std::complex<double>* p_;
  std::size_t n_;
};

}  // namespace sqe::fft
