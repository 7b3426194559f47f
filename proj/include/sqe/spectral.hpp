#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sqe {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

struct Mode {
  int m1 = 0;
  int m2 = 0;
  bool operator==(const Mode&) const = default;
};

inline double norm2(Mode m) { return double(m.m1) * m.m1 + double(m.m2) * m.m2; }

// I_m = 1 + 4 pi^2 |m|^2, the symbol of 1 - Laplacian in the e_m basis.
inline double eigenvalue(Mode m) { return 1.0 + 4.0 * kPi * kPi * norm2(m); }

// Lattice points with |m| < cutoff, lexicographic in (m1, m2).
class ModeSet {
 public:
  explicit ModeSet(double cutoff);

  double cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  const Mode& operator[](std::size_t i) const { return modes_[i]; }
  const std::vector<Mode>& modes() const { return modes_; }
  const std::vector<double>& eigenvalues() const { return eig_; }

  std::optional<std::size_t> index_of(Mode m) const;
  bool contains(Mode m) const { return index_of(m).has_value(); }
  std::size_t neg_index(std::size_t i) const { return neg_[i]; }
  std::size_t zero_index() const { return zero_; }
  // Largest |m1| or |m2| present.
  int max_component() const { return R_; }
  // One of each {m, -m} pair: m1 > 0, or m1 == 0 and m2 > 0. The origin is not included.
  bool is_representative(std::size_t i) const;
  const std::vector<std::size_t>& representatives() const { return reps_; }

  bool same_as(const ModeSet& o) const;

 private:
  double cutoff_;
  int R_ = 0;
  std::vector<Mode> modes_;
  std::vector<double> eig_;
  std::vector<int> lut_;
  std::vector<std::size_t> neg_;
  std::vector<std::size_t> reps_;
  std::size_t zero_ = 0;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

// Cached: equal cutoffs give the same pointer.
ModeSetPtr make_mode_set(double cutoff);

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(ModeSetPtr ms);
  SpectralField(ModeSetPtr ms, std::vector<cplx> c);

  static SpectralField constant(ModeSetPtr ms, double c);
  // amp * e_m; not real unless paired with its conjugate.
  static SpectralField basis(ModeSetPtr ms, Mode m, cplx amp = 1.0);
  // e_m + e_{-m} = 2 cos(2 pi m.z)
  static SpectralField cosine(ModeSetPtr ms, Mode m, double amp = 1.0);

  const ModeSet& modes() const { return *ms_; }
  const ModeSetPtr& mode_set() const { return ms_; }
  bool empty() const { return !ms_; }
  std::size_t size() const { return c_.size(); }

  cplx& operator[](std::size_t i) { return c_[i]; }
  const cplx& operator[](std::size_t i) const { return c_[i]; }
  cplx at(Mode m) const;
  std::vector<cplx>& coeffs() { return c_; }
  const std::vector<cplx>& coeffs() const { return c_; }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  // this += s * o
  SpectralField& axpy(double s, const SpectralField& o);

  double max_abs() const;
  double hermitian_defect() const;
  void symmetrize();
  void set_zero();

  // Restrict or zero-extend onto another mode set.
  SpectralField project(const ModeSetPtr& target) const;

  // <f, g>_{L^2} = sum f(m) conj(g(m)), real part (fields are real).
  double inner(const SpectralField& g) const;
  double l2_norm() const { return std::sqrt(inner(*this)); }

 private:
  ModeSetPtr ms_;
  std::vector<cplx> c_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);
double max_abs_diff(const SpectralField& a, const SpectralField& b);

// Time-indexed fields plus, when they come from keyed noise, where the keys start.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  std::size_t size() const { return times.size(); }
};

// --- real-space grids -------------------------------------------------------

// Smallest power of two strictly greater than `needed` (at least 4).
int grid_above(int needed);
// Grid that resolves a k-fold product of fields with max component r,
// projected back onto max component r_out, without aliasing.
int product_grid(int sum_components, int out_component);

std::vector<double> to_grid(const SpectralField& f, int N);
void to_grid(const SpectralField& f, int N, std::vector<double>& out);
SpectralField from_grid(std::span<const double> g, int N, const ModeSetPtr& out);
void from_grid(std::span<const double> g, int N, SpectralField& out);

// --- semigroup ---------------------------------------------------------------

// S(t) = e^{t(Delta - 1)}: per-mode factor e^{-I_m t}.
SpectralField heat_semigroup(const SpectralField& f, double t);
std::vector<double> heat_factors(const ModeSet& ms, double t);
// phi1(dt) = (1 - e^{-I dt}) / I
std::vector<double> phi1_factors(const ModeSet& ms, double dt);
// e^{t Delta} without the mass term.
SpectralField pure_heat(const SpectralField& f, double t);

// --- products ------------------------------------------------------------------

// Exact product of k fields on one mode set, projected back onto it.
SpectralField dealiased_product(const std::vector<SpectralField>& fields, double pad_factor);
// Exact product of arbitrary fields projected onto `out` (grid chosen automatically).
SpectralField multiply(const std::vector<const SpectralField*>& fields, const ModeSetPtr& out);
SpectralField multiply(const SpectralField& a, const SpectralField& b, const ModeSetPtr& out);
// Full product band: cutoff is the sum of the factor cutoffs.
SpectralField multiply_full(const SpectralField& a, const SpectralField& b);

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sqe
