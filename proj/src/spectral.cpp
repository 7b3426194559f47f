#include "sqe/spectral.hpp"
#include "sqe/fft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace sqe {

ModeSet::ModeSet(double cutoff) : cutoff_(cutoff) {
  if (!(cutoff >= 1.0)) throw SpectralError("mode set cutoff must be >= 1");
  const double c2 = cutoff * cutoff;
  int R = static_cast<int>(std::ceil(cutoff));
  for (int a = -R; a <= R; ++a)
    for (int b = -R; b <= R; ++b)
      if (double(a) * a + double(b) * b < c2) {
        modes_.push_back({a, b});
        R_ = std::max({R_, std::abs(a), std::abs(b)});
      }
  const int W = 2 * R_ + 1;
  lut_.assign(std::size_t(W) * W, -1);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& m = modes_[i];
    lut_[std::size_t(m.m1 + R_) * W + (m.m2 + R_)] = int(i);
    eig_.push_back(eigenvalue(m));
    if (m.m1 == 0 && m.m2 == 0) zero_ = i;
  }
  neg_.resize(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    neg_[i] = *index_of({-modes_[i].m1, -modes_[i].m2});
    if (is_representative(i)) reps_.push_back(i);
  }
}

std::optional<std::size_t> ModeSet::index_of(Mode m) const {
  if (std::abs(m.m1) > R_ || std::abs(m.m2) > R_) return std::nullopt;
  const int W = 2 * R_ + 1;
  int k = lut_[std::size_t(m.m1 + R_) * W + (m.m2 + R_)];
  if (k < 0) return std::nullopt;
  return std::size_t(k);
}

bool ModeSet::is_representative(std::size_t i) const {
  const auto& m = modes_[i];
  return m.m1 > 0 || (m.m1 == 0 && m.m2 > 0);
}

bool ModeSet::same_as(const ModeSet& o) const {
  return this == &o || (modes_.size() == o.modes_.size() && R_ == o.R_);
}

ModeSetPtr make_mode_set(double cutoff) {
  static std::mutex mu;
  static std::map<double, std::weak_ptr<const ModeSet>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[cutoff];
  if (auto p = slot.lock()) return p;
  auto p = std::make_shared<const ModeSet>(cutoff);
  slot = p;
  return p;
}

// --- SpectralField ------------------------------------------------------------

SpectralField::SpectralField(ModeSetPtr ms) : ms_(std::move(ms)), c_(ms_->size(), cplx{}) {}

SpectralField::SpectralField(ModeSetPtr ms, std::vector<cplx> c) : ms_(std::move(ms)), c_(std::move(c)) {
  if (c_.size() != ms_->size()) throw SpectralError("coefficient count does not match mode set");
}

SpectralField SpectralField::constant(ModeSetPtr ms, double c) {
  SpectralField f(std::move(ms));
  f.c_[f.ms_->zero_index()] = c;
  return f;
}

SpectralField SpectralField::basis(ModeSetPtr ms, Mode m, cplx amp) {
  SpectralField f(std::move(ms));
  auto i = f.ms_->index_of(m);
  if (!i) throw SpectralError("mode outside the mode set");
  f.c_[*i] = amp;
  return f;
}

SpectralField SpectralField::cosine(ModeSetPtr ms, Mode m, double amp) {
  SpectralField f(std::move(ms));
  auto i = f.ms_->index_of(m);
  if (!i) throw SpectralError("mode outside the mode set");
  f.c_[*i] += amp;
  f.c_[f.ms_->neg_index(*i)] += amp;
  return f;
}

cplx SpectralField::at(Mode m) const {
  auto i = ms_->index_of(m);
  return i ? c_[*i] : cplx{};
}

static void check_same(const SpectralField& a, const SpectralField& b) {
  if (!a.modes().same_as(b.modes())) throw SpectralError("mismatched mode sets");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}
SpectralField& SpectralField::operator*=(double s) {
  for (auto& z : c_) z *= s;
  return *this;
}
SpectralField& SpectralField::axpy(double s, const SpectralField& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
  return *this;
}

double SpectralField::max_abs() const {
  double m = 0;
  for (auto& z : c_) m = std::max(m, std::abs(z));
  return m;
}

double SpectralField::hermitian_defect() const {
  double d = 0;
  for (std::size_t i = 0; i < c_.size(); ++i) d = std::max(d, std::abs(c_[i] - std::conj(c_[ms_->neg_index(i)])));
  return d;
}

void SpectralField::symmetrize() {
  for (std::size_t i = 0; i < c_.size(); ++i) {
    std::size_t j = ms_->neg_index(i);
    if (j < i) continue;
    cplx a = 0.5 * (c_[i] + std::conj(c_[j]));
    c_[i] = a;
    c_[j] = std::conj(a);
  }
}

void SpectralField::set_zero() { std::fill(c_.begin(), c_.end(), cplx{}); }

SpectralField SpectralField::project(const ModeSetPtr& target) const {
  if (target.get() == ms_.get()) return *this;
  SpectralField out(target);
  const auto& tm = target->modes();
  for (std::size_t i = 0; i < tm.size(); ++i) out.c_[i] = at(tm[i]);
  return out;
}

double SpectralField::inner(const SpectralField& g) const {
  double s = 0;
  if (ms_->same_as(g.modes())) {
    for (std::size_t i = 0; i < c_.size(); ++i) s += (c_[i] * std::conj(g.c_[i])).real();
  } else {
    for (std::size_t i = 0; i < c_.size(); ++i) s += (c_[i] * std::conj(g.at((*ms_)[i]))).real();
  }
  return s;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  if (a.modes().same_as(b.modes())) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  }
  // compare on the union: anything outside one set counts as zero there
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b.at(a.modes()[i])));
  for (std::size_t i = 0; i < b.size(); ++i)
    if (!a.modes().contains(b.modes()[i])) d = std::max(d, std::abs(b[i]));
  return d;
}

// --- grids --------------------------------------------------------------------

int grid_above(int needed) {
  int N = 4;
  while (N <= needed) N *= 2;
  return N;
}

// the output band itself must also fit: a band of cutoff c can reach past the factors' components
int product_grid(int sum_components, int out_component) {
  return grid_above(std::max(sum_components + out_component, 2 * out_component));
}

void to_grid(const SpectralField& f, int N, std::vector<double>& out) {
  const auto& ms = f.modes();
  if (2 * ms.max_component() >= N) throw SpectralError("grid too small for field band");
  auto& buf = fft::workspace(N);
  const int H = N / 2 + 1;
  std::fill(buf.spec, buf.spec + std::size_t(N) * H, cplx{});
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Mode& m = ms[i];
    if (m.m2 < 0) continue;
    int r = m.m1 < 0 ? m.m1 + N : m.m1;
    buf.spec[std::size_t(r) * H + m.m2] = f[i];
  }
  out.resize(std::size_t(N) * N);
  // go through the aligned scratch array; user vectors may not match plan alignment
  fft::c2r(N, buf.spec, buf.real);
  std::copy(buf.real, buf.real + out.size(), out.begin());
}

std::vector<double> to_grid(const SpectralField& f, int N) {
  std::vector<double> g;
  to_grid(f, N, g);
  return g;
}

void from_grid(std::span<const double> g, int N, SpectralField& out) {
  const auto& ms = out.modes();
  if (2 * ms.max_component() >= N) throw SpectralError("grid too small for output band");
  if (g.size() != std::size_t(N) * N) throw SpectralError("grid length mismatch");
  auto& buf = fft::workspace(N);
  std::copy(g.begin(), g.end(), buf.real);
  fft::r2c(N, buf.real, buf.spec);
  const int H = N / 2 + 1;
  const double inv = 1.0 / (double(N) * N);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Mode& m = ms[i];
    if (m.m2 >= 0) {
      int r = m.m1 < 0 ? m.m1 + N : m.m1;
      out[i] = buf.spec[std::size_t(r) * H + m.m2] * inv;
    } else {
      int r = -m.m1 < 0 ? -m.m1 + N : -m.m1;
      out[i] = std::conj(buf.spec[std::size_t(r) * H + (-m.m2)]) * inv;
    }
  }
}

SpectralField from_grid(std::span<const double> g, int N, const ModeSetPtr& out) {
  SpectralField f(out);
  from_grid(g, N, f);
  return f;
}

// --- semigroup ------------------------------------------------------------------

std::vector<double> heat_factors(const ModeSet& ms, double t) {
  if (t < 0) throw SpectralError("negative time in heat semigroup");
  std::vector<double> f(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) f[i] = std::exp(-ms.eigenvalues()[i] * t);
  return f;
}

std::vector<double> phi1_factors(const ModeSet& ms, double dt) {
  std::vector<double> f(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    double I = ms.eigenvalues()[i];
    f[i] = -std::expm1(-I * dt) / I;
  }
  return f;
}

SpectralField heat_semigroup(const SpectralField& f, double t) {
  auto k = heat_factors(f.modes(), t);
  SpectralField g = f;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= k[i];
  return g;
}

SpectralField pure_heat(const SpectralField& f, double t) {
  if (t < 0) throw SpectralError("negative time in heat semigroup");
  SpectralField g = f;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= std::exp(-(f.modes().eigenvalues()[i] - 1.0) * t);
  return g;
}

// --- products -------------------------------------------------------------------

SpectralField multiply(const std::vector<const SpectralField*>& fields, const ModeSetPtr& out) {
  if (fields.empty()) return SpectralField::constant(out, 1.0);
  int sum = 0;
  for (auto* f : fields) sum += f->modes().max_component();
  const int N = product_grid(sum, out->max_component());
  std::vector<double> acc, tmp;
  to_grid(*fields[0], N, acc);
  for (std::size_t k = 1; k < fields.size(); ++k) {
    to_grid(*fields[k], N, tmp);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] *= tmp[j];
  }
  return from_grid(acc, N, out);
}

SpectralField multiply(const SpectralField& a, const SpectralField& b, const ModeSetPtr& out) {
  return multiply({&a, &b}, out);
}

SpectralField multiply_full(const SpectralField& a, const SpectralField& b) {
  return multiply(a, b, make_mode_set(a.modes().cutoff() + b.modes().cutoff()));
}

SpectralField dealiased_product(const std::vector<SpectralField>& fields, double pad_factor) {
  if (fields.empty()) throw SpectralError("empty product");
  const auto& ms = fields[0].mode_set();
  for (auto& f : fields)
    if (!f.modes().same_as(*ms)) throw SpectralError("mismatched mode sets in product");
  const double k = double(fields.size());
  if (pad_factor < (k + 1.0) / 2.0) throw SpectralError("pad factor too small for a product of this order");
  // smallest power of two >= 2 * pad * cutoff
  int N = 4;
  while (N < 2.0 * pad_factor * ms->cutoff()) N *= 2;
  std::vector<double> acc, tmp;
  to_grid(fields[0], N, acc);
  for (std::size_t i = 1; i < fields.size(); ++i) {
    to_grid(fields[i], N, tmp);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] *= tmp[j];
  }
  return from_grid(acc, N, ms);
}

}  // namespace sqe
