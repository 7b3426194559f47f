#include "sqe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqe {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

static double unit_open(std::uint64_t h) { return (double(h >> 11) + 0.5) * 0x1.0p-53; }

double NoiseStream::gaussian(std::int64_t step, Mode m, int component) const {
  if (scale == 0.0) return 0.0;
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ replica);
  h = splitmix64(h ^ std::uint64_t(step));
  h = splitmix64(h ^ ((std::uint64_t(std::uint32_t(m.m1)) << 32) | std::uint32_t(m.m2)));
  h = splitmix64(h ^ std::uint64_t(component));
  const double u1 = unit_open(h);
  const double u2 = unit_open(splitmix64(h ^ 0xD1B54A32D192ED03ULL));
  return scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double renorm_constant(const ModeSet& ms) {
  if (ms.size() == 0) throw SpectralError("empty mode set");
  double s = 0;
  for (double I : ms.eigenvalues()) s += 0.5 / I;
  return s;
}

void standard_noise(const NoiseStream& ns, std::int64_t step, SpectralField& out) {
  const auto& ms = out.modes();
  const double r = 1.0 / std::sqrt(2.0);
  out[ms.zero_index()] = ns.gaussian(step, ms[ms.zero_index()], 0);
  for (std::size_t i : ms.representatives()) {
    cplx g(ns.gaussian(step, ms[i], 0), ns.gaussian(step, ms[i], 1));
    out[i] = r * g;
    out[ms.neg_index(i)] = std::conj(out[i]);
  }
}

std::vector<double> ou_increment_variance(const ModeSet& ms, double dt) {
  std::vector<double> v(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double I = ms.eigenvalues()[i];
    v[i] = -std::expm1(-2.0 * I * dt) / (2.0 * I);
  }
  return v;
}

SpectralField ou_increment(const ModeSetPtr& ms, double dt, const NoiseStream& ns, std::int64_t step) {
  if (!(dt > 0)) throw SpectralError("ou step needs dt > 0");
  SpectralField eta(ms);
  standard_noise(ns, step, eta);
  auto var = ou_increment_variance(*ms, dt);
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] *= std::sqrt(var[i]);
  return eta;
}

OUState sample_stationary_ou(const ModeSetPtr& ms, const NoiseStream& ns, double time) {
  OUState st;
  st.field = SpectralField(ms);
  standard_noise(ns, kStationaryStep, st.field);
  for (std::size_t i = 0; i < ms->size(); ++i) st.field[i] *= std::sqrt(0.5 / ms->eigenvalues()[i]);
  st.start = OUStart::stationary;
  st.start_time = -HUGE_VAL;
  st.time = time;
  return st;
}

OUState zero_ou(const ModeSetPtr& ms, double start_time) {
  OUState st;
  st.field = SpectralField(ms);
  st.start = OUStart::zero_at;
  st.start_time = start_time;
  st.time = start_time;
  return st;
}

void ou_step(OUState& st, double dt, const NoiseStream& ns, std::int64_t step) {
  auto eta = ou_increment(st.field.mode_set(), dt, ns, step);
  const auto& ev = st.field.modes().eigenvalues();
  for (std::size_t i = 0; i < eta.size(); ++i) st.field[i] = std::exp(-ev[i] * dt) * st.field[i] + eta[i];
  st.time += dt;
}

Trajectory ou_path(OUState st, const std::vector<double>& times, const NoiseStream& ns, std::int64_t first_step) {
  Trajectory tr;
  if (times.empty()) return tr;
  st.time = times[0];
  tr.times = times;
  tr.fields.reserve(times.size());
  tr.fields.push_back(st.field);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    ou_step(st, times[k + 1] - times[k], ns, first_step + std::int64_t(k));
    st.time = times[k + 1];
    tr.fields.push_back(st.field);
  }
  return tr;
}

// --- Hermite ------------------------------------------------------------------------

void hermite_all(int n, double X, double C, double* out) {
  out[0] = 1.0;
  if (n >= 1) out[1] = X;
  for (int k = 2; k <= n; ++k) out[k] = X * out[k - 1] - double(k - 1) * C * out[k - 2];
}

double hermite(int k, double X, double C) {
  if (k < 0) throw std::invalid_argument("hermite order must be >= 0");
  double h0 = 1.0, h1 = X;
  if (k == 0) return h0;
  for (int j = 2; j <= k; ++j) {
    double h2 = X * h1 - double(j - 1) * C * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

SpectralField hermite(int k, const SpectralField& X, double C) {
  if (k < 0) throw std::invalid_argument("hermite order must be >= 0");
  const auto& ms = X.mode_set();
  const int R = ms->max_component();
  const int N = product_grid(std::max(k, 1) * R, R);
  auto g = to_grid(X, N);
  for (double& x : g) x = hermite(k, x, C);
  return from_grid(g, N, ms);
}

std::vector<SpectralField> hermite_full(int n, const SpectralField& X, double C) {
  if (n < 1) throw std::invalid_argument("hermite_full needs n >= 1");
  const double c = X.modes().cutoff();
  std::vector<ModeSetPtr> bands(n);
  for (int k = 1; k <= n; ++k) bands[k - 1] = make_mode_set(k * c);
  const int N = product_grid(n * X.modes().max_component(), bands[n - 1]->max_component());
  auto g = to_grid(X, N);
  std::vector<std::vector<double>> H(n + 1, std::vector<double>(g.size()));
  std::vector<double> h(n + 1);
  for (std::size_t j = 0; j < g.size(); ++j) {
    hermite_all(n, g[j], C, h.data());
    for (int k = 1; k <= n; ++k) H[k][j] = h[k];
  }
  std::vector<SpectralField> out;
  out.reserve(n);
  out.push_back(X);
  for (int k = 2; k <= n; ++k) out.push_back(from_grid(H[k], N, bands[k - 1]));
  return out;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1;
  for (int i = 1; i <= k; ++i) b = b * double(n - k + i) / double(i);
  return std::round(b);
}

std::vector<SpectralField> translate_diagrams(const std::vector<SpectralField>& d, const SpectralField& w) {
  const int n = int(d.size());
  if (n == 0) return {};
  // band of T_w<k>: max_j (j cw + c_{k-j}); grid wide enough for every term
  const double cw = w.modes().cutoff();
  const int Rw = w.modes().max_component();
  std::vector<ModeSetPtr> bands(n);
  int need = 0;
  for (int k = 1; k <= n; ++k) {
    double c = 0;
    int R = 0;
    for (int j = 0; j <= k; ++j) {
      double ck = j * cw + (k - j > 0 ? d[k - j - 1].modes().cutoff() : 0.0);
      int Rk = j * Rw + (k - j > 0 ? d[k - j - 1].modes().max_component() : 0);
      c = std::max(c, ck);
      R = std::max(R, Rk);
    }
    bands[k - 1] = make_mode_set(c);
    need = std::max({need, R + bands[k - 1]->max_component(), 2 * bands[k - 1]->max_component()});
  }
  const int N = grid_above(need);
  const std::size_t G = std::size_t(N) * N;
  std::vector<std::vector<double>> dg(n + 1);
  dg[0].assign(G, 1.0);
  for (int k = 1; k <= n; ++k) dg[k] = to_grid(d[k - 1], N);
  auto wg = to_grid(w, N);
  std::vector<SpectralField> out;
  out.reserve(n);
  std::vector<double> acc(G);
  for (int k = 1; k <= n; ++k) {
    for (std::size_t p = 0; p < G; ++p) {
      double s = 0, wj = 1;
      for (int j = 0; j <= k; ++j) {
        s += binomial(k, j) * wj * dg[k - j][p];
        wj *= wg[p];
      }
      acc[p] = s;
    }
    out.push_back(from_grid(acc, N, bands[k - 1]));
  }
  return out;
}

// --- diagram sets ------------------------------------------------------------------

std::vector<SpectralField> DiagramSet::at(std::size_t i) const {
  std::vector<SpectralField> out;
  out.reserve(diagrams.size());
  for (auto& tr : diagrams) out.push_back(tr.fields.at(i));
  return out;
}

std::size_t DiagramSet::index_of_time(double t) const {
  const auto& ts = times();
  auto it = std::lower_bound(ts.begin(), ts.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
  if (it == ts.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t)))
    throw SpectralError("diagrams requested off the stored grid");
  return std::size_t(it - ts.begin());
}

DiagramSet wick_trajectory(const Trajectory& ou, int n, double renorm, DiagramOrigin origin, double origin_time) {
  if (n < 1 || n % 2 == 0) throw std::invalid_argument("diagram order n must be odd and >= 1");
  DiagramSet d;
  d.n = n;
  d.renorm = renorm;
  d.origin = origin;
  d.origin_time = origin_time;
  d.diagrams.resize(n);
  for (auto& tr : d.diagrams) {
    tr.times = ou.times;
    tr.fields.reserve(ou.size());
  }
  for (std::size_t i = 0; i < ou.size(); ++i) {
    auto H = hermite_full(n, ou.fields[i], renorm);
    for (int k = 0; k < n; ++k) d.diagrams[k].fields.push_back(std::move(H[k]));
  }
  return d;
}

std::vector<SpectralField> shifted_wick(const SpectralField& stationary_at_s,
                                        const std::vector<SpectralField>& diagrams_at_t, double lag) {
  if (!(lag > 0)) throw std::invalid_argument("shifted_wick needs a positive lag");
  SpectralField w = heat_semigroup(stationary_at_s, lag);
  w *= -1.0;
  return translate_diagrams(diagrams_at_t, w);
}

// --- Z -------------------------------------------------------------------------------

void check_coefficients(const std::vector<double>& a) {
  if (a.size() < 2) throw std::invalid_argument("need coefficients a_0..a_n with n >= 1");
  const int n = int(a.size()) - 1;
  if (n % 2 == 0) throw std::invalid_argument("n must be odd (got n=" + std::to_string(n) + ")");
  if (!(a.back() > 0)) throw std::invalid_argument("leading coefficient a_n must be > 0");
}

std::vector<SpectralField> assemble_Z_at(const std::vector<SpectralField>& d, const std::vector<double>& a) {
  check_coefficients(a);
  const int n = int(a.size()) - 1;
  if (int(d.size()) < n) throw std::invalid_argument("assemble_Z needs diagrams up to order n");
  std::vector<SpectralField> Z;
  Z.reserve(n);
  for (int j = 0; j < n; ++j) {
    double c = 0;
    for (int i = 1; i <= n - j; ++i) c = std::max(c, d[i - 1].modes().cutoff());
    auto band = make_mode_set(c);
    SpectralField z(band);
    z[band->zero_index()] += a[j];  // k = j term, <0> = 1
    for (int k = j + 1; k <= n; ++k) {
      if (a[k] == 0.0) continue;
      z.axpy(a[k] * binomial(k, j), d[k - j - 1].project(band));
    }
    Z.push_back(std::move(z));
  }
  return Z;
}

std::vector<SpectralField> ZVector::at(std::size_t i) const {
  std::vector<SpectralField> out;
  out.reserve(Z.size());
  for (auto& tr : Z) out.push_back(tr.fields.at(i));
  return out;
}

ZVector assemble_Z(const DiagramSet& d, const std::vector<double>& a) {
  check_coefficients(a);
  ZVector z;
  z.n = int(a.size()) - 1;
  z.a_n = a.back();
  z.Z.resize(z.n);
  for (auto& tr : z.Z) tr.times = d.times();
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto Zi = assemble_Z_at(d.at(i), a);
    for (int j = 0; j < z.n; ++j) z.Z[j].fields.push_back(std::move(Zi[j]));
  }
  return z;
}

// --- covariance oracle -----------------------------------------------------------------

SpectralField analytic_wick_covariance(int n, double t1, double t2, const ModeSetPtr& ms) {
  if (n < 1) throw std::invalid_argument("covariance order must be >= 1");
  const double lag = std::abs(t1 - t2);
  SpectralField rho(ms);
  for (std::size_t i = 0; i < ms->size(); ++i) {
    const double I = ms->eigenvalues()[i];
    rho[i] = std::exp(-I * lag) / (2.0 * I);
  }
  auto band = make_mode_set(n * ms->cutoff());
  const int N = product_grid(n * ms->max_component(), band->max_component());
  auto g = to_grid(rho, N);
  double fact = 1;
  for (int k = 2; k <= n; ++k) fact *= k;
  for (double& x : g) x = fact * std::pow(x, n);
  return from_grid(g, N, band);
}

double pair_covariance(const SpectralField& spectrum, const SpectralField& phi) {
  double s = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += spectrum.at(phi.modes()[i]).real() * std::norm(phi[i]);
  return s;
}

std::string diagrams_csv(const DiagramSet& d) {
  std::ostringstream os;
  os.precision(17);
  os << "time,k,m1,m2,re,im\n";
  for (std::size_t i = 0; i < d.size(); ++i)
    for (int k = 1; k <= d.n; ++k) {
      const auto& f = d.diagrams[k - 1].fields[i];
      for (std::size_t j = 0; j < f.size(); ++j)
        os << d.times()[i] << ',' << k << ',' << f.modes()[j].m1 << ',' << f.modes()[j].m2 << ',' << f[j].real()
           << ',' << f[j].imag() << '\n';
    }
  return os.str();
}

}  // namespace sqe
