#include "sqe/remainder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqe {

void check_config(const SolverConfig& c) {
  if (c.n < 1 || c.n % 2 == 0) throw ConfigError("n must be odd and >= 1 (got " + std::to_string(c.n) + ")");
  if (int(c.a.size()) != c.n + 1)
    throw ConfigError("coefficient list must have n+1 = " + std::to_string(c.n + 1) + " entries");
  if (!(c.a.back() > 0)) throw ConfigError("leading coefficient a_n must be > 0");
  if (!(c.cutoff >= 1)) throw ConfigError("cutoff must be >= 1");
  if (!(c.dt > 0)) throw ConfigError("dt must be > 0");
  if (!(c.horizon > 0)) throw ConfigError("horizon must be > 0");
  const auto& r = c.reg;
  if (!((r.beta + r.alpha0) / 2 < r.gamma)) throw ConfigError("beta_gamma_cond violated: (β+α₀)/2 ≥ γ");
  if (!(r.beta / 2 + c.n * r.gamma < 1)) throw ConfigError("beta_gamma_cond violated: β/2 + nγ ≥ 1");
  if (!(r.alpha < r.alpha0)) throw ConfigError("regularity pack violated: α ≥ α₀");
  if (!(r.alpha_prime < r.gamma)) throw ConfigError("regularity pack violated: α′ ≥ γ");
  if (!(r.alpha > 0 && r.alpha_prime > 0 && r.beta > 0 && r.gamma > 0 && r.alpha0 > 0))
    throw ConfigError("regularity exponents must be positive");
  if (c.graded && !(c.dt0 > 0 && c.grade > 0)) throw ConfigError("graded grid needs dt0 > 0 and grade > 0");
}

std::vector<double> make_time_grid(double T, double dt, bool graded, double dt0, double grade) {
  if (!(T > 0) || !(dt > 0)) throw std::invalid_argument("time grid needs T > 0 and dt > 0");
  std::vector<double> t{0.0};
  if (!graded) {
    const auto K = std::size_t(std::llround(T / dt));
    if (std::abs(double(K) * dt - T) > 1e-9 * T) throw std::invalid_argument("horizon must be a multiple of dt");
    for (std::size_t k = 1; k <= K; ++k) t.push_back(double(k) * dt);
    t.back() = T;
    return t;
  }
  // geometric phase dt_k = grade * t_k until that reaches dt, then the multiples of dt,
  // so observation times k*dt stay on the grid
  double cur = std::min(dt0, T);
  t.push_back(cur);
  while (cur < T && grade * cur < dt) {
    cur = std::min(cur + grade * cur, T);
    t.push_back(cur);
  }
  if (cur >= T) return t;
  auto k = std::int64_t(std::ceil(cur / dt - 1e-9));
  if (double(k) * dt - cur < 0.5 * dt) ++k;
  const auto K = std::int64_t(std::llround(T / dt));
  for (; k < K; ++k) t.push_back(double(k) * dt);
  t.push_back(T);
  return t;
}

std::vector<double> make_time_grid(const SolverConfig& c) {
  return make_time_grid(c.horizon, c.dt, c.graded, c.dt0, c.grade);
}

// --- nonlinearity -------------------------------------------------------------------

SpectralField nonlinearity_F(const SpectralField& v, const std::vector<SpectralField>& Z, double a_n) {
  const int n = int(Z.size());
  const int Rv = v.modes().max_component();
  // only |m| < (j+1) cutoff(v) of Z[j] can reach v's modes through v^j Z[j]
  std::vector<SpectralField> Zp(n);
  int need = n * Rv, widest = Rv;
  for (int j = 0; j < n; ++j) {
    const double c = (j + 1) * v.modes().cutoff();
    Zp[j] = Z[j].modes().cutoff() > c ? Z[j].project(make_mode_set(c)) : Z[j];
    need = std::max(need, j * Rv + Zp[j].modes().max_component());
    widest = std::max(widest, Zp[j].modes().max_component());
  }
  const int N = grid_above(std::max(need + Rv, 2 * widest));
  auto vg = to_grid(v, N);
  std::vector<std::vector<double>> zg(n);
  for (int j = 0; j < n; ++j) zg[j] = to_grid(Zp[j], N);
  std::vector<double> acc(vg.size());
  for (std::size_t p = 0; p < vg.size(); ++p) {
    double s = a_n;
    for (int j = n - 1; j >= 0; --j) s = s * vg[p] + zg[j][p];
    acc[p] = s;
  }
  return from_grid(acc, N, v.mode_set());
}

void hermite_F(const SpectralField& v, const SpectralField& X1, double R, const std::vector<double>& a,
               SpectralField& out) {
  const int n = int(a.size()) - 1;
  const int Ru = std::max(v.modes().max_component(), X1.modes().max_component());
  const int N = grid_above(std::max(n * Ru + out.modes().max_component(), 2 * Ru));
  thread_local std::vector<double> ug, xg;
  to_grid(v, N, ug);
  to_grid(X1, N, xg);
  std::vector<double> h(n + 1);
  for (std::size_t p = 0; p < ug.size(); ++p) {
    hermite_all(n, ug[p] + xg[p], R, h.data());
    double s = 0;
    for (int k = 0; k <= n; ++k) s += a[k] * h[k];
    ug[p] = s;
  }
  from_grid(ug, N, out);
}

SpectralField hermite_F(const SpectralField& v, const SpectralField& X1, double R, const std::vector<double>& a) {
  SpectralField out(v.mode_set());
  hermite_F(v, X1, R, a, out);
  return out;
}

namespace {

// pointwise F~' on grid N; d[k-1] grids are <k>
std::vector<double> F_prime_grid(const SpectralField& v, const std::vector<SpectralField>& d,
                                 const std::vector<double>& a, int N) {
  const int n = int(a.size()) - 1;
  auto vg = to_grid(v, N);
  std::vector<std::vector<double>> dg(n);
  dg[0].assign(vg.size(), 1.0);
  for (int k = 1; k < n; ++k) dg[k] = to_grid(d.at(k - 1), N);
  std::vector<double> out(vg.size(), 0.0);
  for (std::size_t p = 0; p < vg.size(); ++p) {
    double s = 0;
    for (int k = 1; k <= n; ++k) {
      if (a[k] == 0.0) continue;
      double inner = 0, vj = 1;
      for (int j = 0; j <= k - 1; ++j) {
        inner += binomial(k - 1, j) * vj * dg[k - 1 - j][p];
        vj *= vg[p];
      }
      s += k * a[k] * inner;
    }
    out[p] = s;
  }
  return out;
}

// band (cutoff) and grid components of the terms v^j <k-1-j> in F~'
std::pair<double, int> F_prime_extent(const SpectralField& v, const std::vector<SpectralField>& d,
                                      const std::vector<double>& a) {
  const int n = int(a.size()) - 1;
  double c = 1;
  int R = v.modes().max_component();  // v is put on the grid even when F~' does not depend on it
  for (int k = 1; k <= n; ++k)
    for (int j = 0; j <= k - 1; ++j) {
      const int i = k - 1 - j;
      c = std::max(c, j * v.modes().cutoff() + (i > 0 ? d.at(i - 1).modes().cutoff() : 0.0));
      R = std::max(R, j * v.modes().max_component() + (i > 0 ? d.at(i - 1).modes().max_component() : 0));
    }
  return {c, R};
}

}  // namespace

SpectralField nonlinearity_F_prime(const SpectralField& v, const std::vector<SpectralField>& d,
                                   const std::vector<double>& a) {
  check_coefficients(a);
  auto [c, R] = F_prime_extent(v, d, a);
  auto band = make_mode_set(c);
  const int N = grid_above(std::max(product_grid(R, band->max_component()) - 1, 2 * R));
  return from_grid(F_prime_grid(v, d, a, N), N, band);
}

SpectralField apply_F_prime(const SpectralField& v, const std::vector<SpectralField>& d, const std::vector<double>& a,
                            const SpectralField& h) {
  const int Rh = h.modes().max_component();
  const int R = F_prime_extent(v, d, a).second;
  const int N = grid_above(std::max(R + 2 * Rh, 2 * R));
  auto g = F_prime_grid(v, d, a, N);
  auto hg = to_grid(h, N);
  for (std::size_t p = 0; p < g.size(); ++p) g[p] *= hg[p];
  return from_grid(g, N, h.mode_set());
}

Nonlinearity z_nonlinearity(const ZVector& Z) {
  return [&Z](std::size_t i, const SpectralField& v, SpectralField& out) {
    std::vector<SpectralField> at;
    at.reserve(Z.Z.size());
    for (auto& tr : Z.Z) at.push_back(tr.fields[i]);
    out = nonlinearity_F(v, at, Z.a_n);
  };
}

Nonlinearity hermite_nonlinearity(const Trajectory& X1, double R, std::vector<double> a) {
  return [&X1, R, a = std::move(a)](std::size_t i, const SpectralField& v, SpectralField& out) {
    hermite_F(v, X1.fields[i], R, a, out);
  };
}

SpectralField etd_step(const SpectralField& v, const SpectralField& F, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("etd_step needs dt > 0");
  auto S = heat_factors(v.modes(), dt);
  auto P = phi1_factors(v.modes(), dt);
  SpectralField out = v;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = S[i] * v[i] - P[i] * F[i];
  return out;
}

double holder_upper_bound(const SpectralField& v, double beta) {
  double s = 0;
  for (auto& c : v.coeffs()) s += std::abs(c);
  const int K = DyadicPartition::covering(v.modes().cutoff()).max_level();
  return std::pow(2.0, std::max(beta, 0.0) * K) * s;
}

SolveResult integrate_mild(const SpectralField& x, const std::vector<double>& times, const Nonlinearity& F,
                           const SolverConfig& cfg, const SolveOptions& opt) {
  if (times.empty()) throw std::invalid_argument("empty time grid");
  SolveResult res;
  SpectralField v = x, Fv(x.mode_set());
  const auto& ev = x.modes().eigenvalues();
  std::vector<double> S(x.size()), P(x.size());
  double last_dt = -1;
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  for (std::size_t i = 0;; ++i) {
    if (opt.observer) opt.observer(i, times[i], v);
    if (opt.store && (i % stride == 0 || i + 1 == times.size())) {
      res.v.times.push_back(times[i]);
      res.v.fields.push_back(v);
    }
    if (i + 1 == times.size()) break;
    const double dt = times[i + 1] - times[i];
    if (dt != last_dt) {
      for (std::size_t m = 0; m < ev.size(); ++m) {
        S[m] = std::exp(-ev[m] * dt);
        P[m] = -std::expm1(-ev[m] * dt) / ev[m];
      }
      last_dt = dt;
    }
    F(i, v, Fv);
    bool finite = true;
    for (std::size_t m = 0; m < v.size(); ++m) {
      v[m] = S[m] * v[m] - P[m] * Fv[m];
      finite = finite && std::isfinite(v[m].real()) && std::isfinite(v[m].imag());
    }
    std::string why;
    if (!finite)
      why = "non-finite coefficient";
    else if (holder_upper_bound(v, cfg.reg.beta) > cfg.explosion_threshold &&
             holder_norm(v, cfg.reg.beta) > cfg.explosion_threshold)
      why = "C^beta norm above threshold";
    if (!why.empty()) {
      res.exploded = true;
      res.explosion_time = times[i + 1];
      res.explosion_reason = why;
      res.final = v;
      res.final_time = times[i + 1];
      return res;
    }
  }
  res.final = v;
  res.final_time = times.back();
  return res;
}

SolveResult solve_remainder(const SpectralField& x, const ZVector& Z, const SolverConfig& cfg,
                            const SolveOptions& opt) {
  if (Z.Z.empty()) throw std::invalid_argument("solve_remainder needs a Z trajectory");
  return integrate_mild(x, Z.Z[0].times, z_nonlinearity(Z), cfg, opt);
}

double local_existence_time(double R, double C, double theta) {
  if (R < 0 || !(C > 0) || !(theta > 0)) throw std::invalid_argument("local_existence_time: need R >= 0, C, theta > 0");
  return std::pow(1.0 / (C * (R + 1.0)), 1.0 / theta);
}

// --- energy ledger ------------------------------------------------------------------

CsvTable EnergyLedger::csv(const std::string& name) const {
  CsvTable t{name, {"time", "lp_norm_p", "K", "L", "identity_residual"}, {}};
  for (auto& r : records) t.add({fmt(r.time), fmt(r.lp), fmt(r.K), fmt(r.L), fmt(r.identity_residual)});
  return t;
}

EnergyLedger energy_diagnostics(const Trajectory& v, const Nonlinearity& F, int n, int p) {
  if (p < 2 || p % 2) throw std::invalid_argument("energy_diagnostics needs an even p >= 2");
  EnergyLedger led;
  led.p = p;
  std::vector<double> pairing(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& f = v.fields[i];
    const int R = f.modes().max_component();
    const int N = grid_above((p + n - 1) * R);
    auto g = to_grid(f, N);
    SpectralField d1 = f, d2 = f;
    for (std::size_t m = 0; m < f.size(); ++m) {
      d1[m] = cplx(0, 2 * kPi * f.modes()[m].m1) * f[m];
      d2[m] = cplx(0, 2 * kPi * f.modes()[m].m2) * f[m];
    }
    auto g1 = to_grid(d1, N), g2 = to_grid(d2, N);
    SpectralField Fi(f.mode_set());
    F(i, f, Fi);
    auto gF = to_grid(Fi, N);
    EnergyRecord r;
    r.time = v.times[i];
    double pr = 0;
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double x = g[q];
      const double xp2 = std::pow(x, p - 2);
      r.lp += xp2 * x * x;
      r.K += xp2 * (g1[q] * g1[q] + g2[q] * g2[q]);
      r.L += std::pow(x, p + n - 1);
      pr += gF[q] * xp2 * x;
    }
    const double area = double(g.size());
    r.lp /= area;
    r.K /= area;
    r.L /= area;
    pairing[i] = pr / area;
    led.records.push_back(r);
  }
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    auto& r = led.records[i];
    const double lhs = (led.records[i + 1].lp - led.records[i - 1].lp) / (p * (v.times[i + 1] - v.times[i - 1]));
    const double rhs = -(p - 1) * r.K - r.lp - pairing[i];
    r.identity_residual = lhs - rhs;
  }
  return led;
}

// --- comparison test and a priori bound ---------------------------------------------

ComparisonBound comparison_bound(double f0, double lambda, double c1, double c2, double t) {
  if (!(lambda > 1)) throw std::invalid_argument("comparison_bound needs lambda > 1");
  if (f0 < 0 || !(c1 > 0) || c2 < 0 || !(t > 0)) throw std::invalid_argument("comparison_bound: bad arguments");
  const double e = 1.0 / (lambda - 1.0);
  const double floor = std::pow(2.0 * c2 / c1, 1.0 / lambda);
  ComparisonBound b;
  b.with_initial = std::max(f0 / std::pow(1.0 + t * std::pow(f0, lambda - 1) * (lambda - 1) * c1 / 2, e), floor);
  b.initial_free = std::max(std::pow(t, -e) * std::pow((lambda - 1) * c1 / 2, -e), floor);
  return b;
}

std::vector<AprioriExponent> apriori_exponents(int n, int p, double alpha) {
  if (!(alpha < 1.0 / ((p + n - 1.0) * (n - 1.0))))
    throw std::invalid_argument("a priori exponents need alpha < 1/((p+n-1)(n-1))");
  std::vector<AprioriExponent> out;
  const double P = p, Nn = n;
  for (int j = 0; j <= n - 1; ++j) {
    const double J = j;
    const double g[5] = {(P + Nn - 1) * alpha / 2, ((P + J - 1) - P * alpha / 2) / (P + Nn - 2),
                         (P + J - 1) * (P + J) * alpha / P, (P + J) * (1 - alpha) / (P + Nn - 1),
                         (P + J - 1) / (P + Nn - 1)};
    for (int i = 0; i < 5; ++i) out.push_back({j, i + 1, g[i], 1.0 / (1.0 - g[i])});
  }
  return out;
}

ExperimentReport apriori_check(const std::vector<Trajectory>& v_family, const std::vector<std::string>& labels,
                               const std::vector<ZVector>& Z_family, int n, int p, double alpha, double alpha_prime,
                               double t_min, double t_max) {
  ExperimentReport rep;
  rep.experiment = "apriori";
  const double lambda = (p + n - 1.0) / p;
  auto ex = apriori_exponents(n, p, alpha);
  auto& tex = rep.table("apriori_exponents", {"j", "i", "gamma", "p"});
  for (auto& e : ex) tex.add({std::to_string(e.j), std::to_string(e.i), fmt(e.gamma), fmt(e.p)});
  auto& tfit = rep.table("apriori_fit", {"x_id", "time", "lp_norm_p", "bound_core", "ratio"});
  std::vector<double> C;
  for (std::size_t x = 0; x < v_family.size(); ++x) {
    const auto& v = v_family[x];
    const ZVector* Z = x < Z_family.size() && !Z_family[x].Z.empty() ? &Z_family[x] : nullptr;
    // running sup_r r^{a' p} ||Z_r^{(n-j)}||^{p} per exponent
    std::vector<double> run(ex.size(), 0.0);
    double best = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double t = v.times[i];
      if (Z && t > 0) {
        const std::size_t zi = std::size_t(std::lower_bound(Z->Z[0].times.begin(), Z->Z[0].times.end(), t - 1e-14) -
                                           Z->Z[0].times.begin());
        std::vector<double> zn(n);
        for (int j = 0; j < n; ++j) zn[j] = holder_norm(Z->Z[j].fields.at(zi), -alpha);
        for (std::size_t e = 0; e < ex.size(); ++e) {
          const double q = ex[e].p;
          run[e] = std::max(run[e], std::pow(t, alpha_prime * q) * std::pow(zn[ex[e].j], q));
        }
      }
      if (t < t_min || t > t_max) continue;
      double sum = 0;
      for (std::size_t e = 0; e < ex.size(); ++e) sum += std::pow(t, -alpha_prime * ex[e].p) * run[e];
      const double core = std::max(std::pow(t, -1.0 / (lambda - 1.0)), std::pow(sum, 1.0 / lambda));
      const int N = grid_above((p + 1) * v.fields[i].modes().max_component());
      const double lp = std::pow(lp_norm_grid(to_grid(v.fields[i], N), p), p);
      best = std::max(best, lp / core);
      tfit.add({labels.at(x), fmt(t), fmt(lp), fmt(core), fmt(lp / core)});
    }
    C.push_back(best);
    rep.info("fitted_C[" + labels.at(x) + "]", best, "a priori bound, independent of the initial condition");
  }
  if (!C.empty()) {
    const double hi = *std::max_element(C.begin(), C.end());
    const double lo = *std::min_element(C.begin(), C.end());
    const double spread = lo > 0 ? hi / lo : HUGE_VAL;
    rep.check("fitted_C_spread", spread, spread < 1.5, "a priori bound, independent of the initial condition",
              "max_x C_x / min_x C_x < 1.5");
  }
  return rep;
}

}  // namespace sqe
