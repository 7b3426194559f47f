#include <array>
#include <algorithm>
#include <cmath>

#include "sqe/besov.hpp"
#include "sqe/equilibrium.hpp"
#include "sqe/parallel.hpp"
#include "sqe/stats.hpp"

namespace sqe {

// --- control ------------------------------------------------------------------------

SpectralField control_path(const ControlProblem& p, double t) {
  auto X = heat_semigroup(p.x, t);
  auto gap = p.y - heat_semigroup(p.x, p.T);
  X.axpy(t / p.T, gap);
  return X;
}

SpectralField control_forcing(const ControlProblem& p, const std::vector<double>& a, double t) {
  auto ms = p.x.mode_set();
  auto f = hermite_F(control_path(p, t), SpectralField(ms), p.renorm, a);
  auto gap = p.y - heat_semigroup(p.x, p.T);
  const auto& ev = ms->eigenvalues();
  // + (1/T) gap - (t/T)(Delta - 1) gap
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += gap[i] / p.T + (t / p.T) * ev[i] * gap[i];
  return f;
}

ControlResult control_to_target(const ControlProblem& p, const SolverConfig& cfg, ControlScheme scheme) {
  check_coefficients(cfg.a);
  if (!(p.T > 0)) throw std::invalid_argument("control horizon must be positive");
  auto ms = make_mode_set(cfg.cutoff);
  ControlProblem q = p;
  q.x = p.x.project(ms);
  q.y = p.y.project(ms);
  const auto times = make_time_grid(q.T, cfg.dt);
  const SpectralField zero(ms);
  auto G = [&](double t, const SpectralField& X) {
    auto g = control_forcing(q, cfg.a, t);
    g -= hermite_F(X, zero, q.renorm, cfg.a);
    return g;
  };

  const auto& ev = ms->eigenvalues();
  std::vector<double> S(ev.size()), P(ev.size()), P2(ev.size());
  double last = -1;
  ControlResult out;
  SpectralField X = q.x;
  out.path_error = 0;
  for (std::size_t k = 0;; ++k) {
    out.X.times.push_back(times[k]);
    out.X.fields.push_back(X);
    out.path_error = std::max(out.path_error, max_abs_diff(X, control_path(q, times[k])));
    if (k + 1 == times.size()) break;
    const double h = times[k + 1] - times[k];
    if (h != last) {
      for (std::size_t m = 0; m < ev.size(); ++m) {
        const double z = ev[m] * h;
        S[m] = std::exp(-z);
        P[m] = -std::expm1(-z) / ev[m];
        P2[m] = (std::expm1(-z) + z) / (z * ev[m]);  // h phi_2(-I h)
      }
      last = h;
    }
    auto g0 = G(times[k], X);
    SpectralField A(ms);
    for (std::size_t m = 0; m < A.size(); ++m) A[m] = S[m] * X[m] + P[m] * g0[m];
    if (scheme == ControlScheme::etd1) {
      X = A;
      continue;
    }
    // Cox-Matthews second-order corrector
    auto g1 = G(times[k + 1], A);
    for (std::size_t m = 0; m < A.size(); ++m) X[m] = A[m] + P2[m] * (g1[m] - g0[m]);
  }
  const auto diff = X - q.y;
  out.endpoint_error = holder_norm(diff, -cfg.reg.alpha0);
  out.endpoint_max_abs = diff.max_abs();
  return out;
}

ExperimentReport control_experiment(const SolverConfig& cfg, double renorm) {
  auto ms = make_mode_set(cfg.cutoff);
  ExperimentReport rep;
  rep.experiment = "control";
  auto& csv = rep.table("control", {"target", "scheme", "dt", "endpoint_error"});
  struct Target {
    std::string name;
    SpectralField x, y;
  };
  const SpectralField zero(ms);
  auto cos_ = [&](Mode m, double amp) { return SpectralField::cosine(ms, m, amp); };
  auto sin10 = SpectralField::basis(ms, {1, 0}, cplx(0, 1)) + SpectralField::basis(ms, {-1, 0}, cplx(0, -1));
  std::vector<Target> targets{
      {"cos(1,0)", zero, cos_({1, 0}, 1)},
      {"cos(1,1)", zero, cos_({1, 1}, 1)},
      {"0.5+0.5cos(0,1)", zero, SpectralField::constant(ms, 0.5) + cos_({0, 1}, 0.5)},
      {"-2sin(1,0)", zero, sin10},
      {"0.3cos(2,1)+0.2cos(1,0)", zero, cos_({2, 1}, 0.3) + cos_({1, 0}, 0.2)},
  };
  const std::string anchor = "explicit control reaching a smooth target";
  double worst = 0, worst_order = INFINITY;
  for (auto& tg : targets) {
    ControlProblem p{tg.x, tg.y, cfg.horizon, renorm};
    auto r1 = control_to_target(p, cfg, ControlScheme::etdrk2);
    SolverConfig half = cfg;
    half.dt = cfg.dt / 2;
    auto r2 = control_to_target(p, half, ControlScheme::etdrk2);
    auto e1 = control_to_target(p, cfg, ControlScheme::etd1);
    auto e2 = control_to_target(p, half, ControlScheme::etd1);
    csv.add({tg.name, "etdrk2", fmt(cfg.dt), fmt(r1.endpoint_error)});
    csv.add({tg.name, "etdrk2", fmt(half.dt), fmt(r2.endpoint_error)});
    csv.add({tg.name, "etd1", fmt(cfg.dt), fmt(e1.endpoint_error)});
    csv.add({tg.name, "etd1", fmt(half.dt), fmt(e2.endpoint_error)});
    const double order = std::log2(r1.endpoint_error / r2.endpoint_error);
    rep.info("endpoint_error[" + tg.name + "]", r1.endpoint_error, anchor);
    rep.info("order[" + tg.name + "]", order, anchor);
    rep.info("etd1.endpoint_error[" + tg.name + "]", e1.endpoint_error, anchor);
    rep.info("etd1.order[" + tg.name + "]", std::log2(e1.endpoint_error / e2.endpoint_error), anchor);
    worst = std::max(worst, r1.endpoint_error);
    worst_order = std::min(worst_order, order);
  }
  rep.check("max_endpoint_error", worst, worst < 1e-5, anchor, "endpoint C^-alpha0 error < 1e-5 on every target");
  rep.check("min_order", worst_order, worst_order >= 0.9, anchor, "observed order >= 0.9 under dt halving");

  // y = S(T) x: free flow plus the nonlinear compensator
  ControlProblem free{cos_({1, 0}, 1), zero, cfg.horizon, renorm};
  free.y = heat_semigroup(free.x, free.T);
  auto rf = control_to_target(free, cfg);
  rep.check("free_flow_endpoint_error", rf.endpoint_error, rf.endpoint_error < 1e-5, anchor, "< 1e-5");
  ControlProblem rest{zero, zero, cfg.horizon, renorm};
  auto rr = control_to_target(rest, cfg);
  const double mx = [&] {
    double m = 0;
    for (auto& f : rr.X.fields) m = std::max(m, f.max_abs());
    return m;
  }();
  rep.check("zero_target_stays_zero", mx, mx == 0, anchor, "X identically 0 for x = y = 0");
  return rep;
}

// --- support probes -------------------------------------------------------------------

double probe_lambda(int m) { return 1 + 4 * kPi * kPi * std::ldexp(1.0, 2 * m) * 2; }

static double coarse_renorm(int m, double lambda) {
  return renorm_constant(*make_mode_set(lambda * std::ldexp(1.0, m)));
}

int probe_m0(double renorm, double lambda) {
  for (int m = 1; m < 40; ++m)
    if (coarse_renorm(m, lambda) > renorm) return m;
  throw std::invalid_argument("probe_m0: renormalization target out of reach");
}

double probe_C(int m, double renorm, double lambda) {
  if (m < probe_m0(renorm, lambda)) return 0;
  return coarse_renorm(m, lambda) - renorm;
}

SpectralField probe_f(int m, double C, const ModeSetPtr& ms) {
  const int k = 1 << m;
  if (!ms->contains({k, k})) throw std::invalid_argument("probe_f: mode 2^m (1,1) outside the mode set");
  return SpectralField::cosine(ms, {k, k}, std::sqrt(2 * C) / 2);
}

ExperimentReport support_probe(const ProbeSpec& spec) {
  ExperimentReport rep;
  rep.experiment = "support-probe";
  auto& csv = rep.table("probe", {"m", "res1", "res2", "res3"});
  const std::string anchor = "support of the diagram law contains (0, -R, 0)";
  for (int m : spec.m_range) {
    const double fine = std::ldexp(1.0, m + 1);
    if (fine > spec.max_fine_cutoff + 1e-9)
      throw ConfigError("support_probe: m = " + std::to_string(m) + " needs cutoff " + fmt(fine) +
                        " above the allowed " + fmt(spec.max_fine_cutoff));
  }

  for (double Rt : spec.renorm_targets) {
    const std::string tag = "[R=" + label(Rt) + "]";
    std::vector<std::array<double, 3>> med;
    for (int m : spec.m_range) {
      auto ms = make_mode_set(std::ldexp(1.0, m + 1));
      auto coarse = make_mode_set(spec.lambda * std::ldexp(1.0, m));
      const double Reps = renorm_constant(*ms), Rm = renorm_constant(*coarse);
      const double C = probe_C(m, Rt, spec.lambda);
      const auto f = probe_f(m, C, ms);
      const double lam = probe_lambda(m);

      // <1>^m o h_m = 0: the LP blocks of the two supports are at least two levels apart
      {
        auto part = DyadicPartition::covering(ms->cutoff());
        const auto& W = part.weights_for(*ms);
        int hi_coarse = -2, lo_f = 1 << 20;
        for (std::size_t i = 0; i < ms->size(); ++i)
          for (int kp = -1; kp <= part.max_level(); ++kp) {
            if (W[std::size_t(kp + 1)][i] == 0) continue;
            if (coarse->contains((*ms)[i])) hi_coarse = std::max(hi_coarse, kp);
            if (f[i] != cplx(0)) lo_f = std::min(lo_f, kp);
          }
        if (C > 0 && lo_f - hi_coarse < 2)
          throw std::logic_error("support_probe: resonant overlap between <1>^m and h_m at this lambda");
        rep.info("block_gap[m=" + std::to_string(m) + "]" + tag, C > 0 ? double(lo_f - hi_coarse) : INFINITY,
                 "resonant product of <1>^m and h_m vanishes");
      }

      std::vector<std::array<double, 3>> res(spec.replicas);
      std::vector<double> comb(spec.replicas);
      parallel_for(spec.replicas, [&](std::size_t r) {
        NoiseStream ns{spec.seed, r, 1.0};
        auto ou = ou_path(sample_stationary_ou(ms, ns, spec.times.front()), spec.times, ns, 0);
        std::array<double, 3> worst{0, 0, 0};
        double cworst = 0;
        for (std::size_t k = 0; k < spec.times.size(); ++k) {
          const auto& X1 = ou.fields[k];
          auto X1m = X1.project(coarse).project(ms);
          auto d = hermite_full(3, X1, Reps);
          auto w = X1m;
          w *= -1;
          w.axpy(-(1 - std::exp(-lam * (spec.times[k] + 1))), f);
          auto T = translate_diagrams(d, w);
          auto two = T[1];
          two += SpectralField::constant(two.mode_set(), Rt);
          worst[0] = std::max(worst[0], holder_norm(T[0], -spec.alpha));
          worst[1] = std::max(worst[1], holder_norm(two, -spec.alpha));
          worst[2] = std::max(worst[2], holder_norm(T[2], -spec.alpha));
          // <2> + ((<1>^m)^2 - R^m) - 2(<1><1>^m - R^m)
          auto c = d[1];
          auto sq = multiply_full(X1m, X1m), cross = multiply_full(X1, X1m);
          auto band = c.mode_set();
          c += sq.project(band);
          c.axpy(-2, cross.project(band));
          c += SpectralField::constant(band, Rm);
          cworst = std::max(cworst, holder_norm(c, -spec.alpha));
        }
        res[r] = worst;
        comb[r] = cworst;
      });
      std::array<double, 3> md{};
      for (int j = 0; j < 3; ++j) {
        std::vector<double> col;
        for (auto& x : res) col.push_back(x[std::size_t(j)]);
        md[std::size_t(j)] = median(col);
      }
      med.push_back(md);
      csv.add({std::to_string(m), fmt(md[0]), fmt(md[1]), fmt(md[2])});
      const std::string mt = "[m=" + std::to_string(m) + "]" + tag;
      rep.info("C_m" + mt, C, anchor);
      rep.info("renorm_product_residual" + mt, median(comb), "renormalized product cancellation");
      if (C > 0) {
        const double fn = holder_norm(f, -spec.alpha);
        rep.info("f_norm_ratio" + mt, fn / (std::sqrt(C) * std::pow(2.0, -spec.alpha * m)),
                 "||f_m||_{C^-alpha} <~ C_m^{1/2} 2^{-alpha m}");
        for (int k = 1; k <= 3; ++k)
          rep.info("hermite_f_norm[k=" + std::to_string(k) + "]" + mt,
                   holder_norm(hermite_full(k, f, C)[std::size_t(k) - 1], -spec.alpha), "H_k(f_m, C_m) -> 0");
      }
    }
    for (int j = 0; j < 3; ++j) {
      bool dec = true;
      for (std::size_t i = 1; i < med.size(); ++i) dec = dec && med[i][std::size_t(j)] < med[i - 1][std::size_t(j)];
      rep.check("res" + std::to_string(j + 1) + "_decreasing" + tag, dec ? 1 : 0, dec, anchor,
                "median residual strictly decreasing along m");
    }
  }
  return rep;
}

}  // namespace sqe
