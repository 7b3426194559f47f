#include "sqe/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sqe/besov.hpp"
#include "sqe/parallel.hpp"
#include "sqe/stats.hpp"

namespace sqe {

double cutoff_chi(double zeta, const CutoffSpec& c) {
  const double z = std::abs(zeta), h = c.r / 2;
  return 1.0 - smoothstep7((z - h) / h);
}

double cutoff_chi_deriv(double zeta, const CutoffSpec& c) {
  const double z = std::abs(zeta), h = c.r / 2;
  const double d = -smoothstep7_deriv((z - h) / h) / h;
  return zeta < 0 ? -d : d;
}

double stopping_time(const std::vector<Trajectory>& Z, const CutoffSpec& c, const WeightedNormSpec& spec) {
  if (Z.empty()) return kNever;
  std::vector<SpectralField> at(Z.size());
  for (std::size_t i = 0; i < Z[0].size(); ++i) {
    for (std::size_t k = 0; k < Z.size(); ++k) at[k] = Z[k].fields[i];
    if (weighted_value(at, Z[0].times[i], spec) > c.r) return Z[0].times[i];
  }
  return kNever;
}

LinearFlow solve_linearization(const Trajectory& v, const DiagramSet& d, const std::vector<double>& a, double s,
                               const SpectralField& h) {
  const auto& times = v.times;
  auto it = std::lower_bound(times.begin(), times.end(), s - 1e-12);
  if (it == times.end() || std::abs(*it - s) > 1e-9) throw std::invalid_argument("solve_linearization: s off grid");
  if (d.size() != v.size()) throw std::invalid_argument("solve_linearization: base grids differ");
  LinearFlow out;
  out.s = s;
  out.h = h;
  SpectralField J = h.project(v.fields[0].mode_set());
  for (auto i = std::size_t(it - times.begin());; ++i) {
    out.Jh.times.push_back(times[i]);
    out.Jh.fields.push_back(J);
    if (i + 1 == times.size()) break;
    auto FJ = apply_F_prime(v.fields[i], d.at(i), a, J);
    J = etd_step(J, FJ, times[i + 1] - times[i]);
  }
  return out;
}

void GirsanovWeight::add(const SpectralField& eta, const SpectralField& d, const std::vector<double>& var) {
  for (std::size_t m = 0; m < eta.size(); ++m) {
    integral += (eta[m] * std::conj(d[m])).real() / var[m];
    quadratic += std::norm(d[m]) / var[m];
  }
}

// --- BEL ------------------------------------------------------------------------------

namespace {

struct BelSample {
  double lhs = 0, mart = 0, bnd = 0;
  bool tau_hit = false;
  std::vector<double> weights;
  bool novikov_bad = false;
  std::size_t checked = 0, violations = 0;
  bool exploded = false;
};

// ||f||_inf <= sum_kappa ||delta_kappa f||_inf <= (2^beta / (1 - 2^-beta)) ||f||_{C^beta}
double sup_from_holder(double beta) { return std::pow(2.0, beta) / (1 - std::pow(2.0, -beta)); }

BelSample bel_replica(const BelSpec& spec, std::size_t replica, double novikov_budget, double h_norm) {
  const auto& cfg = spec.run.cfg;
  const int n = cfg.n;
  auto ms = make_mode_set(cfg.cutoff);
  const NoiseStream ns = spec.run.stream(replica);
  const double R = renorm_constant(*ms);
  const auto times = make_time_grid(spec.t, cfg.dt);
  const std::size_t K = times.size() - 1;
  const WeightedNormSpec wspec{cfg.reg.alpha, cfg.reg.alpha_prime, spec.t};
  const auto S = heat_factors(*ms, cfg.dt);
  const auto P = phi1_factors(*ms, cfg.dt);
  const auto var = ou_increment_variance(*ms, cfg.dt);

  BelSample out;
  SpectralField v = spec.run.x.project(ms), ou(ms), J = spec.h.project(ms), DX(ms), Q(ms), d(ms);
  std::vector<SpectralField> ou_hist{ou}, Q_hist{Q};
  GirsanovWeight gw;
  bool stopped = false;
  double M = weighted_value(hermite_full(n, ou, R), times[0], wspec);
  if (M > spec.cutoff.r) stopped = true;
  double novikov = 0;

  for (std::size_t k = 0; k < K; ++k) {
    const double tk = times[k];
    // u_k = J_{0,t_k} h while t_k < tau, and the noise shift over the step is phi1 * u_k
    if (!stopped) {
      if (tk > 0) {
        ++out.checked;
        if (std::pow(tk, cfg.reg.gamma) * holder_norm(J, cfg.reg.beta) > 2 * h_norm) ++out.violations;
      }
      for (std::size_t m = 0; m < d.size(); ++m) d[m] = P[m] * J[m];
      novikov += J.inner(J) * cfg.dt;
    } else {
      d.set_zero();
    }
    auto eta = ou_increment(ms, cfg.dt, ns, std::int64_t(k));
    gw.add(eta, d, var);

    auto dk = hermite_full(n, ou, R);
    auto Fp = nonlinearity_F_prime(v, dk, cfg.a);
    auto FJ = multiply(Fp, J, ms);
    auto FD = multiply(Fp, DX, ms);
    auto Fv = hermite_F(v, ou, R, cfg.a);
    for (std::size_t m = 0; m < v.size(); ++m) {
      J[m] = S[m] * J[m] - P[m] * FJ[m];
      DX[m] = S[m] * DX[m] - P[m] * FD[m] + d[m];
      Q[m] = S[m] * Q[m] + d[m];
      v[m] = S[m] * v[m] - P[m] * Fv[m];
      ou[m] = S[m] * ou[m] + eta[m];
    }
    if (!std::isfinite(v.max_abs())) {
      out.exploded = true;
      return out;
    }
    ou_hist.push_back(ou);
    Q_hist.push_back(Q);
    const double wv = weighted_value(hermite_full(n, ou, R), times[k + 1], wspec);
    M = std::max(M, wv);
    if (wv > spec.cutoff.r) stopped = true;
  }
  out.tau_hit = M > spec.cutoff.r;
  out.novikov_bad = novikov > novikov_budget;

  const SpectralField X = ou + v;
  const double phi = spec.phi.value(X);
  const double chi = cutoff_chi(M, spec.cutoff);
  const double dchi = cutoff_chi_deriv(M, spec.cutoff);
  out.lhs = spec.phi.derivative(X, DX) * chi;
  out.mart = phi * gw.integral * chi;
  if (dchi != 0) {
    // one-sided difference of the weighted norm along the shift of the diagrams
    double Md = 0;
    for (std::size_t k = 0; k <= K; ++k) {
      auto shifted = ou_hist[k];
      shifted.axpy(spec.fd_step, Q_hist[k]);
      Md = std::max(Md, weighted_value(hermite_full(n, shifted, R), times[k], wspec));
    }
    out.bnd = phi * dchi * (Md - M) / spec.fd_step;
  }
  for (double dl : spec.girsanov_deltas) out.weights.push_back(gw.weight(dl));
  return out;
}

}  // namespace

BelResult bel_estimator(const BelSpec& spec) {
  const auto& cfg = spec.run.cfg;
  check_config(cfg);
  if (spec.run.replicas == 0) throw ConfigError("replicas must be >= 1");
  auto ms = make_mode_set(cfg.cutoff);
  const double h_norm = holder_norm(spec.h.project(ms), -cfg.reg.alpha0);
  const double c = sup_from_holder(cfg.reg.beta);
  const double g = cfg.reg.gamma;
  BelResult res;
  res.novikov_budget =
      spec.novikov_safety * 4 * c * c * h_norm * h_norm * std::pow(spec.t, 1 - 2 * g) / (1 - 2 * g);

  std::vector<BelSample> samples(spec.run.replicas);
  parallel_for(samples.size(), [&](std::size_t r) { samples[r] = bel_replica(spec, r, res.novikov_budget, h_norm); });

  RunningStats L, Rr, D, Mt, Bd, tau;
  std::vector<RunningStats> W(spec.girsanov_deltas.size());
  for (auto& s : samples) {
    if (s.exploded) {
      res.exploded = true;
      continue;
    }
    const double rhs = s.mart - s.bnd;
    L.add(s.lhs);
    Rr.add(rhs);
    D.add(s.lhs - rhs);
    Mt.add(s.mart);
    Bd.add(s.bnd);
    tau.add(s.tau_hit ? 1 : 0);
    for (std::size_t i = 0; i < W.size(); ++i) W[i].add(s.weights[i]);
    res.novikov_exceeded += s.novikov_bad;
    res.bound_checked += s.checked;
    res.bound_violations += s.violations;
  }
  res.replicas = L.n;
  res.lhs = L.mean;
  res.rhs = Rr.mean;
  res.se_lhs = L.stderr_mean();
  res.se_rhs = Rr.stderr_mean();
  res.se_diff = D.stderr_mean();
  res.martingale_term = Mt.mean;
  res.boundary_term = Bd.mean;
  res.p_tau_exceeded = tau.mean;
  for (auto& w : W) {
    res.girsanov_mean.push_back(w.mean);
    res.girsanov_se.push_back(w.stderr_mean());
  }
  return res;
}

ExperimentReport bel_report(const BelSpec& spec, const std::vector<double>& r_sensitivity) {
  ExperimentReport rep;
  rep.experiment = "bel";
  const std::string anchor = "Bismut-Elworthy-Li formula with smooth cutoff";
  auto res = bel_estimator(spec);
  rep.explosion = res.exploded;
  auto& csv = rep.table("bel", {"lhs", "rhs", "se_lhs", "se_rhs", "p_tau_exceeded"});
  csv.add({fmt(res.lhs), fmt(res.rhs), fmt(res.se_lhs), fmt(res.se_rhs), fmt(res.p_tau_exceeded)});

  rep.info("lhs", res.lhs, anchor, res.se_lhs);
  rep.info("rhs", res.rhs, anchor, res.se_rhs);
  rep.info("rhs.martingale_term", res.martingale_term, anchor);
  rep.info("rhs.boundary_term", res.boundary_term, "one-sided derivative of the weighted norm");
  rep.info("p_tau_exceeded", res.p_tau_exceeded, "stopping time");
  const double z = std::abs(res.lhs - res.rhs) / res.se_diff;
  rep.check("bel_gap_z", z, z < 4, anchor, "|lhs - rhs| < 4 SE of the paired difference", res.se_diff);
  const double zc = std::abs(res.lhs - res.rhs) / std::hypot(res.se_lhs, res.se_rhs);
  rep.info("bel_gap_z_combined", zc, anchor);
  for (std::size_t i = 0; i < res.girsanov_mean.size(); ++i) {
    const double zg = std::abs(res.girsanov_mean[i] - 1) / res.girsanov_se[i];
    rep.check("girsanov_mean[delta=" + label(spec.girsanov_deltas[i]) + "]", res.girsanov_mean[i], zg < 4,
              "exponential martingale has unit mean", "|mean - 1| < 4 SE", res.girsanov_se[i]);
  }
  auto& nov = rep.check("novikov_exceeded", double(res.novikov_exceeded), res.novikov_exceeded == 0,
                        "Novikov budget from the deterministic bound on J", "no replica above the budget");
  nov.note = "budget " + fmt(res.novikov_budget);
  if (res.novikov_exceeded > 0) rep.aborted = true;
  rep.info("linearization_bound_violations", double(res.bound_violations),
           "s^gamma ||J_s h||_{C^beta} <= 2 ||h||_{C^-alpha0} before the stopping time")
      .note = std::to_string(res.bound_checked) + " checks";

  if (!r_sensitivity.empty()) {
    auto& t = rep.table("bel_r_sensitivity", {"r", "lhs", "rhs", "se_lhs", "se_rhs", "p_tau_exceeded"});
    for (double r : r_sensitivity) {
      BelSpec s = spec;
      s.cutoff.r = r;
      s.run.replicas = std::max<std::size_t>(1, spec.run.replicas / 10);
      auto q = bel_estimator(s);
      t.add({fmt(r), fmt(q.lhs), fmt(q.rhs), fmt(q.se_lhs), fmt(q.se_rhs), fmt(q.p_tau_exceeded)});
      // with chi = 0 on every sample both sides are exactly zero
      const double d = std::abs(q.lhs - q.rhs);
      auto& m = rep.info("bel_gap_z[r=" + label(r) + "]", q.se_diff > 0 ? d / q.se_diff : (d == 0 ? 0.0 : INFINITY),
                         anchor);
      if (q.se_diff == 0) m.note = "cutoff vanishes on every sample";
    }
  }
  return rep;
}

// --- linearization -------------------------------------------------------------------

namespace {

SpectralField random_smooth(const ModeSetPtr& ms, std::mt19937_64& rng) {
  std::normal_distribution<double> G(0.0, 1.0);
  SpectralField f(ms);
  for (std::size_t i = 0; i < ms->size(); ++i) {
    const double w = 1.0 / std::sqrt(ms->eigenvalues()[i]);
    if (i == ms->zero_index()) {
      f[i] = w * G(rng);
    } else if (ms->is_representative(i)) {
      f[i] = w * cplx(G(rng), G(rng)) / std::sqrt(2.0);
      f[ms->neg_index(i)] = std::conj(f[i]);
    }
  }
  return f;
}

}  // namespace

ExperimentReport linearization_experiment(const SolverConfig& cfg, std::size_t directions, std::uint64_t seed,
                                          double d1, double d2) {
  check_config(cfg);
  ExperimentReport rep;
  rep.experiment = "linearization";
  auto& csv = rep.table("linearization", {"direction", "delta", "relative_error"});
  auto ms = make_mode_set(cfg.cutoff);
  const double R = renorm_constant(*ms);
  const auto times = make_time_grid(cfg);

  struct Row {
    double e1 = 0, e2 = 0, lin = 0;
    bool exploded = false;
  };
  std::vector<Row> rows(directions);
  parallel_for(directions, [&](std::size_t i) {
    std::seed_seq sq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(i), 0x11u};
    std::mt19937_64 rng(sq);
    auto x = random_smooth(ms, rng), h = random_smooth(ms, rng), h2 = random_smooth(ms, rng);
    auto ou = ou_path(zero_ou(ms, 0), times, NoiseStream{seed, i, 1.0}, 0);
    auto F = hermite_nonlinearity(ou, R, cfg.a);
    auto base = integrate_mild(x, times, F, cfg);
    if (base.exploded) {
      rows[i].exploded = true;
      return;
    }
    auto D = wick_trajectory(ou, cfg.n, R, DiagramOrigin::zero_start, 0);
    auto J = solve_linearization(base.v, D, cfg.a, 0, h);
    double scale = 0;
    for (auto& f : J.Jh.fields) scale = std::max(scale, f.max_abs());
    auto fd_error = [&](double delta) {
      auto xp = x;
      xp.axpy(delta, h);
      auto pert = integrate_mild(xp, times, F, cfg);
      double e = 0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        auto q = pert.v.fields[k] - base.v.fields[k];
        q *= 1 / delta;
        e = std::max(e, max_abs_diff(q, J.Jh.fields[k]));
      }
      return e / scale;
    };
    rows[i].e1 = fd_error(d1);
    rows[i].e2 = fd_error(d2);
    // linearity in h
    auto Jb = solve_linearization(base.v, D, cfg.a, 0, h2);
    auto Jc = solve_linearization(base.v, D, cfg.a, 0, 0.7 * h - 1.3 * h2);
    auto comb = 0.7 * J.Jh.fields.back() - 1.3 * Jb.Jh.fields.back();
    rows[i].lin = max_abs_diff(comb, Jc.Jh.fields.back()) / std::max(1e-300, comb.max_abs());
  });

  double worst = INFINITY, lin = 0;
  for (std::size_t i = 0; i < directions; ++i) {
    if (rows[i].exploded) {
      rep.explosion = true;
      continue;
    }
    csv.add({std::to_string(i), fmt(d1), fmt(rows[i].e1)});
    csv.add({std::to_string(i), fmt(d2), fmt(rows[i].e2)});
    const double order = std::log(rows[i].e1 / rows[i].e2) / std::log(d1 / d2);
    rep.info("observed_order[" + std::to_string(i) + "]", order, "J is the derivative of the solution map");
    worst = std::min(worst, order);
    lin = std::max(lin, rows[i].lin);
  }
  rep.check("min_observed_order", worst, worst >= 0.9, "J is the derivative of the solution map",
            "observed FD order >= 0.9 between the two deltas, every direction");
  rep.check("linearity_defect", lin, lin < 1e-10, "J is linear in h", "relative defect < 1e-10");
  return rep;
}

// --- two-point experiment ---------------------------------------------------------------

ExperimentReport tv_experiment(const TvSpec& spec) {
  const auto& cfg = spec.run.cfg;
  check_config(cfg);
  if (spec.run.replicas == 0) throw ConfigError("replicas must be >= 1");
  auto ms = make_mode_set(cfg.cutoff);
  const double R = renorm_constant(*ms);
  const auto times = make_time_grid(spec.t, cfg.dt);
  const auto dict = spec.run.dictionary.empty() ? observable_dictionary(ms) : spec.run.dictionary;
  const std::size_t ne = spec.distances.size(), nd = dict.size();
  const WeightedNormSpec wspec{cfg.reg.alpha, cfg.reg.alpha_prime, spec.t};
  const std::size_t half = (times.size() - 1) / 2;
  const SpectralField dir =
      spec.direction.empty() ? SpectralField::basis(ms, {0, 0}) : spec.direction.project(ms);

  struct Sample {
    std::vector<std::vector<double>> diff;  // [eps][observable] Phi(X^x) - Phi(X^y)
    double M_half = 0, M_full = 0;          // running weighted diagram max at t/2 and t
    bool exploded = false;
  };
  std::vector<Sample> samples(spec.run.replicas);
  parallel_for(samples.size(), [&](std::size_t r) {
    auto& s = samples[r];
    // common random numbers: every starting point sees the same noise
    auto base = simulate_replica(spec.run, r, times, {}, false);
    if (base.exploded) {
      s.exploded = true;
      return;
    }
    s.diff.assign(ne, std::vector<double>(nd));
    for (std::size_t e = 0; e < ne; ++e) {
      RunSpec ry = spec.run;
      ry.x = spec.run.x.project(ms);
      ry.x.axpy(spec.distances[e], dir);
      auto py = simulate_replica(ry, r, times, {}, false);
      if (py.exploded) {
        s.exploded = true;
        return;
      }
      for (std::size_t o = 0; o < nd; ++o) s.diff[e][o] = dict[o].value(base.final.X) - dict[o].value(py.final.X);
    }
    auto ou = ou_path(zero_ou(ms, 0), times, spec.run.stream(r), 0);
    double M = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      M = std::max(M, weighted_value(hermite_full(cfg.n, ou.fields[k], R), times[k], wspec));
      if (k == half) s.M_half = M;
    }
    s.M_full = M;
  });

  ExperimentReport rep;
  rep.experiment = "tv";
  auto& csv = rep.table("tv", {"distance", "observable", "gap", "se"});
  std::vector<std::vector<RunningStats>> acc(ne, std::vector<RunningStats>(nd));
  for (auto& s : samples) {
    if (s.exploded) {
      rep.explosion = true;
      continue;
    }
    for (std::size_t e = 0; e < ne; ++e)
      for (std::size_t o = 0; o < nd; ++o) acc[e][o].add(s.diff[e][o]);
  }
  const std::string anchor = "two-point bound |P_t Phi(x) - P_t Phi(y)|";
  std::vector<double> gaps(ne), lx, ly;
  for (std::size_t e = 0; e < ne; ++e) {
    double g = 0, se = 0;
    for (std::size_t o = 0; o < nd; ++o) {
      csv.add({fmt(spec.distances[e]), dict[o].name, fmt(std::abs(acc[e][o].mean)), fmt(acc[e][o].stderr_mean())});
      if (std::abs(acc[e][o].mean) > g) {
        g = std::abs(acc[e][o].mean);
        se = acc[e][o].stderr_mean();
      }
    }
    gaps[e] = g;
    rep.info("gap[d=" + label(spec.distances[e]) + "]", g, anchor, se);
    if (g > 0 && spec.distances[e] > 0) {
      lx.push_back(std::log(spec.distances[e]));
      ly.push_back(std::log(g));
    }
  }
  // the distances are listed from far to near; the gap must shrink along them
  bool monotone = true;
  for (std::size_t e = 1; e < ne; ++e)
    if (spec.distances[e] < spec.distances[e - 1]) monotone = monotone && gaps[e] < gaps[e - 1];
  rep.check("gap_monotone", monotone ? 1 : 0, monotone, "local Hoelder continuity in the starting point",
            "dictionary gap strictly decreasing as the distance shrinks");
  if (lx.size() >= 2) rep.info("fitted_distance_exponent", fit_line(lx, ly).slope, "Hoelder exponent, fitted");

  auto& tt = rep.table("tv_tau", {"r", "t", "p_tau"});
  double prev_full = 2;
  bool mono_r = true, mono_t = true;
  std::vector<double> sorted_r = spec.r_values;
  std::sort(sorted_r.begin(), sorted_r.end());
  for (double r : sorted_r) {
    // P(t >= tau^{r/2}): the running max passes r/2 by time t
    RunningStats ph, pf;
    for (auto& s : samples) {
      if (s.exploded) continue;
      ph.add(s.M_half > r / 2);
      pf.add(s.M_full > r / 2);
    }
    tt.add({fmt(r), fmt(times[half]), fmt(ph.mean)});
    tt.add({fmt(r), fmt(spec.t), fmt(pf.mean)});
    rep.info("p_tau[r=" + label(r) + "]", pf.mean, "stopping-time tail", pf.stderr_mean());
    mono_r = mono_r && pf.mean <= prev_full;
    mono_t = mono_t && ph.mean <= pf.mean;
    prev_full = pf.mean;
  }
  rep.check("p_tau_monotone", (mono_r && mono_t) ? 1 : 0, mono_r && mono_t, "stopping-time tail",
            "non-increasing in r and non-decreasing in t");
  return rep;
}

}  // namespace sqe
