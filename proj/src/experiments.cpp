#include "sqe/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "sqe/equilibrium.hpp"
#include "sqe/inequality_suite.hpp"
#include "sqe/kernel.hpp"
#include "sqe/parallel.hpp"
#include "sqe/sensitivity.hpp"
#include "sqe/stats.hpp"

namespace sqe {

namespace {

// <f, phi> over phi's modes; f may live on a larger band
double pairing(const SpectralField& f, const SpectralField& phi) {
  double s = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += (f.at(phi.modes()[i]) * std::conj(phi[i])).real();
  return s;
}

std::vector<double> ints_of(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(std::round(x));
  return out;
}

}  // namespace

// --- wick covariance ------------------------------------------------------------------

ExperimentReport wick_covariance_experiment(const ExperimentConfig& c) {
  const auto cfg = c.solver();
  auto ms = make_mode_set(cfg.cutoff);
  const double R = renorm_constant(*ms);
  const auto orders = ints_of(c.list("orders"));
  const auto& lags = c.list("lags");
  const int top = int(*std::max_element(orders.begin(), orders.end()));
  if (top < 1) throw ConfigError("orders must be >= 1");
  struct Test {
    std::string name;
    SpectralField phi;
  };
  std::vector<Test> tests{{"e0", SpectralField::constant(ms, 1)}};
  if (ms->contains({1, 0})) tests.push_back({"cos10", SpectralField::cosine(ms, {1, 0})});

  const std::size_t N = c.replicas();
  const std::size_t per = lags.size() * orders.size() * tests.size();
  std::vector<double> prod(N * per);
  parallel_for(N, [&](std::size_t r) {
    NoiseStream ns{c.seed(), r, 1.0};
    auto X0 = sample_stationary_ou(ms, ns, 0);
    auto d0 = hermite_full(top, X0.field, R);
    std::size_t j = r * per;
    for (double lag : lags) {
      auto Xl = X0;
      if (lag > 0) ou_step(Xl, lag, ns, 0);
      auto dl = lag > 0 ? hermite_full(top, Xl.field, R) : d0;
      for (double k : orders)
        for (const auto& t : tests)
          prod[j++] = pairing(d0[std::size_t(k) - 1], t.phi) * pairing(dl[std::size_t(k) - 1], t.phi);
    }
  });

  ExperimentReport rep;
  auto& csv = rep.table("wick_covariance", {"n", "lag", "phi", "empirical", "analytic", "stderr", "z"});
  const std::string anchor = "covariance of Wick powers n! (rho^{*n}) of the stationary OU";
  std::size_t j = 0;
  double zmax = 0;
  for (double lag : lags)
    for (double k : orders) {
      auto spec = analytic_wick_covariance(int(k), 0, lag, ms);
      for (const auto& t : tests) {
        RunningStats s;
        for (std::size_t r = 0; r < N; ++r) s.add(prod[r * per + j]);
        ++j;
        const double an = pair_covariance(spec, t.phi);
        const double se = s.stderr_mean();
        const double z = std::abs(s.mean - an) / se;
        zmax = std::max(zmax, z);
        const std::string id = "n=" + label(k) + ",lag=" + label(lag) + "," + t.name;
        rep.check("z[" + id + "]", z, z < 4, anchor, "z < 4").note =
            "empirical " + fmt(s.mean) + " analytic " + fmt(an);
        csv.add({fmt(k), fmt(lag), t.name, fmt(s.mean), fmt(an), fmt(se), fmt(z)});
      }
    }
  rep.info("max_z", zmax, anchor);
  return rep;
}

// --- restart consistency -------------------------------------------------------------

ExperimentReport restart_experiment(const ExperimentConfig& c) {
  const auto cfg = c.solver();
  auto ms = make_mode_set(cfg.cutoff);
  const double t = c.num("t"), h = c.num("h");
  ExperimentReport rep;
  auto& csv = rep.table("restart", {"check", "dt", "path", "sup_error"});
  const std::string anchor = "Markov property: restarting from X(t) reproduces the direct solution";

  RunSpec run;
  run.cfg = cfg;
  run.cfg.horizon = t + h;
  run.seed = c.seed();
  run.x = SpectralField::cosine(ms, {1, 0}, 1.0);
  for (double dt : {cfg.dt, c.num("coarse_dt")}) {
    run.cfg.dt = dt;
    double sup = 0;
    bool exploded = false;
    for (std::size_t r = 0; r < c.replicas(); ++r) {
      auto m = markov_consistency(run.x, t, h, run, r);
      exploded = exploded || m.exploded;
      sup = std::max(sup, m.sup_error);
      csv.add({"markov", fmt(dt), std::to_string(r), fmt(m.sup_error)});
    }
    rep.explosion = rep.explosion || exploded;
    rep.check("markov_sup_error[dt=" + label(dt) + "]", sup, !exploded && sup < 1e-8, anchor, "< 1e-8");
  }

  // pathwise identities on a small cutoff
  auto ms4 = make_mode_set(c.num("identity_cutoff"));
  const double R4 = renorm_constant(*ms4);
  const int n = cfg.n;
  double restart_err = 0, shift_err = 0;
  for (std::size_t p = 0; p < std::size_t(c.integer("paths")); ++p) {
    NoiseStream ns{splitmix64(c.seed() ^ 0x5157ull), p, 1.0};
    const double e1 = restart_identity_error(ms4, n, t, h, cfg.dt, ns);

    auto Ys = sample_stationary_ou(ms4, ns, 0);
    auto Yt = Ys;
    ou_step(Yt, h, ns, 0);
    auto sw = shifted_wick(Ys.field, hermite_full(n, Yt.field, R4), h);
    auto direct = hermite_full(n, Yt.field - heat_semigroup(Ys.field, h), R4);
    double e2 = 0;
    for (int k = 0; k < n; ++k) e2 = std::max(e2, max_abs_diff(sw[k], direct[k]));

    restart_err = std::max(restart_err, e1);
    shift_err = std::max(shift_err, e2);
    csv.add({"restart_binomial", fmt(cfg.dt), std::to_string(p), fmt(e1)});
    csv.add({"shifted_wick", "", std::to_string(p), fmt(e2)});
  }
  rep.check("restart_binomial_error", restart_err, restart_err < 1e-9,
            "binomial re-expansion of zero-start diagrams around the restart time", "< 1e-9");
  rep.check("shifted_wick_error", shift_err, shift_err < 1e-9,
            "shifted Wick power equals the Hermite polynomial of the OU increment", "< 1e-9");
  return rep;
}

// --- dissipation ---------------------------------------------------------------------

namespace {

struct DissipationRun {
  Trajectory v;      // strided
  ZVector Z;         // same times as v; empty for zero diagrams
  std::vector<double> times, l2;  // every grid time
  bool exploded = false;
  EnergyLedger ledger;
};

double l2sq(const SpectralField& v) { return v.inner(v); }

DissipationRun dissipation_run(const SolverConfig& cfg, const SpectralField& x, bool sampled,
                               const NoiseStream& ns, std::size_t stride) {
  auto ms = x.mode_set();
  const auto times = make_time_grid(cfg);
  const double R = sampled ? renorm_constant(*ms) : 0.0;
  OUState ou = zero_ou(ms, 0);
  std::size_t ou_i = 0;
  auto advance = [&](std::size_t i) {
    while (sampled && ou_i < i) {
      ou_step(ou, times[ou_i + 1] - times[ou_i], ns, std::int64_t(ou_i));
      ++ou_i;
    }
  };
  DissipationRun out;
  out.Z.n = cfg.n;
  out.Z.a_n = cfg.a.back();
  if (sampled) out.Z.Z.resize(std::size_t(cfg.n));
  Nonlinearity F = [&](std::size_t i, const SpectralField& v, SpectralField& o) {
    advance(i);
    hermite_F(v, ou.field, R, cfg.a, o);
  };
  SolveOptions opt;
  opt.store = false;
  opt.observer = [&](std::size_t i, double t, const SpectralField& v) {
    out.times.push_back(t);
    out.l2.push_back(l2sq(v));
    if (stride == std::size_t(-1) || (i % stride != 0 && i + 1 != times.size())) return;
    out.v.times.push_back(t);
    out.v.fields.push_back(v);
    if (sampled) {
      advance(i);
      auto z = assemble_Z_at(hermite_full(cfg.n, ou.field, R), cfg.a);
      for (int j = 0; j < cfg.n; ++j) {
        out.Z.Z[std::size_t(j)].times.push_back(t);
        out.Z.Z[std::size_t(j)].fields.push_back(z[std::size_t(j)]);
      }
    }
  };
  auto res = integrate_mild(x, times, F, cfg, opt);
  out.exploded = res.exploded;
  if (!sampled && stride == 1) {
    Nonlinearity F0 = [&](std::size_t, const SpectralField& v, SpectralField& o) {
      hermite_F(v, SpectralField(ms), 0.0, cfg.a, o);
    };
    out.ledger = energy_diagnostics(out.v, F0, cfg.n, 2);
  }
  return out;
}

}  // namespace

ExperimentReport dissipation_experiment(const ExperimentConfig& c) {
  const auto cfg = c.solver();
  auto ms = make_mode_set(cfg.cutoff);
  const auto& scales = c.list("x_scales");
  ExperimentReport rep;
  auto& csv = rep.table("dissipation", {"case", "x_scale", "time", "v_l2_squared", "stderr"});
  const std::string anchor = "a priori bound, independent of the initial condition";
  const std::string slope_anchor = "coming down from infinity: ||v_t||_2^2 decays like 1/t";
  const double t_end = cfg.horizon;

  auto slope_of = [&](const std::vector<double>& t, const std::vector<double>& f) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] >= 0.01 && t[i] <= t_end && f[i] > 0) {
        lx.push_back(std::log(t[i]));
        ly.push_back(std::log(f[i]));
      }
    return lx.size() >= 3 ? fit_line(lx, ly).slope : std::nan("");
  };

  for (bool sampled : {false, true}) {
    const std::string tag = sampled ? "sampled" : "zero";
    // zero diagrams are deterministic; sampled ones share noise paths across the initial scales
    const std::size_t paths = sampled ? c.replicas() : 1;
    std::vector<std::string> labels;
    for (double s : scales) labels.push_back("x=" + label(s));

    std::vector<std::vector<DissipationRun>> runs(scales.size(), std::vector<DissipationRun>(paths));
    parallel_for(scales.size() * paths, [&](std::size_t job) {
      const std::size_t k = job / paths, r = job % paths;
      const NoiseStream ns{c.seed(), r, 1.0};
      // only path 0 keeps v and Z for the a priori fit
      runs[k][r] = dissipation_run(cfg, SpectralField::constant(ms, scales[k]), sampled, ns,
                                   sampled ? (r == 0 ? 8 : std::size_t(-1)) : 1);
    });

    bool exploded = false;
    for (auto& rk : runs)
      for (auto& r : rk) exploded = exploded || r.exploded;
    rep.explosion = rep.explosion || exploded;
    if (exploded) {
      rep.check(tag + ".no_explosion", 1, false, anchor, "no path explodes");
      continue;
    }

    // mean of ||v||_2^2 over paths, per x
    const auto& times = runs[0][0].times;
    std::vector<std::vector<double>> mean(scales.size());
    double lo = INFINITY, hi = 0;
    for (std::size_t k = 0; k < scales.size(); ++k) {
      std::vector<RunningStats> st(times.size());
      for (const auto& r : runs[k])
        for (std::size_t i = 0; i < times.size(); ++i) st[i].add(r.l2[i]);
      for (std::size_t i = 0; i < times.size(); ++i) mean[k].push_back(st[i].mean);
      for (std::size_t i = 0; i < times.size(); i += std::max<std::size_t>(1, times.size() / 200))
        csv.add({tag, fmt(scales[k]), fmt(times[i]), fmt(st[i].mean), fmt(st[i].stderr_mean())});
      const double end = mean[k].back();
      lo = std::min(lo, end);
      hi = std::max(hi, end);
      rep.info(tag + ".v_end_l2sq[" + labels[k] + "]", end, anchor, paths > 1 ? st.back().stderr_mean() : std::nan(""));
    }
    rep.check(tag + ".v_end_ratio", hi / lo, hi / lo < 2, anchor, "max/min < 2 across initial scales");

    // decay slope of the largest scale: fit on the path mean, spread from per-path fits
    const double slope = slope_of(times, mean.back());
    RunningStats per_path;
    if (paths > 1)
      for (const auto& r : runs.back()) per_path.add(slope_of(times, r.l2));
    rep.check(tag + ".decay_slope", slope, slope >= -1.25 && slope <= -0.75, slope_anchor, "within [-1.25, -0.75]",
              paths > 1 ? per_path.stderr_mean() : std::nan(""));
    if (paths > 1) rep.info(tag + ".per_path_slope_sd", std::sqrt(per_path.variance()), slope_anchor);

    if (!sampled) {
      const auto& zr = runs.back()[0];
      // f' <= -2 f^2 for f = ||v||_2^2 when the diagrams vanish
      std::size_t viol = 0;
      for (const auto& rk : runs)
        for (std::size_t i = 1; i < rk[0].times.size(); ++i)
          if (rk[0].l2[i] > comparison_bound(rk[0].l2[0], 2, 2, 0, rk[0].times[i]).with_initial * (1 + 1e-9)) ++viol;
      rep.check("zero.comparison_violations", double(viol), viol == 0, "comparison test for f' <= -c f^lambda",
                "0 violations");
      // residual relative to the size of the terms in the identity
      double worst = 0;
      for (const auto& rec : zr.ledger.records)
        if (std::isfinite(rec.identity_residual) && rec.time >= 0.01)
          worst = std::max(worst, std::abs(rec.identity_residual) / (rec.K + rec.lp + rec.L));
      rep.info("zero.energy_identity_rel_residual", worst, "L^p energy identity along the flow");
      rep.tables.push_back(zr.ledger.csv("zero_energy_ledger"));
    }

    std::vector<Trajectory> vf;
    std::vector<ZVector> zf;
    for (auto& rk : runs) {
      vf.push_back(rk[0].v);
      zf.push_back(rk[0].Z);
    }
    if (vf.size() >= 2) {
      auto ap = apriori_check(vf, labels, zf, cfg.n, 2, cfg.reg.alpha, cfg.reg.alpha_prime, 0.01, t_end);
      rep.merge(ap, tag + ".");
    }
  }
  return rep;
}

// --- kernel bounds -------------------------------------------------------------------

ExperimentReport kernel_bounds_experiment(const ExperimentConfig& c) {
  const auto windows = ints_of(c.list("windows"));
  if (windows.size() < 2) throw ConfigError("kernel-bounds needs two windows");
  const int smallest = int(*std::min_element(windows.begin(), windows.end()));
  if (smallest < 8) throw ConfigError("kernel windows must be >= 8");
  const int sample_r = smallest / 2;
  const int tail_N = smallest / 4;
  std::vector<Mode> samples, inner;
  for (int a = -sample_r; a <= sample_r; ++a)
    for (int b = -sample_r; b <= sample_r; ++b) {
      const double r2 = double(a) * a + double(b) * b;
      if (r2 <= double(sample_r) * sample_r) samples.push_back({a, b});
      if (r2 < double(tail_N) * tail_N) inner.push_back({a, b});
    }

  // the truncated sum plus its integral tail estimate, fitted as one quantity
  auto completed = [](KernelConvolution k) {
    for (std::size_t i = 0; i < k.tail.size(); ++i) {
      k.result.table[i] += k.tail[i];
      k.tail[i] = 0;
    }
    return k;
  };

  struct Case {
    std::string id, anchor;
    std::function<KernelBoundFit(int)> fit;
  };
  std::vector<Case> cases{
      {"conv(0.9,0.8)", "convolution of power kernels decays with the summed exponent minus one",
       [&](int W) {
         auto k = completed(kernel_convolve(Kernel::power_law(W, 0.9), Kernel::power_law(W, 0.8)));
         return verify_kernel_bound(k, 0.9, 0.8, samples);
       }},
      {"conv(1,1)", "borderline convolution picks up a logarithm",
       [&](int W) {
         auto k = completed(kernel_convolve(Kernel::power_law(W, 1), Kernel::power_law(W, 1)));
         return verify_kernel_bound(k, 1, 1, samples);
       }},
      {"tail(0.9,0.8)", "high-frequency part of the convolution is small uniformly on low modes",
       [&](int W) {
         auto k = completed(kernel_convolve(Kernel::power_law(W, 0.9), Kernel::power_law(W, 0.8), ConvRange::outer,
                                            tail_N));
         return verify_tail_bound(k, 0.9, 0.8, tail_N, inner);
       }},
      {"3fold(0.9)", "iterated convolution of n kernels",
       [&](int W) { return verify_nfold_bound(completed(self_convolve(Kernel::power_law(W, 0.9), 3)), 0.9, 3, samples); }},
  };

  ExperimentReport rep;
  auto& csv = rep.table("kernel_bounds", {"case", "window", "constant"});
  for (const auto& cs : cases) {
    std::vector<double> consts;
    for (double W : windows) {
      const double C = cs.fit(int(W)).constant;
      consts.push_back(C);
      csv.add({cs.id, fmt(W), fmt(C)});
      rep.info(cs.id + ".constant[W=" + label(W) + "]", C, cs.anchor);
    }
    const double lo = *std::min_element(consts.begin(), consts.end());
    const double hi = *std::max_element(consts.begin(), consts.end());
    const double rel = (hi - lo) / lo;
    rep.check(cs.id + ".window_drift", rel, std::isfinite(rel) && rel < 0.1, cs.anchor,
              "relative difference < 10% between windows");
  }
  return rep;
}

// --- dispatch ------------------------------------------------------------------------

namespace {

ExperimentReport dispatch(const ExperimentConfig& c) {
  const std::string& e = c.experiment;
  const auto cfg = c.solver();
  auto ms = make_mode_set(cfg.cutoff);

  RunSpec run;
  run.cfg = cfg;
  run.replicas = c.replicas();
  run.seed = c.seed();
  run.x = SpectralField(ms);
  run.dictionary = observable_dictionary(ms);

  if (e == "wick-covariance") return wick_covariance_experiment(c);
  if (e == "restart-consistency") return restart_experiment(c);
  if (e == "dissipation") return dissipation_experiment(c);
  if (e == "kernel-bounds") return kernel_bounds_experiment(c);
  if (e == "moments") {
    std::vector<SpectralField> xs;
    std::vector<std::string> labels;
    for (double s : c.list("x_scales")) {
      xs.push_back(SpectralField::constant(ms, s));
      labels.push_back("x=" + label(s));
    }
    return moment_survey(xs, labels, c.list("times"), int(c.integer("p")), run);
  }
  if (e == "linearization")
    return linearization_experiment(cfg, std::size_t(c.integer("directions")), c.seed());
  if (e == "bel") {
    BelSpec b;
    b.run = run;
    b.phi = Observable{"sin(e0)", Observable::G::sin, SpectralField::constant(ms, 1)};
    b.h = SpectralField::constant(ms, 1);
    b.t = c.num("t");
    b.cutoff.r = c.num("r");
    return bel_report(b, c.list("r_sensitivity"));
  }
  if (e == "tv") {
    TvSpec t;
    t.run = run;
    t.t = c.num("t");
    t.distances = c.list("distances");
    t.r_values = c.list("r_values");
    return tv_experiment(t);
  }
  if (e == "gibbs-compare") {
    EquilibriumSpec q;
    q.cfg = cfg;
    q.dyn_replicas = c.replicas();
    q.burn_in_time = c.num("burn_in_time");
    q.run_time = c.num("run_time");
    q.sample_every = c.num("sample_every");
    q.chains = std::size_t(c.integer("chains"));
    q.negative_control_shift = c.num("negative_control_shift");
    q.seed = c.seed();
    q.alpha = cfg.reg.alpha;
    q.gibbs.cutoff = cfg.cutoff;
    q.gibbs.a = cfg.a;
    q.gibbs.chain_length = std::size_t(c.integer("chain_length"));
    q.gibbs.burn_in = q.gibbs.chain_length / 10;
    return equilibrium_compare(q);
  }
  if (e == "mixing") {
    MixingSpec m;
    m.run = run;
    m.x = SpectralField(ms);
    m.y = SpectralField::constant(ms, c.num("y_scale"));
    m.times = c.list("times");
    return mixing_experiment(m);
  }
  if (e == "control") return control_experiment(cfg, renorm_constant(*ms));
  if (e == "support-probe") {
    ProbeSpec p;
    p.m_range.clear();
    for (double m : ints_of(c.list("m_range"))) p.m_range.push_back(int(m));
    p.renorm_targets = c.list("renorm_targets");
    p.lambda = c.num("lambda");
    p.alpha = c.num("probe_alpha");
    p.replicas = c.replicas();
    p.seed = c.seed();
    return support_probe(p);
  }
  if (e == "besov-suite") return inequality_suite(int(c.integer("samples")), c.seed(), cfg.cutoff);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  try {
    rep = dispatch(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    rep = ExperimentReport{};
    rep.aborted = true;
    rep.check("aborted", 1, false, "run completed", "no abort").note = ex.what();
  }
  rep.experiment = c.experiment;
  rep.seed = c.seed();
  rep.config_hash = c.hash();
  rep.config_echo = c.echo();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace sqe
