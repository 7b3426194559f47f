#include "sqe/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sqe/besov.hpp"
#include "sqe/parallel.hpp"
#include "sqe/stats.hpp"

namespace sqe {

double GibbsSpec::renorm_value() const { return renorm >= 0 ? renorm : renorm_constant(*make_mode_set(cutoff)); }

double gibbs_log_density(const SpectralField& X, const GibbsSpec& spec) {
  const auto& ms = X.modes();
  const auto& ev = ms.eigenvalues();
  double gauss = 0;
  for (std::size_t i = 0; i < X.size(); ++i) gauss -= ev[i] * std::norm(X[i]);

  const int n = int(spec.a.size()) - 1;
  const double R = spec.renorm_value();
  // the integral of a degree n+1 polynomial of X is exact once N > (n+1) max|m|
  const int N = grid_above((n + 1) * ms.max_component());
  auto g = to_grid(X, N);
  std::vector<double> H(std::size_t(n) + 2);
  double pot = 0;
  for (double x : g) {
    hermite_all(n + 1, x, R, H.data());
    double s = 0;
    for (int k = 0; k <= n; ++k) s += spec.a[std::size_t(k)] / (k + 1) * H[std::size_t(k) + 1];
    pot += s;
  }
  pot /= double(g.size());
  return gauss - 2 * pot;
}

double metropolis_accept(double log_pi_x, double log_pi_y) {
  return log_pi_y >= log_pi_x ? 1.0 : std::exp(log_pi_y - log_pi_x);
}

namespace {

struct Coord {
  std::size_t i;
  int comp;  // 0: real part, 1: imaginary part
  double sd; // Gaussian std of this coordinate
};

std::vector<Coord> real_coordinates(const ModeSet& ms) {
  std::vector<Coord> c;
  const auto z = ms.zero_index();
  c.push_back({z, 0, std::sqrt(1 / (2 * ms.eigenvalues()[z]))});
  for (auto i : ms.representatives()) {
    const double sd = std::sqrt(1 / (4 * ms.eigenvalues()[i]));
    c.push_back({i, 0, sd});
    c.push_back({i, 1, sd});
  }
  return c;
}

void set_coord(SpectralField& f, const Coord& c, double value) {
  auto& z = f[c.i];
  z = c.comp == 0 ? cplx(value, z.imag()) : cplx(z.real(), value);
  if (c.i != f.modes().zero_index()) f[f.modes().neg_index(c.i)] = std::conj(z);
}

double get_coord(const SpectralField& f, const Coord& c) { return c.comp == 0 ? f[c.i].real() : f[c.i].imag(); }

}  // namespace

ChainResult metropolis_sample(const GibbsSpec& spec, std::uint64_t seed, const SpectralField* start) {
  check_coefficients(spec.a);
  auto ms = make_mode_set(spec.cutoff);
  const auto coords = real_coordinates(*ms);
  std::seed_seq sq{std::uint32_t(seed), std::uint32_t(seed >> 32), 0x6d68u};
  std::mt19937_64 rng(sq);
  std::normal_distribution<double> G(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  SpectralField x(ms);
  if (start) {
    x = start->project(ms);
  } else {
    for (auto& c : coords) set_coord(x, c, c.sd * G(rng));  // free-field draw
  }
  const double step = spec.step_scale / std::sqrt(double(coords.size()));
  double lp = gibbs_log_density(x, spec);
  SpectralField y = x;
  std::size_t accepted = 0;
  ChainResult out;
  const std::size_t thin = std::max<std::size_t>(1, spec.thin);
  for (std::size_t it = 0; it < spec.burn_in + spec.chain_length; ++it) {
    for (auto& c : coords) set_coord(y, c, get_coord(x, c) + step * c.sd * G(rng));
    const double lq = gibbs_log_density(y, spec);
    if (U(rng) < metropolis_accept(lp, lq)) {
      x = y;
      lp = lq;
      if (it >= spec.burn_in) ++accepted;
    } else {
      y = x;
    }
    if (it >= spec.burn_in && (it - spec.burn_in) % thin == 0) out.samples.push_back(x);
  }
  out.acceptance = spec.chain_length ? double(accepted) / double(spec.chain_length) : 0;
  if (out.acceptance < 0.1)
    out.warning = "acceptance " + fmt(out.acceptance) + " below 0.1: lower step_scale";
  else if (out.acceptance > 0.7)
    out.warning = "acceptance " + fmt(out.acceptance) + " above 0.7: raise step_scale";
  return out;
}

std::vector<EquilibriumObservable> equilibrium_observables() {
  return {
      {"X_e0_squared", [](const SpectralField& X, double) { return std::norm(X.at({0, 0})); }},
      {"holder_norm", [](const SpectralField& X, double alpha) { return holder_norm(X, -alpha); }},
  };
}

SeriesSummary summarize_series(const std::vector<std::vector<double>>& series) {
  SeriesSummary s;
  double total = 0, var = 0, tau_w = 0;
  for (auto& x : series) s.n += x.size();
  if (s.n == 0) return s;
  for (auto& x : series) {
    if (x.empty()) continue;
    const double w = double(x.size()) / double(s.n);
    for (double v : x) total += v;
    const double se = batch_means_se(x, 20);
    var += w * w * se * se;
    tau_w += w * integrated_autocorr_time(x);
  }
  s.mean = total / double(s.n);
  s.se = std::sqrt(var);
  s.tau = tau_w;
  return s;
}

ExperimentReport equilibrium_compare(const EquilibriumSpec& spec) {
  const auto obs = equilibrium_observables();
  const std::size_t no = obs.size();
  SolverConfig cfg = spec.cfg;
  cfg.cutoff = spec.gibbs.cutoff;
  cfg.a = spec.gibbs.a;
  cfg.n = int(cfg.a.size()) - 1;
  cfg.horizon = spec.burn_in_time + spec.run_time;
  check_config(cfg);
  auto ms = make_mode_set(cfg.cutoff);
  if (std::abs(spec.gibbs.renorm_value() - renorm_constant(*ms)) > 1e-12)
    throw ConfigError("equilibrium_compare: the Gibbs renormalization must match the dynamics cutoff");

  ExperimentReport rep;
  rep.experiment = "gibbs-compare";

  // long dynamics runs, sampled on a fixed stride after burn-in
  const auto grid = make_time_grid(cfg.horizon, cfg.dt);
  const auto stride = std::max<std::size_t>(1, std::size_t(std::llround(spec.sample_every / cfg.dt)));
  const auto first = std::size_t(std::llround(spec.burn_in_time / cfg.dt));
  std::vector<std::vector<std::vector<double>>> dyn(no, std::vector<std::vector<double>>(spec.dyn_replicas));
  std::vector<char> blew(spec.dyn_replicas, 0);
  RunSpec run;
  run.cfg = cfg;
  run.x = SpectralField(ms);
  run.seed = spec.seed;
  parallel_for(spec.dyn_replicas, [&](std::size_t r) {
    auto cb = [&](std::size_t i, double, const SpectralField& X) {
      if (i < first || (i - first) % stride) return;
      for (std::size_t o = 0; o < no; ++o) dyn[o][r].push_back(obs[o].eval(X, spec.alpha));
    };
    blew[r] = simulate_replica(run, r, grid, cb, false).exploded;
  });
  rep.explosion = std::any_of(blew.begin(), blew.end(), [](char b) { return b != 0; });

  auto run_chains = [&](const GibbsSpec& g, std::uint64_t salt, std::vector<double>* acc_out) {
    std::vector<ChainResult> chains(spec.chains);
    parallel_for(spec.chains, [&](std::size_t c) { chains[c] = metropolis_sample(g, splitmix64(spec.seed ^ salt) + c); });
    std::vector<std::vector<std::vector<double>>> s(no, std::vector<std::vector<double>>(spec.chains));
    for (std::size_t c = 0; c < spec.chains; ++c) {
      for (auto& X : chains[c].samples)
        for (std::size_t o = 0; o < no; ++o) s[o][c].push_back(obs[o].eval(X, spec.alpha));
      if (acc_out) acc_out->push_back(chains[c].acceptance);
      if (!chains[c].warning.empty()) rep.notes.push_back("chain " + std::to_string(c) + ": " + chains[c].warning);
    }
    return std::make_pair(std::move(s), std::move(chains));
  };
  std::vector<double> acc;
  auto [gib, chains] = run_chains(spec.gibbs, 0x61bb5ULL, &acc);
  GibbsSpec wrong = spec.gibbs;
  wrong.renorm = spec.gibbs.renorm_value() + spec.negative_control_shift;
  auto neg = run_chains(wrong, 0x2e6c7ULL, nullptr).first;

  auto& csv = rep.table("gibbs", {"sample_id", "observable", "value"});
  // the pooled ensemble is large; the CSV keeps the first chain
  for (std::size_t k = 0; k < chains.front().samples.size(); ++k)
    for (std::size_t o = 0; o < no; ++o) csv.add({std::to_string(k), obs[o].name, fmt(gib[o][0][k])});

  rep.info("metropolis_acceptance", stats_of(acc).mean, "random-walk Metropolis on the Gibbs density");
  const std::string anchor = "Gibbs measure is invariant for the dynamics";
  double zneg = 0;
  for (std::size_t o = 0; o < no; ++o) {
    auto d = summarize_series(dyn[o]), g = summarize_series(gib[o]), w = summarize_series(neg[o]);
    rep.info("dynamics." + obs[o].name, d.mean, anchor, d.se).note = "tau " + fmt(d.tau) + ", n " + std::to_string(d.n);
    rep.info("gibbs." + obs[o].name, g.mean, anchor, g.se).note = "tau " + fmt(g.tau) + ", n " + std::to_string(g.n);
    rep.info("effective_samples.dynamics." + obs[o].name, double(d.n) / d.tau, anchor);
    rep.info("effective_samples.gibbs." + obs[o].name, double(g.n) / g.tau, anchor);
    const double z = std::abs(d.mean - g.mean) / std::hypot(d.se, g.se);
    rep.check("z." + obs[o].name, z, z < 4, anchor, "|z| < 4 with batch-means errors");
    const double zn = std::abs(d.mean - w.mean) / std::hypot(d.se, w.se);
    rep.info("negative_control.z." + obs[o].name, zn, "perturbed renormalization constant");
    zneg = std::max(zneg, zn);
  }
  rep.check("negative_control.max_z", zneg, zneg > 4, "perturbed renormalization constant",
            "some |z| > 4 when R is shifted by " + fmt(spec.negative_control_shift));
  return rep;
}

// --- mixing -------------------------------------------------------------------------

ExperimentReport mixing_experiment(const MixingSpec& spec) {
  const auto& cfg = spec.run.cfg;
  check_config(cfg);
  if (spec.run.replicas == 0) throw ConfigError("replicas must be >= 1");
  auto ms = make_mode_set(cfg.cutoff);
  const auto dict = spec.run.dictionary.empty() ? observable_dictionary(ms) : spec.run.dictionary;
  const std::size_t nd = dict.size(), nt = spec.times.size();
  const auto grid = make_time_grid(spec.times.back(), cfg.dt);
  std::vector<std::size_t> idx;
  for (double t : spec.times) {
    auto k = std::size_t(std::llround(t / cfg.dt));
    if (k >= grid.size() || std::abs(grid[k] - t) > 1e-9) throw std::invalid_argument("mixing time off the grid");
    idx.push_back(k);
  }

  // common random numbers: both starting points see the same noise; the gap estimator is unbiased
  // for P_t Phi(x) - P_t Phi(y) and its variance shrinks with the coupling
  std::vector<std::vector<std::vector<double>>> diff(spec.run.replicas,
                                                     std::vector<std::vector<double>>(nt, std::vector<double>(nd)));
  std::vector<char> blew(spec.run.replicas, 0);
  parallel_for(spec.run.replicas, [&](std::size_t r) {
    std::vector<std::vector<double>> vx(nt, std::vector<double>(nd)), vy = vx;
    auto rec = [&](std::vector<std::vector<double>>& dst) {
      return [&, k = std::size_t(0)](std::size_t i, double, const SpectralField& X) mutable {
        while (k < nt && idx[k] == i) {
          for (std::size_t o = 0; o < nd; ++o) dst[k][o] = dict[o].value(X);
          ++k;
        }
      };
    };
    RunSpec sx = spec.run, sy = spec.run;
    sx.x = spec.x;
    sy.x = spec.y;
    bool e1 = simulate_replica(sx, r, grid, rec(vx), false).exploded;
    bool e2 = simulate_replica(sy, r, grid, rec(vy), false).exploded;
    blew[r] = e1 || e2;
    for (std::size_t k = 0; k < nt; ++k)
      for (std::size_t o = 0; o < nd; ++o) diff[r][k][o] = vx[k][o] - vy[k][o];
  });

  ExperimentReport rep;
  rep.experiment = "mixing";
  auto& csv = rep.table("mixing", {"t", "observable", "gap", "se"});
  std::vector<std::vector<RunningStats>> acc(nt, std::vector<RunningStats>(nd));
  for (std::size_t r = 0; r < spec.run.replicas; ++r) {
    if (blew[r]) {
      rep.explosion = true;
      continue;
    }
    for (std::size_t k = 0; k < nt; ++k)
      for (std::size_t o = 0; o < nd; ++o) acc[k][o].add(diff[r][k][o]);
  }

  // D(t) over a subset of the dictionary, with the se of the maximizing observable
  auto proxy = [&](const std::vector<std::size_t>& subset, std::vector<double>& D, std::vector<double>& se) {
    D.assign(nt, 0);
    se.assign(nt, 0);
    for (std::size_t k = 0; k < nt; ++k)
      for (auto o : subset)
        if (std::abs(acc[k][o].mean) > D[k]) {
          D[k] = std::abs(acc[k][o].mean);
          se[k] = acc[k][o].stderr_mean();
        }
  };
  auto fit_rate = [&](const std::vector<double>& D, const std::vector<double>& se) {
    std::vector<double> x, y, w;
    for (std::size_t k = 0; k < nt; ++k)
      if (D[k] > 0 && se[k] > 0) {
        x.push_back(spec.times[k]);
        y.push_back(std::log(D[k]));
        w.push_back(std::pow(D[k] / se[k], 2));  // var of log D ~ (se/D)^2
      }
    return fit_line(x, y, w);
  };

  std::vector<std::size_t> all(nd), half;
  for (std::size_t o = 0; o < nd; ++o) {
    all[o] = o;
    if (o % 2 == 0) half.push_back(o);
  }
  std::vector<double> D, se, Dh, seh;
  proxy(all, D, se);
  proxy(half, Dh, seh);
  for (std::size_t k = 0; k < nt; ++k)
    for (std::size_t o = 0; o < nd; ++o)
      csv.add({fmt(spec.times[k]), dict[o].name, fmt(std::abs(acc[k][o].mean)), fmt(acc[k][o].stderr_mean())});

  const std::string anchor = "Doeblin bound and geometric convergence";
  for (std::size_t k = 0; k < nt; ++k) rep.info("D(" + fmt(spec.times[k]) + ")", D[k], anchor, se[k]);
  bool decreasing = true;
  for (std::size_t k = 1; k < nt; ++k) decreasing = decreasing && D[k] < D[k - 1];
  rep.check("D_decreasing", decreasing ? 1 : 0, decreasing, anchor, "D strictly decreasing over the listed times");

  auto at = [&](double t) {
    for (std::size_t k = 0; k < nt; ++k)
      if (std::abs(spec.times[k] - t) < 1e-9) return D[k];
    return std::nan("");
  };
  const double d1 = at(1), d6 = at(spec.times.back());
  if (std::isfinite(d1)) {
    const double ratio = d6 / d1;
    rep.check("D_last_over_D1", ratio, ratio < 0.5, anchor, "D(t_last) < D(1) / 2");
  }
  if (nt >= 3) {
    auto f = fit_rate(D, se);
    const double rho = std::exp(f.slope), hi = std::exp(f.slope_hi(0.95));
    auto& m = rep.check("rho", rho, hi < 1, anchor, "95% interval of the fitted ratio excludes 1");
    m.note = "95% CI [" + fmt(std::exp(f.slope_lo(0.95))) + ", " + fmt(hi) + "]";
    auto fh = fit_rate(Dh, seh);
    const double rho_h = std::exp(fh.slope);
    const double rel = std::abs(rho_h - rho) / rho;
    rep.check("rho_half_dictionary_shift", rel, rel < 0.3, anchor, "fitted ratio moves < 30% on half the dictionary");
  }
  return rep;
}

}  // namespace sqe
