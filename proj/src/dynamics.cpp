#include "sqe/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "sqe/besov.hpp"
#include "sqe/parallel.hpp"
#include "sqe/stats.hpp"

namespace sqe {

// --- observables -------------------------------------------------------------------

double Observable::pairing(const SpectralField& X) const {
  double s = 0;
  const auto& ms = phi.modes();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (phi[i] == cplx(0)) continue;
    s += (X.at(ms[i]) * std::conj(phi[i])).real();
  }
  return s;
}

double Observable::value(const SpectralField& X) const {
  const double u = pairing(X);
  switch (g) {
    case G::sin: return std::sin(u);
    case G::cos: return std::cos(u);
    case G::tanh: return std::tanh(u);
  }
  return 0;
}

double Observable::derivative(const SpectralField& X, const SpectralField& Y) const {
  const double u = pairing(X), du = pairing(Y);
  switch (g) {
    case G::sin: return std::cos(u) * du;
    case G::cos: return -std::sin(u) * du;
    case G::tanh: {
      const double th = std::tanh(u);
      return (1 - th * th) * du;
    }
  }
  return 0;
}

SpectralField smooth_bump(const ModeSetPtr& ms) {
  // a Gaussian bump centred at the origin of the torus, truncated to |m| < 4
  SpectralField f(ms);
  for (std::size_t i = 0; i < ms->size(); ++i) {
    const double r2 = norm2((*ms)[i]);
    if (r2 < 16) f[i] = 0.5 * std::exp(-r2 / 2);
  }
  return f;
}

std::vector<Observable> observable_dictionary(const ModeSetPtr& ms) {
  std::vector<std::pair<std::string, SpectralField>> phis;
  phis.emplace_back("e0", SpectralField::basis(ms, {0, 0}));
  if (ms->contains({1, 0})) phis.emplace_back("cos10", SpectralField::cosine(ms, {1, 0}));
  phis.emplace_back("bump", smooth_bump(ms));
  std::vector<Observable> out;
  const std::pair<const char*, Observable::G> gs[] = {
      {"sin", Observable::G::sin}, {"cos", Observable::G::cos}, {"tanh", Observable::G::tanh}};
  for (const auto& [gname, g] : gs)
    for (const auto& [pname, phi] : phis) out.push_back({std::string(gname) + "(" + pname + ")", g, phi});
  return out;
}

// --- simulation --------------------------------------------------------------------

ReplicaPath simulate_replica(const RunSpec& spec, std::size_t replica, const std::vector<double>& times,
                             const ProcessObserver& obs, bool store) {
  const auto& cfg = spec.cfg;
  auto ms = make_mode_set(cfg.cutoff);
  const NoiseStream ns = spec.stream(replica);
  const double R = renorm_constant(*ms);

  // the OU part is advanced lazily so nothing but the current state is kept
  OUState ou = zero_ou(ms, times.front());
  std::size_t ou_i = 0;
  auto advance = [&](std::size_t i) {
    while (ou_i < i) {
      ou_step(ou, times[ou_i + 1] - times[ou_i], ns, std::int64_t(ou_i));
      ++ou_i;
    }
  };

  ReplicaPath out;
  SpectralField X(ms);
  Nonlinearity F = [&](std::size_t i, const SpectralField& v, SpectralField& o) {
    advance(i);
    hermite_F(v, ou.field, R, cfg.a, o);
  };
  SolveOptions opt;
  opt.store = false;
  opt.observer = [&](std::size_t i, double t, const SpectralField& v) {
    advance(i);
    for (std::size_t m = 0; m < X.size(); ++m) X[m] = ou.field[m] + v[m];
    if (store) {
      out.X.times.push_back(t);
      out.X.fields.push_back(X);
    }
    if (obs) obs(i, t, X);
  };
  auto res = integrate_mild(spec.x.project(ms), times, F, cfg, opt);

  out.exploded = res.exploded;
  out.explosion_time = res.explosion_time;
  out.explosion_reason = res.explosion_reason;
  auto& st = out.final;
  st.time = res.final_time;
  st.v = res.final;
  if (!res.exploded) {
    advance(times.size() - 1);
    st.ou = ou;
    st.X = ou.field + st.v;
    st.next_step = std::int64_t(times.size() - 1);
  }
  return out;
}

std::vector<ReplicaPath> simulate(const RunSpec& spec, bool store) {
  check_config(spec.cfg);
  const auto times = make_time_grid(spec.cfg);
  std::vector<ReplicaPath> out(spec.replicas);
  parallel_for(spec.replicas, [&](std::size_t r) { out[r] = simulate_replica(spec, r, times, {}, store); });
  return out;
}

// --- restart -----------------------------------------------------------------------

DiagramSet restart_diagrams(const ProcessState& st, const std::vector<double>& times, const NoiseStream& ns, int n) {
  if (times.empty() || std::abs(times.front() - st.time) > 1e-12 * std::max(1.0, st.time))
    throw std::invalid_argument("restart_diagrams: grid must start at the state's time");
  auto ms = st.ou.field.mode_set();
  auto ou = ou_path(zero_ou(ms, st.time), times, ns, st.next_step);
  return wick_trajectory(ou, n, renorm_constant(*ms), DiagramOrigin::zero_start, st.time);
}

double restart_identity_error(const ModeSetPtr& ms, int n, double t, double h, double dt, const NoiseStream& ns) {
  const auto times = make_time_grid(t + h, dt);
  const auto kt = std::size_t(std::llround(t / dt));
  const double R = renorm_constant(*ms);
  auto ou = ou_path(zero_ou(ms, 0), times, ns, 0);
  auto direct = hermite_full(n, ou.fields.back(), R);

  std::vector<double> tail(times.begin() + std::ptrdiff_t(kt), times.end());
  auto fresh = ou_path(zero_ou(ms, times[kt]), tail, ns, std::int64_t(kt));
  auto restarted = hermite_full(n, fresh.fields.back(), R);
  auto rebuilt = translate_diagrams(restarted, heat_semigroup(ou.fields[kt], times.back() - times[kt]));

  double err = 0;
  for (int k = 0; k < n; ++k) err = std::max(err, max_abs_diff(rebuilt[k], direct[k]));
  return err;
}

MarkovResult markov_consistency(const SpectralField& x, double t, double h, const RunSpec& spec,
                                std::size_t replica) {
  const auto& cfg = spec.cfg;
  check_config(cfg);
  MarkovResult out;
  if (h == 0) return out;
  auto ms = make_mode_set(cfg.cutoff);
  const NoiseStream ns = spec.stream(replica);
  const double R = renorm_constant(*ms);
  const auto times = make_time_grid(t + h, cfg.dt);
  const auto kt = std::size_t(std::llround(t / cfg.dt));
  if (std::abs(times[kt] - t) > 1e-9 * std::max(1.0, t))
    throw std::invalid_argument("markov_consistency: t must be a grid time");

  // direct: diagrams from 0, solve on [0, t+h]
  auto ou = ou_path(zero_ou(ms, 0), times, ns, 0);
  auto Zd = assemble_Z(wick_trajectory(ou, cfg.n, R, DiagramOrigin::zero_start, 0), cfg.a);
  auto direct = solve_remainder(x.project(ms), Zd, cfg);
  if (direct.exploded) {
    out.exploded = true;
    return out;
  }

  // restarted: stop at t, rebuild diagrams from t with the same keys, continue from X(t)
  ProcessState st;
  st.time = times[kt];
  st.ou.field = ou.fields[kt];
  st.v = direct.v.fields[kt];
  st.X = st.ou.field + st.v;
  st.next_step = std::int64_t(kt);
  std::vector<double> tail(times.begin() + std::ptrdiff_t(kt), times.end());
  auto D = restart_diagrams(st, tail, ns, cfg.n);
  auto Zr = assemble_Z(D, cfg.a);
  auto cont = solve_remainder(st.X, Zr, cfg);
  if (cont.exploded) {
    out.exploded = true;
    return out;
  }

  for (std::size_t j = 0; j < tail.size(); ++j) {
    auto Xd = ou.fields[kt + j] + direct.v.fields[kt + j];
    auto Xr = D.diagrams[0].fields[j] + cont.v.fields[j];
    out.sup_error = std::max(out.sup_error, max_abs_diff(Xd, Xr));
    ++out.compared;
  }
  return out;
}

// --- moments ------------------------------------------------------------------------

ExperimentReport moment_survey(const std::vector<SpectralField>& x_family, const std::vector<std::string>& labels,
                               const std::vector<double>& times, int p, const RunSpec& spec) {
  const auto& cfg = spec.cfg;
  check_config(cfg);
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) || times.front() <= 0)
    throw std::invalid_argument("moment_survey: times must be positive and increasing");
  if (spec.replicas == 0) throw ConfigError("replicas must be >= 1");

  // graded start: the initial data may be huge
  // graded start (the initial data may be huge), with the observation times merged in
  auto grid = make_time_grid(times.back(), cfg.dt, true, cfg.dt0, cfg.grade);
  for (double t : times) {
    auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-12);
    if (it == grid.end() || std::abs(*it - t) > 1e-12) grid.insert(it, t);
  }
  std::vector<std::size_t> obs_idx;
  for (double t : times)
    obs_idx.push_back(std::size_t(std::lower_bound(grid.begin(), grid.end(), t - 1e-12) - grid.begin()));

  ExperimentReport rep;
  rep.experiment = "moments";
  auto& csv = rep.table("moments", {"time", "x_id", "p", "weighted_moment", "stderr", "replicas"});
  const double alpha = cfg.reg.alpha;
  const std::size_t nx = x_family.size(), nt = times.size();
  std::vector<std::vector<RunningStats>> acc(nx, std::vector<RunningStats>(nt));
  std::vector<std::vector<double>> late_norms(nx);  // ||X(t)|| for t >= 1, for quantiles
  bool exploded = false;

  for (std::size_t xi = 0; xi < nx; ++xi) {
    RunSpec s = spec;
    s.x = x_family[xi];
    // independent ensembles per initial condition
    s.seed = splitmix64(spec.seed ^ (0x9e3779b97f4a7c15ULL * (xi + 1)));
    std::vector<std::vector<double>> vals(spec.replicas, std::vector<double>(nt, NAN));
    std::vector<char> blew(spec.replicas, 0);
    parallel_for(spec.replicas, [&](std::size_t r) {
      std::size_t next = 0;
      auto obs = [&](std::size_t i, double, const SpectralField& X) {
        while (next < nt && obs_idx[next] == i) {
          vals[r][next] = std::pow(holder_norm(X, -alpha), p);
          ++next;
        }
      };
      auto path = simulate_replica(s, r, grid, obs, false);
      blew[r] = path.exploded;
    });
    for (std::size_t r = 0; r < spec.replicas; ++r) {
      if (blew[r]) {
        exploded = true;
        continue;
      }
      for (std::size_t k = 0; k < nt; ++k) {
        acc[xi][k].add(vals[r][k]);
        if (times[k] >= 1) late_norms[xi].push_back(std::pow(vals[r][k], 1.0 / p));
      }
    }
  }
  rep.explosion = exploded;

  const double expo = double(p) / double(cfg.n - 1 > 0 ? cfg.n - 1 : 1);
  std::vector<std::vector<double>> wm(nx, std::vector<double>(nt)), wse(nx, std::vector<double>(nt));
  for (std::size_t xi = 0; xi < nx; ++xi)
    for (std::size_t k = 0; k < nt; ++k) {
      const double w = std::min(1.0, std::pow(times[k], expo));
      wm[xi][k] = w * acc[xi][k].mean;
      wse[xi][k] = w * acc[xi][k].stderr_mean();
      csv.add({fmt(times[k]), labels.at(xi), std::to_string(p), fmt(wm[xi][k]), fmt(wse[xi][k]),
               std::to_string(acc[xi][k].n)});
    }

  const std::string anchor = "uniform-in-x moment bound (t^{p/(n-1)} ^ 1) E||X(t;x)||^p";
  for (std::size_t k = 0; k < nt; ++k) {
    if (times[k] < 1) continue;
    double zmax = 0;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = i + 1; j < nx; ++j) {
        const double se = std::hypot(wse[i][k], wse[j][k]);
        zmax = std::max(zmax, std::abs(wm[i][k] - wm[j][k]) / se);
      }
    rep.check("max_pairwise_z@t=" + label(times[k]), zmax, zmax < 4, anchor, "all pairwise |z| < 4");
  }

  // small times from the largest initial condition: the weighted moment stays bounded
  std::size_t big = 0;
  for (std::size_t xi = 1; xi < nx; ++xi)
    if (x_family[xi].l2_norm() > x_family[big].l2_norm()) big = xi;
  double lo = INFINITY, hi = 0;
  std::size_t n_small = 0;
  for (std::size_t k = 0; k < nt; ++k) {
    if (times[k] >= 1) continue;
    lo = std::min(lo, wm[big][k]);
    hi = std::max(hi, wm[big][k]);
    ++n_small;
  }
  if (n_small >= 2)
    rep.check("small_t_spread[" + labels.at(big) + "]", hi / lo, std::isfinite(hi / lo) && hi / lo < 10,
              "coming down from infinity, t^{p/(n-1)} scaling", "max/min of weighted moment over t < 1 below 10");

  for (std::size_t xi = 0; xi < nx; ++xi)
    if (!late_norms[xi].empty()) {
      auto v = late_norms[xi];
      std::sort(v.begin(), v.end());
      rep.info("q95_norm[" + labels.at(xi) + "]", v[std::size_t(0.95 * double(v.size() - 1))],
               "tightness: uniform quantiles of ||X(t)||_{C^-alpha}, t >= 1");
    }
  return rep;
}

}  // namespace sqe
