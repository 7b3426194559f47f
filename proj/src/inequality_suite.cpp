#include "sqe/inequality_suite.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "sqe/parallel.hpp"

namespace sqe {

SpectralField random_polynomial(const ModeSetPtr& ms, std::mt19937_64& rng, double s_lo, double s_hi) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G(0.0, 1.0);
  const double s = s_lo + (s_hi - s_lo) * U(rng);
  const double amp = std::pow(10.0, 2.0 * U(rng) - 1.0);
  SpectralField f(ms);
  for (std::size_t i = 0; i < ms->size(); ++i) {
    const Mode m = (*ms)[i];
    const double w = amp * std::pow(1.0 + norm2(m), -0.5 * s);
    if (i == ms->zero_index()) {
      f[i] = w * G(rng);
    } else if (ms->is_representative(i)) {
      cplx c(G(rng), G(rng));
      f[i] = w * c / std::sqrt(2.0);
      f[ms->neg_index(i)] = std::conj(f[i]);
    }
  }
  return f;
}

namespace {

double besov(const SpectralField& f, double a, double p, double q) {
  return besov_norm(f, {a, p, q}, DyadicPartition::covering(f.modes().cutoff()));
}

std::string pq(double x) {
  if (std::isinf(x)) return "inf";
  std::ostringstream os;
  os << x;
  return os.str();
}

double conj_exp(double p) {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

// |grad f| on the grid
std::vector<double> grad_abs(const SpectralField& f, int N) {
  SpectralField d1 = f, d2 = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode m = f.modes()[i];
    d1[i] = cplx(0, 2 * kPi * m.m1) * f[i];
    d2[i] = cplx(0, 2 * kPi * m.m2) * f[i];
  }
  auto g1 = to_grid(d1, N), g2 = to_grid(d2, N);
  for (std::size_t j = 0; j < g1.size(); ++j) g1[j] = std::hypot(g1[j], g2[j]);
  return g1;
}

}  // namespace

std::vector<InequalityCase> inequality_cases(double cutoff) {
  auto ms = make_mode_set(cutoff);
  const DyadicPartition part = DyadicPartition::covering(cutoff);
  std::vector<InequalityCase> out;
  auto draw = [ms](std::mt19937_64& rng) { return random_polynomial(ms, rng); };

  for (auto [p, q] : {std::pair{kInf, kInf}, std::pair{2.0, 1.0}}) {
    const double a1 = -0.5, a2 = 0.3;
    out.push_back({"alpha_ineq[p=" + pq(p) + ",q=" + pq(q) + "]", "Besov embedding alpha_1 <= alpha_2",
                   [=](std::mt19937_64& r) {
                     auto f = draw(r);
                     return besov(f, a1, p, q) / besov(f, a2, p, q);
                   }});
  }
  for (auto [p, q1, q2] : {std::tuple{2.0, kInf, 1.0}, std::tuple{kInf, 4.0, 2.0}}) {
    out.push_back({"q_ineq[p=" + pq(p) + ",q1=" + pq(q1) + ",q2=" + pq(q2) + "]", "Besov embedding q_1 >= q_2",
                   [=](std::mt19937_64& r) {
                     auto f = draw(r);
                     return besov(f, 0.2, p, q1) / besov(f, 0.2, p, q2);
                   }});
  }
  for (auto [p1, p2] : {std::pair{1.0, 4.0}, std::pair{2.0, kInf}}) {
    out.push_back({"p_ineq[p1=" + pq(p1) + ",p2=" + pq(p2) + "]", "Besov embedding p_1 <= p_2",
                   [=](std::mt19937_64& r) {
                     auto f = draw(r);
                     return besov(f, 0.1, p1, kInf) / besov(f, 0.1, p2, kInf);
                   }});
  }
  out.push_back({"a_q_ineq[p=inf,q1=1,q2=inf]", "Besov embedding alpha_1 < alpha_2, any q", [=](std::mt19937_64& r) {
                   auto f = draw(r);
                   return besov(f, -0.2, kInf, 1.0) / besov(f, 0.3, kInf, kInf);
                 }});
  for (double p : {1.0, 2.0, 4.0, kInf}) {
    out.push_back({"Lp_emb[p=" + pq(p) + "]", "L^p bounded by B^0_{p,1}", [=](std::mt19937_64& r) {
                     auto f = draw(r);
                     return lp_norm(f, p) / besov(f, 0.0, p, 1.0);
                   }});
    out.push_back({"B0_emb[p=" + pq(p) + "]", "B^0_{p,inf} bounded by L^p", [=](std::mt19937_64& r) {
                     auto f = draw(r);
                     return besov(f, 0.0, p, kInf) / lp_norm(f, p);
                   }});
  }
  // beta = alpha + 2 (1/q - 1/p)
  for (auto [q, p, a] : {std::tuple{2.0, 4.0, -0.3}, std::tuple{1.0, kInf, -1.5}, std::tuple{2.0, kInf, -0.5}}) {
    const double b = a + 2.0 * (1.0 / q - (std::isinf(p) ? 0.0 : 1.0 / p));
    out.push_back({"besov_emb[q=" + pq(q) + ",p=" + pq(p) + "]", "Besov embedding with dimension shift",
                   [=](std::mt19937_64& r) {
                     auto f = draw(r);
                     return besov(f, a, p, kInf) / besov(f, b, q, kInf);
                   }});
  }
  for (auto [a, b, p, q] : {std::tuple{-0.3, 0.5, kInf, kInf}, std::tuple{0.0, 1.0, 2.0, 2.0}}) {
    out.push_back({"heat_smoothing[a=" + pq(a) + ",b=" + pq(b) + ",p=" + pq(p) + "]", "heat semigroup smoothing",
                   [=](std::mt19937_64& r) {
                     auto f = draw(r);
                     std::uniform_real_distribution<double> U(-3.0, 0.0);
                     const double t = std::pow(10.0, U(r));
                     return besov(pure_heat(f, t), b, p, q) / (std::pow(t, 0.5 * (a - b)) * besov(f, a, p, q));
                   }});
  }
  out.push_back({"heat_smoothing_identity", "heat semigroup smoothing, beta = alpha", [=](std::mt19937_64& r) {
                   auto f = draw(r);
                   std::uniform_real_distribution<double> U(0.0, 1.0);
                   // first third of draws sit exactly at t = 0
                   const double t = U(r) < 1.0 / 3 ? 0.0 : U(r);
                   return besov(pure_heat(f, t), -0.3, kInf, kInf) / besov(f, -0.3, kInf, kInf);
                 }});
  out.push_back({"bony_i[beta=0.5]", "Bony paraproduct, f in L^inf", [=](std::mt19937_64& r) {
                   auto f = draw(r), g = draw(r);
                   auto parts = bony_decompose(f, g, part);
                   return holder_norm(parts.para_fg, 0.5) / (lp_norm(f, kInf) * holder_norm(g, 0.5));
                 }});
  out.push_back({"bony_ii[alpha=-0.3,beta=0.5]", "Bony paraproduct, alpha < 0", [=](std::mt19937_64& r) {
                   auto f = draw(r), g = draw(r);
                   auto parts = bony_decompose(f, g, part);
                   return holder_norm(parts.para_fg, 0.2) / (holder_norm(f, -0.3) * holder_norm(g, 0.5));
                 }});
  out.push_back({"bony_iii[alpha=-0.2,beta=0.5]", "Bony resonant term, alpha + beta > 0", [=](std::mt19937_64& r) {
                   auto f = draw(r), g = draw(r);
                   auto parts = bony_decompose(f, g, part);
                   return holder_norm(parts.resonant, 0.3) / (holder_norm(f, -0.2) * holder_norm(g, 0.5));
                 }});
  out.push_back({"product[alpha=-0.2,beta=0.5]", "product of distribution and function", [=](std::mt19937_64& r) {
                   auto f = draw(r), g = draw(r);
                   return holder_norm(multiply_full(f, g), -0.2) / (holder_norm(f, -0.2) * holder_norm(g, 0.5));
                 }});
  for (auto [p, q] : {std::pair{2.0, 2.0}, std::pair{4.0, 1.0}, std::pair{kInf, kInf}, std::pair{1.0, 4.0}}) {
    const double pc = conj_exp(p), qc = conj_exp(q);
    out.push_back({"duality[p=" + pq(p) + ",q=" + pq(q) + "]", "L^2 pairing on B^a_{p,q} x B^-a_{p',q'}",
                   [=](std::mt19937_64& r) {
                     auto f = draw(r), g = draw(r);
                     return std::abs(f.inner(g)) / (besov(f, 0.3, p, q) * besov(g, -0.3, pc, qc));
                   }});
  }
  out.push_back({"gradient[alpha=0.4]", "gradient estimate for positive regularity", [=](std::mt19937_64& r) {
                   auto f = draw(r);
                   const int N = grid_above(4 * f.modes().max_component());
                   const double l1 = lp_norm_grid(to_grid(f, N), 1.0);
                   const double g1 = lp_norm_grid(grad_abs(f, N), 1.0);
                   const double a = 0.4;
                   return besov(f, a, 1.0, 1.0) / (std::pow(l1, 1 - a) * std::pow(g1, a) + l1);
                 }});
  return out;
}

InequalityFit fit_inequality(const InequalityCase& c, int n_samples, std::uint64_t seed) {
  const std::size_t n = std::size_t(n_samples);
  std::vector<double> r(2 * n);
  const auto id_hash = std::hash<std::string>{}(c.id);
  parallel_for(2 * n, [&](std::size_t i) {
    std::seed_seq ss{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(id_hash), std::uint32_t(i)};
    std::mt19937_64 rng(ss);
    r[i] = c.ratio(rng);
  });
  InequalityFit fit;
  fit.id = c.id;
  fit.finite = true;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    if (!std::isfinite(r[i])) fit.finite = false;
    if (i < n) fit.constant_n = std::max(fit.constant_n, r[i]);
    fit.constant_2n = std::max(fit.constant_2n, r[i]);
  }
  fit.drift = fit.constant_n > 0 ? (fit.constant_2n - fit.constant_n) / fit.constant_n : 0.0;
  return fit;
}

ExperimentReport inequality_suite(int n_samples, std::uint64_t seed, double cutoff) {
  if (n_samples < 1) throw std::invalid_argument("inequality_suite needs n_samples >= 1");
  ExperimentReport rep;
  rep.experiment = "besov-suite";
  rep.seed = seed;
  auto& csv = rep.table("besov_suite", {"inequality_id", "fitted_constant", "samples", "verdict"});
  for (const auto& c : inequality_cases(cutoff)) {
    auto fit = fit_inequality(c, n_samples, seed);
    const bool ok = fit.finite && fit.drift < 0.5;
    auto& m = rep.check(c.id + ".drift", fit.drift, ok, c.anchor, "finite fit, drift < 0.5 under sample doubling");
    m.note = "C_n=" + fmt(fit.constant_n) + " C_2n=" + fmt(fit.constant_2n);
    const std::string v = ok ? "pass" : "fail";
    csv.add({c.id, fmt(fit.constant_n), std::to_string(n_samples), v});
    csv.add({c.id, fmt(fit.constant_2n), std::to_string(2 * n_samples), v});
  }
  return rep;
}

}  // namespace sqe
