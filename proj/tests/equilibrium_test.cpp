#include <doctest.h>

#include <cmath>
#include <random>

#include "sqe/dynamics.hpp"
#include "sqe/equilibrium.hpp"

using namespace sqe;

TEST_CASE("gibbs density at the zero field") {
  GibbsSpec g;
  g.cutoff = 4;
  const double R = g.renorm_value();
  CHECK(R == doctest::Approx(renorm_constant(*make_mode_set(4))));
  // -2 (a_3 / 4) H_4(0, R) = -(1/2) 3 R^2
  CHECK(gibbs_log_density(SpectralField(make_mode_set(4)), g) == doctest::Approx(-1.5 * R * R).epsilon(1e-12));
}

TEST_CASE("gibbs density of the linear model is gaussian") {
  GibbsSpec g;
  g.cutoff = 3;
  g.a = {0, 1};
  auto ms = make_mode_set(3);
  const double R = g.renorm_value();
  auto X = SpectralField::constant(ms, 0.4) + SpectralField::cosine(ms, {1, 1}, 0.3) +
           SpectralField::cosine(ms, {0, 2}, -0.2);
  double expect = 0;
  for (std::size_t i = 0; i < ms->size(); ++i) expect -= ms->eigenvalues()[i] * std::norm(X[i]);
  expect -= X.inner(X) - R;
  CHECK(gibbs_log_density(X, g) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("metropolis acceptance satisfies detailed balance") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> G(0, 3);
  for (int i = 0; i < 100; ++i) {
    const double a = G(rng), b = G(rng);
    const double lhs = std::exp(a) * metropolis_accept(a, b);
    const double rhs = std::exp(b) * metropolis_accept(b, a);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs));
  }
}

TEST_CASE("metropolis reproduces the linear model variances") {
  GibbsSpec g;
  g.cutoff = 2;
  g.a = {0, 1};
  g.chain_length = 100000;
  g.burn_in = 10000;
  auto chain = metropolis_sample(g, 77);
  CHECK(chain.warning.empty());
  std::vector<double> c0, c10;
  for (auto& s : chain.samples) {
    c0.push_back(std::norm(s.at({0, 0})));
    c10.push_back(std::norm(s.at({1, 0})));
  }
  auto s0 = summarize_series({c0}), s1 = summarize_series({c10});
  const double I = 1 + 4 * kPi * kPi;
  CHECK(std::abs(s0.mean - 0.25) < 4 * s0.se);
  CHECK(std::abs(s1.mean - 1 / (2 * (I + 1))) < 4 * s1.se);
}

TEST_CASE("series summary of independent draws") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> G(1.0, 2.0);
  std::vector<std::vector<double>> series(4, std::vector<double>(5000));
  for (auto& s : series)
    for (auto& x : s) x = G(rng);
  auto sum = summarize_series(series);
  CHECK(sum.n == 20000);
  CHECK(std::abs(sum.mean - 1.0) < 4 * sum.se);
  CHECK(sum.se == doctest::Approx(2.0 / std::sqrt(20000.0)).epsilon(0.3));
  CHECK(sum.tau < 1.5);
}

TEST_CASE("mixing proxy vanishes for identical starts") {
  MixingSpec m;
  m.run.cfg.cutoff = 2;
  m.run.cfg.dt = 0.01;
  m.run.cfg.horizon = 1;
  m.run.replicas = 20;
  m.run.seed = 2;
  auto ms = make_mode_set(2);
  m.run.dictionary = observable_dictionary(ms);
  m.x = SpectralField::constant(ms, 0.7);
  m.y = m.x;
  m.times = {0.5, 1};
  auto rep = mixing_experiment(m);
  int seen = 0;
  for (auto& metric : rep.metrics)
    if (metric.name.rfind("D(", 0) == 0) {
      ++seen;
      CHECK(metric.estimate == 0.0);
    }
  CHECK(seen == 2);
}

TEST_CASE("control path endpoints and zero target") {
  SolverConfig cfg;
  cfg.cutoff = 4;
  auto ms = make_mode_set(4);
  ControlProblem p{SpectralField::constant(ms, 1.0), SpectralField::cosine(ms, {1, 0}, 0.5), 1.0, 0.0};
  CHECK(max_abs_diff(control_path(p, 0), p.x) < 1e-15);
  CHECK(max_abs_diff(control_path(p, 1), p.y) < 1e-15);
  auto r = control_to_target(p, cfg);
  CHECK(r.endpoint_error < 1e-5);
  ControlProblem z{SpectralField(ms), SpectralField(ms), 1.0, 0.0};
  auto r0 = control_to_target(z, cfg);
  double mx = 0;
  for (auto& f : r0.X.fields) mx = std::max(mx, f.max_abs());
  CHECK(mx == 0.0);
}

TEST_CASE("support probe ingredients") {
  const double lambda = 0.5;
  const int m0 = probe_m0(0.25, lambda);
  CHECK(m0 >= 1);
  CHECK(probe_C(m0 - 1, 0.25, lambda) == 0.0);
  CHECK(probe_C(m0, 0.25, lambda) > 0.0);
  CHECK(probe_C(m0 + 1, 0.25, lambda) > probe_C(m0, 0.25, lambda));
  auto ms = make_mode_set(12);
  auto f = probe_f(3, 0.8, ms);
  CHECK(f.l2_norm() == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));
  CHECK(std::abs(f.at({8, 8})) == doctest::Approx(std::sqrt(1.6) / 2));
  CHECK_THROWS(probe_f(4, 0.8, ms));
  CHECK(probe_lambda(2) == doctest::Approx(1 + 4 * kPi * kPi * 32));
}
