#include <doctest.h>

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>

#include "sqe/besov.hpp"
#include "sqe/inequality_suite.hpp"
#include "sqe/remainder.hpp"
#include "sqe/stats.hpp"

using namespace sqe;
namespace ode = boost::numeric::odeint;

namespace {

using State = std::array<double, 1>;

// high-accuracy adaptive solve of f' = rhs(f) from f0 over [0, T]
template <class Rhs>
double adaptive(Rhs rhs, double f0, double T) {
  State s{f0};
  auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13);
  ode::integrate_adaptive(stepper, [&](const State& x, State& dx, double) { dx[0] = rhs(x[0]); }, s, 0.0, T, 1e-4);
  return s[0];
}

ZVector zero_drive(const ModeSetPtr& ms, const std::vector<double>& times, int n) {
  ZVector Z;
  Z.n = n;
  Z.a_n = 1;
  for (int j = 0; j < n; ++j) {
    Trajectory t;
    t.times = times;
    t.fields.assign(times.size(), SpectralField(ms));
    Z.Z.push_back(std::move(t));
  }
  return Z;
}

SolverConfig cubic(double cutoff) {
  SolverConfig c;
  c.cutoff = cutoff;
  return c;
}

}  // namespace

TEST_CASE("nonlinearity at a constant with vanishing gaussian part") {
  auto ms = make_mode_set(4);
  const double R = renorm_constant(*ms);
  std::vector<SpectralField> d{SpectralField(ms), SpectralField::constant(ms, -R), SpectralField(ms)};
  auto Z = assemble_Z_at(d, {0, 0, 0, 1});
  auto F = nonlinearity_F(SpectralField::constant(ms, 1.0), Z, 1.0);
  CHECK(F.at({0, 0}).real() == doctest::Approx(1 - 3 * R).epsilon(1e-13));
  CHECK(max_abs_diff(F, SpectralField::constant(ms, 1 - 3 * R)) < 1e-13);
}

TEST_CASE("linearised nonlinearity at constants") {
  auto ms = make_mode_set(4);
  const double R = renorm_constant(*ms);
  std::vector<SpectralField> d{SpectralField(ms), SpectralField::constant(ms, -R), SpectralField(ms)};
  for (double c : {0.0, 0.5, 2.0}) {
    auto Fp = nonlinearity_F_prime(SpectralField::constant(ms, c), d, {0, 0, 0, 1});
    CHECK(Fp.at({0, 0}).real() == doctest::Approx(3 * (c * c - R)).epsilon(1e-12));
    auto h = SpectralField::cosine(ms, {1, 0});
    auto Jh = apply_F_prime(SpectralField::constant(ms, c), d, {0, 0, 0, 1}, h);
    CHECK(max_abs_diff(Jh, 3 * (c * c - R) * h) < 1e-12);
  }
  auto lin = nonlinearity_F_prime(SpectralField::constant(ms, 0.7), {SpectralField(ms)}, {0, 1});
  CHECK(lin.at({0, 0}).real() == doctest::Approx(1.0));
}

TEST_CASE("hermite route and diagram route agree") {
  auto ms = make_mode_set(3);
  std::mt19937_64 rng(19);
  const std::vector<double> a{0.2, -0.5, 0.3, 1};
  for (int i = 0; i < 5; ++i) {
    auto v = random_polynomial(ms, rng);
    auto X1 = random_polynomial(ms, rng);
    const double R = 0.4;
    auto F1 = hermite_F(v, X1, R, a);
    auto F2 = nonlinearity_F(v, assemble_Z_at(hermite_full(3, X1, R), a), a.back());
    CHECK(max_abs_diff(F1, F2) < 1e-10 * std::max(1.0, F1.max_abs()));
  }
}

TEST_CASE("linearisation matches a finite difference of the nonlinearity") {
  auto ms = make_mode_set(3);
  std::mt19937_64 rng(23);
  const std::vector<double> a{0, 0.5, 0, 1};
  auto v = random_polynomial(ms, rng), X1 = random_polynomial(ms, rng), h = random_polynomial(ms, rng);
  const double R = 0.3, eps = 1e-6;
  auto d = hermite_full(3, X1, R);
  auto fd = (1 / (2 * eps)) * (hermite_F(v + eps * h, X1, R, a) - hermite_F(v - eps * h, X1, R, a));
  auto J = apply_F_prime(v, d, a, h);
  CHECK(max_abs_diff(fd, J) < 1e-6 * std::max(1.0, J.max_abs()));
}

double cubic_zero_mode_error(double x0, double dt) {
  auto cfg = cubic(1);
  cfg.dt = dt;
  auto times = make_time_grid(cfg);
  auto ms = make_mode_set(1);
  auto Z = zero_drive(ms, times, 3);
  auto res = solve_remainder(SpectralField::constant(ms, x0), Z, cfg);
  REQUIRE(!res.exploded);
  return std::abs(res.final.at({0, 0}).real() - adaptive([](double f) { return -f - f * f * f; }, x0, 1.0));
}

// The tolerances here are the frozen oracle values. Exponential Euler is first order with
// error constants of about 0.135 (from 1) and 1.55 (from 10) at t = 1, so at dt = 1e-3 both
// sit just above their tolerance. Kept as stated and run as a separate ctest entry.
TEST_SUITE("scheme accuracy limits") {
  TEST_CASE("zero mode follows the cubic ODE") { CHECK(cubic_zero_mode_error(1.0, 1e-3) < 1e-4); }

  TEST_CASE("large constant start ends at the cubic ODE value") {
    CHECK(cubic_zero_mode_error(10.0, 1e-3) < 1e-3);
  }
}

TEST_CASE("zero mode converges to the cubic ODE at first order") {
  for (double x0 : {1.0, 10.0}) {
    const double e1 = cubic_zero_mode_error(x0, 1e-3), e2 = cubic_zero_mode_error(x0, 5e-4),
                 e3 = cubic_zero_mode_error(x0, 2.5e-4);
    CHECK(observed_order(e1, e2, 1e-3, 5e-4) >= 0.9);
    CHECK(observed_order(e2, e3, 5e-4, 2.5e-4) >= 0.9);
  }
}

TEST_CASE("large constant start decays monotonically") {
  auto cfg = cubic(4);
  auto times = make_time_grid(cfg);
  auto ms = make_mode_set(4);
  auto Z = zero_drive(ms, times, 3);
  auto res = solve_remainder(SpectralField::constant(ms, 10.0), Z, cfg);
  REQUIRE(!res.exploded);
  bool monotone = true;
  for (std::size_t i = 1; i < res.v.size(); ++i)
    monotone = monotone && res.v.fields[i].at({0, 0}).real() <= res.v.fields[i - 1].at({0, 0}).real();
  CHECK(monotone);
  // a constant start stays constant
  CHECK(res.final.max_abs() == doctest::Approx(std::abs(res.final.at({0, 0}))));
}

TEST_CASE("linear drift gives exponential decay") {
  SolverConfig cfg;
  cfg.n = 1;
  cfg.a = {0, 1};
  cfg.cutoff = 3;
  auto times = make_time_grid(cfg);
  auto ms = make_mode_set(3);
  auto Z = zero_drive(ms, times, 1);
  auto x = SpectralField::constant(ms, 1.0) + SpectralField::cosine(ms, {1, 0});
  auto res = solve_remainder(x, Z, cfg);
  CHECK(res.final.at({0, 0}).real() == doctest::Approx(std::exp(-2.0)).epsilon(2e-3));
  const double I = 1 + 4 * kPi * kPi;
  CHECK(res.final.at({1, 0}).real() == doctest::Approx(std::exp(-(I + 1))).epsilon(5e-2));
}

TEST_CASE("explosion is detected against the threshold") {
  auto cfg = cubic(2);
  cfg.explosion_threshold = 1.0;
  auto times = make_time_grid(cfg);
  auto ms = make_mode_set(2);
  auto Z = zero_drive(ms, times, 3);
  auto res = solve_remainder(SpectralField::constant(ms, 10.0), Z, cfg);
  CHECK(res.exploded);
  CHECK(!res.explosion_reason.empty());
}

TEST_CASE("time grids") {
  auto g = make_time_grid(1.0, 1e-2);
  CHECK(g.size() == 101);
  CHECK(g.back() == 1.0);
  auto h = make_time_grid(0.5, 1e-3, true, 1e-8, 0.05);
  CHECK(h[1] == doctest::Approx(1e-8));
  CHECK(h.back() == doctest::Approx(0.5));
  bool ok = true;
  for (std::size_t i = 1; i < h.size(); ++i) ok = ok && h[i] > h[i - 1] && h[i] - h[i - 1] <= 1.5e-3 * (1 + 1e-9);
  CHECK(ok);
  // multiples of dt stay on the graded grid
  CHECK(std::find_if(h.begin(), h.end(), [](double t) { return std::abs(t - 0.1) < 1e-12; }) != h.end());
  CHECK_THROWS(make_time_grid(1.0, 0.3));
}

TEST_CASE("configuration checks") {
  SolverConfig c;
  CHECK_NOTHROW(check_config(c));
  c.n = 2;
  c.a = {0, 0, 1};
  CHECK_THROWS_AS(check_config(c), ConfigError);
  SolverConfig d;
  d.a = {0, 0, 0, -1};
  CHECK_THROWS_AS(check_config(d), ConfigError);
  SolverConfig e;
  e.reg.gamma = 0.1;
  CHECK_THROWS_WITH_AS(check_config(e), doctest::Contains("beta_gamma_cond"), ConfigError);
}

TEST_CASE("local existence time") {
  CHECK(local_existence_time(0, 1, 1) == doctest::Approx(1.0));
  CHECK(local_existence_time(1, 1, 1) == doctest::Approx(0.5));
  CHECK(local_existence_time(3, 2, 0.5) == doctest::Approx(1.0 / 64));
}

TEST_CASE("comparison bound against an adaptive ODE solve") {
  CHECK(comparison_bound(1, 2, 2, 0, 1).with_initial == doctest::Approx(0.5));
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0, 1);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const double f0 = std::exp(std::log(0.1) + U(rng) * std::log(1000.0));
    const double lambda = 1.5 + 2.5 * U(rng), c1 = 0.5 + 2.5 * U(rng), c2 = 2 * U(rng), t = 0.01 + 2 * U(rng);
    const double f = adaptive([&](double y) { return -c1 * std::pow(std::max(y, 0.0), lambda) + c2; }, f0, t);
    const auto b = comparison_bound(f0, lambda, c1, c2, t);
    if (f > b.with_initial * (1 + 1e-8)) ++violations;
    if (f > b.initial_free * (1 + 1e-8)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("energy ledger vanishes at zero and balances along a solve") {
  auto cfg = cubic(4);
  cfg.horizon = 0.2;
  auto times = make_time_grid(cfg);
  auto ms = make_mode_set(4);
  auto Z = zero_drive(ms, times, 3);
  Trajectory zero;
  zero.times = times;
  zero.fields.assign(times.size(), SpectralField(ms));
  auto L0 = energy_diagnostics(zero, z_nonlinearity(Z), 3, 2);
  for (auto& r : L0.records) {
    CHECK(r.lp == 0.0);
    CHECK(r.K == 0.0);
    CHECK(r.L == 0.0);
  }
  // the residual is a discretisation effect: it shrinks at first order with dt
  auto worst_at = [&](double dt) {
    auto c = cfg;
    c.dt = dt;
    auto tg = make_time_grid(c);
    auto Zd = zero_drive(ms, tg, 3);
    auto x = SpectralField::constant(ms, 2.0) + SpectralField::cosine(ms, {1, 1}, 0.5);
    auto res = solve_remainder(x, Zd, c);
    auto L = energy_diagnostics(res.v, z_nonlinearity(Zd), 3, 2);
    double w = 0;
    for (auto& r : L.records)
      if (std::isfinite(r.identity_residual)) w = std::max(w, std::abs(r.identity_residual) / (r.K + r.lp + r.L));
    return w;
  };
  const double w1 = worst_at(1e-3), w2 = worst_at(5e-4);
  CHECK(w1 < 0.05);
  CHECK(observed_order(w1, w2, 1e-3, 5e-4) >= 0.9);
}

TEST_CASE("holder upper bound dominates the norm") {
  auto ms = make_mode_set(8);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i) {
    auto v = random_polynomial(ms, rng);
    CHECK(holder_norm(v, 0.3) <= holder_upper_bound(v, 0.3) * (1 + 1e-12));
  }
}

TEST_CASE("young exponents") {
  auto e = apriori_exponents(3, 2, 0.05);
  CHECK(!e.empty());
  for (auto& x : e) {
    CHECK(x.gamma > 0);
    CHECK(x.gamma < 1);
    CHECK(x.p == doctest::Approx(1 / (1 - x.gamma)));
  }
  CHECK_THROWS(apriori_exponents(3, 2, 0.2));
}
