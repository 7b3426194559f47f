#include <doctest.h>

#include <cmath>

#include "sqe/dynamics.hpp"
#include "sqe/parallel.hpp"
#include "sqe/stats.hpp"

using namespace sqe;

namespace {

RunSpec small_run(double cutoff, double horizon) {
  RunSpec s;
  s.cfg.cutoff = cutoff;
  s.cfg.horizon = horizon;
  s.x = SpectralField(make_mode_set(cutoff));
  s.seed = 12;
  return s;
}

}  // namespace

TEST_CASE("no noise and zero start stays at zero") {
  auto s = small_run(4, 0.2);
  s.noise_scale = 0;
  auto p = simulate_replica(s, 0, make_time_grid(s.cfg));
  REQUIRE(!p.exploded);
  double worst = 0;
  for (auto& f : p.X.fields) worst = std::max(worst, f.max_abs());
  CHECK(worst == 0.0);
}

TEST_CASE("replicas are deterministic and distinct") {
  auto s = small_run(4, 0.1);
  auto times = make_time_grid(s.cfg);
  auto a = simulate_replica(s, 3, times), b = simulate_replica(s, 3, times), c = simulate_replica(s, 4, times);
  CHECK(max_abs_diff(a.final.X, b.final.X) == 0.0);
  CHECK(max_abs_diff(a.final.X, c.final.X) > 0.0);
  CHECK(a.final.X.hermitian_defect() < 1e-12);
}

TEST_CASE("linear model zero-mode variance") {
  // n = 1, a = (0, 1): the zero mode is an OU process with rate 2
  auto s = small_run(1, 0.5);
  s.cfg.n = 1;
  s.cfg.a = {0, 1};
  s.replicas = 4000;
  auto times = make_time_grid(s.cfg);
  std::vector<double> c(s.replicas);
  parallel_for(s.replicas, [&](std::size_t r) { c[r] = simulate_replica(s, r, times, {}, false).final.X.at({0, 0}).real(); });
  RunningStats sq, m;
  for (double x : c) {
    sq.add(x * x);
    m.add(x);
  }
  const double var = (1 - std::exp(-4 * 0.5)) / 4;
  CHECK(std::abs(sq.mean - var) < 4 * sq.stderr_mean());
  CHECK(std::abs(m.mean) < 4 * m.stderr_mean());
}

TEST_CASE("observables and derivatives") {
  auto ms = make_mode_set(3);
  auto dict = observable_dictionary(ms);
  CHECK(dict.size() == 9);
  auto X = SpectralField::constant(ms, 0.3) + SpectralField::cosine(ms, {1, 0}, 0.2);
  auto Y = SpectralField::cosine(ms, {0, 1}, 0.7) + SpectralField::constant(ms, -0.4);
  for (auto& o : dict) {
    CHECK(std::abs(o.value(X)) <= 1.0);
    const double eps = 1e-6;
    const double fd = (o.value(X + eps * Y) - o.value(X - eps * Y)) / (2 * eps);
    CHECK(o.derivative(X, Y) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("restart binomial identity") {
  auto ms = make_mode_set(4);
  for (std::uint64_t r = 0; r < 3; ++r) CHECK(restart_identity_error(ms, 3, 0.3, 0.2, 1e-2, NoiseStream{7, r}) < 1e-9);
}

TEST_CASE("restart with zero lag is trivially consistent") {
  auto s = small_run(4, 0.2);
  s.cfg.dt = 1e-2;
  auto m = markov_consistency(SpectralField::cosine(make_mode_set(4), {1, 0}), 0.1, 0.0, s);
  CHECK(m.sup_error < 1e-12);
}

TEST_CASE("markov consistency at a coarse step") {
  auto s = small_run(4, 0.4);
  s.cfg.dt = 1e-2;
  auto m = markov_consistency(SpectralField::cosine(make_mode_set(4), {1, 0}), 0.2, 0.2, s);
  CHECK(!m.exploded);
  CHECK(m.compared > 0);
  CHECK(m.sup_error < 1e-8);
}

TEST_CASE("restarted diagrams start from zero") {
  auto s = small_run(4, 0.2);
  s.cfg.dt = 1e-2;
  auto times = make_time_grid(s.cfg);
  auto p = simulate_replica(s, 0, times);
  std::vector<double> later;
  for (double t : times) later.push_back(p.final.time + t);
  auto d = restart_diagrams(p.final, later, s.stream(0), 3);
  CHECK(d.at(0)[0].max_abs() == 0.0);
  CHECK(d.at(1)[0].max_abs() > 0.0);
}
