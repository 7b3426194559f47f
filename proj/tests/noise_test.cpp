#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "sqe/inequality_suite.hpp"
#include "sqe/noise.hpp"
#include "sqe/stats.hpp"

using namespace sqe;

namespace {

double value_at_origin(const SpectralField& f) {
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i].real();
  return s;
}

SpectralField on(const SpectralField& f, double cutoff) { return f.project(make_mode_set(cutoff)); }

}  // namespace

TEST_CASE("renormalisation constant for tiny cutoffs") {
  CHECK(renorm_constant(*make_mode_set(1)) == doctest::Approx(0.5).epsilon(1e-15));
  const double I1 = 1 + 4 * kPi * kPi, I2 = 1 + 8 * kPi * kPi;
  const double R2 = 0.5 + 2 / I1 + 2 / I2;
  CHECK(renorm_constant(*make_mode_set(2)) == doctest::Approx(R2).epsilon(1e-14));
  CHECK(R2 == doctest::Approx(0.574423).epsilon(1e-6));
}

TEST_CASE("noise draws are keyed and nest across mode sets") {
  NoiseStream a{42, 3};
  CHECK(a.gaussian(5, {1, 2}, 0) == a.gaussian(5, {1, 2}, 0));
  CHECK(a.gaussian(5, {1, 2}, 0) != a.gaussian(6, {1, 2}, 0));
  CHECK(a.gaussian(5, {1, 2}, 0) != a.gaussian(5, {1, 2}, 1));
  CHECK(a.gaussian(5, {1, 2}, 0) != NoiseStream{42, 4}.gaussian(5, {1, 2}, 0));
  auto small = make_mode_set(3), big = make_mode_set(6);
  SpectralField s(small), b(big);
  standard_noise(a, 7, s);
  standard_noise(a, 7, b);
  CHECK(max_abs_diff(s, b.project(small)) == 0.0);
  CHECK(b.hermitian_defect() == 0.0);
}

TEST_CASE("stationary draws are hermitian with variance 1/(2I)") {
  auto ms = make_mode_set(2);
  RunningStats c0, c10;
  for (std::uint64_t r = 0; r < 40000; ++r) {
    auto st = sample_stationary_ou(ms, NoiseStream{9, r});
    REQUIRE(st.field.hermitian_defect() == 0.0);
    c0.add(std::norm(st.field.at({0, 0})));
    c10.add(std::norm(st.field.at({1, 0})));
  }
  CHECK(std::abs(c0.mean - 0.5) < 4 * c0.stderr_mean());
  const double v10 = 1 / (2 * (1 + 4 * kPi * kPi));
  CHECK(std::abs(c10.mean - v10) < 4 * c10.stderr_mean());
}

TEST_CASE("ou step limits") {
  auto ms = make_mode_set(2);
  // tiny step: identity up to the noise amplitude sqrt(dt)
  auto st = sample_stationary_ou(ms, NoiseStream{1, 0});
  auto before = st.field;
  ou_step(st, 1e-12, NoiseStream{1, 0}, 0);
  CHECK(max_abs_diff(st.field, before) < 1e-5);
  // long step from zero: stationary law
  RunningStats c0;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    auto z = zero_ou(ms, 0);
    ou_step(z, 50, NoiseStream{2, r}, 0);
    c0.add(std::norm(z.field.at({0, 0})));
  }
  CHECK(std::abs(c0.mean - 0.5) < 4 * c0.stderr_mean());
}

TEST_CASE("ou temporal covariance") {
  auto ms = make_mode_set(2);
  const double lag = 0.1, I = 1 + 4 * kPi * kPi;
  RunningStats s0, s1;
  for (std::uint64_t r = 0; r < 40000; ++r) {
    NoiseStream ns{17, r};
    auto st = sample_stationary_ou(ms, ns);
    const cplx a0 = st.field.at({0, 0}), a1 = st.field.at({1, 0});
    ou_step(st, lag, ns, 0);
    s0.add((st.field.at({0, 0}) * std::conj(a0)).real());
    s1.add((st.field.at({1, 0}) * std::conj(a1)).real());
  }
  CHECK(std::abs(s0.mean - std::exp(-lag) / 2) < 4 * s0.stderr_mean());
  CHECK(std::abs(s1.mean - std::exp(-I * lag) / (2 * I)) < 4 * s1.stderr_mean());
}

TEST_CASE("ou path reuses the step keys") {
  auto ms = make_mode_set(3);
  NoiseStream ns{5, 1};
  std::vector<double> times{0, 0.1, 0.25, 0.3};
  auto path = ou_path(zero_ou(ms, 0), times, ns);
  auto st = zero_ou(ms, 0);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) ou_step(st, times[k + 1] - times[k], ns, std::int64_t(k));
  CHECK(max_abs_diff(st.field, path.fields.back()) == 0.0);
}

TEST_CASE("scalar hermite polynomials") {
  CHECK(hermite(4, 2.0, 1.0) == doctest::Approx(-5.0));
  for (double x : {-1.3, 0.0, 0.7, 2.5})
    for (double c : {0.0, 0.5, 1.7}) {
      CHECK(hermite(0, x, c) == 1.0);
      CHECK(hermite(1, x, c) == x);
      CHECK(hermite(2, x, c) == doctest::Approx(x * x - c));
      CHECK(hermite(3, x, c) == doctest::Approx(x * x * x - 3 * c * x));
      double h[6];
      hermite_all(5, x, c, h);
      for (int k = 0; k <= 5; ++k) CHECK(h[k] == doctest::Approx(hermite(k, x, c)));
    }
}

TEST_CASE("hermite translation identity") {
  for (double x : {-0.8, 0.3, 1.9})
    for (double y : {-1.1, 0.4})
      for (int k = 1; k <= 5; ++k) {
        double s = 0;
        for (int j = 0; j <= k; ++j) s += binomial(k, j) * std::pow(y, j) * hermite(k - j, x, 0.6);
        CHECK(s == doctest::Approx(hermite(k, x + y, 0.6)).epsilon(1e-12));
      }
}

TEST_CASE("translated diagrams equal hermite powers of the sum") {
  auto ms = make_mode_set(3);
  std::mt19937_64 rng(4);
  auto X = random_polynomial(ms, rng), w = random_polynomial(ms, rng);
  const double R = 0.8;
  auto t = translate_diagrams(hermite_full(3, X, R), w);
  auto direct = hermite_full(3, X + w, R);
  for (int k = 1; k <= 3; ++k) {
    const double c = 3.0 * k;
    CHECK(max_abs_diff(on(t[k - 1], c), on(direct[k - 1], c)) < 1e-10 * std::max(1.0, direct[k - 1].max_abs()));
  }
}

TEST_CASE("wick powers of a vanishing field") {
  auto ms = make_mode_set(4);
  const double R = renorm_constant(*ms);
  Trajectory ou;
  ou.times = {0, 0.5};
  ou.fields = {SpectralField(ms), SpectralField(ms)};
  auto d = wick_trajectory(ou, 3, R);
  for (std::size_t i = 0; i < 2; ++i) {
    auto at = d.at(i);
    CHECK(at[0].max_abs() == 0.0);
    CHECK(at[1].at({0, 0}).real() == doctest::Approx(-R));
    CHECK(max_abs_diff(at[1], SpectralField::constant(at[1].mode_set(), -R)) < 1e-14);
    CHECK(at[2].max_abs() < 1e-14);
  }
}

TEST_CASE("second wick power has pointwise variance 2 R^2") {
  auto ms = make_mode_set(2);
  const double R = renorm_constant(*ms);
  CHECK(2 * R * R == doctest::Approx(0.659923).epsilon(1e-5));
  RunningStats s;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    auto st = sample_stationary_ou(ms, NoiseStream{33, r});
    auto h = hermite_full(2, st.field, R);
    const double v = value_at_origin(h[1]);
    s.add(v * v);
  }
  CHECK(std::abs(s.mean - 2 * R * R) < 4 * s.stderr_mean());
}

TEST_CASE("analytic wick covariance") {
  auto ms = make_mode_set(3);
  auto c1 = analytic_wick_covariance(1, 0.2, 0.2, ms);
  for (std::size_t i = 0; i < ms->size(); ++i)
    CHECK(c1.at((*ms)[i]).real() == doctest::Approx(1 / (2 * ms->eigenvalues()[i])).epsilon(1e-14));
  auto s2 = make_mode_set(2);
  const double R = renorm_constant(*s2);
  CHECK(value_at_origin(analytic_wick_covariance(2, 0, 0, s2)) == doctest::Approx(2 * R * R).epsilon(1e-12));
  CHECK(value_at_origin(analytic_wick_covariance(3, 0, 0, s2)) == doctest::Approx(6 * R * R * R).epsilon(1e-12));
  // time decorrelation of the first order
  auto lagged = analytic_wick_covariance(1, 0, 0.1, ms);
  CHECK(lagged.at({0, 0}).real() == doctest::Approx(std::exp(-0.1) / 2).epsilon(1e-14));
  CHECK(pair_covariance(c1, SpectralField::constant(ms, 1)) == doctest::Approx(0.5));
}

TEST_CASE("driving vector for the cubic") {
  auto ms = make_mode_set(3);
  std::mt19937_64 rng(8);
  std::vector<SpectralField> d{random_polynomial(ms, rng), random_polynomial(ms, rng), random_polynomial(ms, rng)};
  auto Z = assemble_Z_at(d, {0, 0, 0, 1});
  REQUIRE(Z.size() == 3);
  const double c = 9;
  CHECK(max_abs_diff(on(Z[0], c), on(d[2], c)) < 1e-14);
  CHECK(max_abs_diff(on(Z[1], c), on(3.0 * d[1], c)) < 1e-14);
  CHECK(max_abs_diff(on(Z[2], c), on(3.0 * d[0], c)) < 1e-14);
  // linear in the coefficients
  std::vector<double> a{1, 2, 0, 1}, b{0, -1, 3, 2}, ab{1, 1, 3, 3};
  auto Za = assemble_Z_at(d, a), Zb = assemble_Z_at(d, b), Zab = assemble_Z_at(d, ab);
  for (int j = 0; j < 3; ++j) CHECK(max_abs_diff(on(Za[j] + Zb[j], c), on(Zab[j], c)) < 1e-12);
}

TEST_CASE("coefficient checks") {
  CHECK_THROWS(check_coefficients({0, 0, 1}));
  CHECK_THROWS(check_coefficients({0, 0, 0, -1}));
  CHECK_THROWS(check_coefficients({1}));
  CHECK_NOTHROW(check_coefficients({0, 1}));
}

TEST_CASE("snapshot round trip and csv export") {
  auto ms = make_mode_set(3);
  auto ou = ou_path(sample_stationary_ou(ms, NoiseStream{3, 0}), {0, 0.1, 0.2}, NoiseStream{3, 0});
  auto d = wick_trajectory(ou, 3, renorm_constant(*ms));
  auto path = std::filesystem::temp_directory_path() / "sqe_snapshot_test.bin";
  write_snapshot(d, path);
  auto back = read_snapshot(path);
  std::filesystem::remove(path);
  CHECK(back.n == 3);
  CHECK(back.renorm == d.renorm);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.times()[i] == d.times()[i]);
    for (int k = 0; k < 3; ++k) CHECK(max_abs_diff(back.diagrams[k].fields[i], d.diagrams[k].fields[i]) == 0.0);
  }
  auto csv = diagrams_csv(d);
  CHECK(csv.rfind("time,k,m1,m2,re,im", 0) == 0);
}
