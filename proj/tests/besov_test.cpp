#include <doctest.h>

#include <cmath>
#include <random>

#include "sqe/besov.hpp"
#include "sqe/inequality_suite.hpp"

using namespace sqe;

TEST_CASE("smoothstep endpoints") {
  CHECK(smoothstep7(0) == 0.0);
  CHECK(smoothstep7(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(smoothstep7_deriv(0) == doctest::Approx(0.0));
  CHECK(smoothstep7_deriv(1) == doctest::Approx(0.0));
  CHECK(dyadic_theta(0.5) == 1.0);
  CHECK(dyadic_theta(1.5) == 0.0);
}

TEST_CASE("dyadic partition values and supports") {
  DyadicPartition part(5);
  CHECK(part.weight(-1, {0, 0}) == doctest::Approx(1.0));
  double s = 0;
  for (int k = -1; k <= 5; ++k) s += part.weight(k, {3, 0});
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  // block k >= 0 vanishes outside 2^k < |m| < (8/3) 2^k
  for (int k = 0; k <= 5; ++k)
    for (int a = 0; a <= 40; ++a) {
      const double r = a;
      const double lo = std::ldexp(1.0, k), hi = (8.0 / 3.0) * lo;
      if (r <= lo || r >= hi) CHECK(part.weight(k, {a, 0}) == 0.0);
    }
  CHECK(part.weight(-1, {2, 0}) == 0.0);
}

TEST_CASE("blocks sum back to the field") {
  auto ms = make_mode_set(16);
  auto part = DyadicPartition::covering(16);
  std::mt19937_64 rng(7);
  auto f = random_polynomial(ms, rng);
  SpectralField sum(ms);
  for (int k = -1; k <= part.max_level(); ++k) sum += lp_block(f, k, part);
  CHECK(max_abs_diff(sum, f) < 1e-12 * std::max(1.0, f.max_abs()));
}

TEST_CASE("holder norm of the constant one") {
  auto ms = make_mode_set(4);
  auto one = SpectralField::constant(ms, 1.0);
  for (double a : {-0.5, -0.05, 0.3, 1.0}) CHECK(holder_norm(one, a) == doctest::Approx(std::pow(2.0, -a)).epsilon(1e-12));
}

TEST_CASE("lebesgue norms of a cosine") {
  auto ms = make_mode_set(3);
  auto c = SpectralField::cosine(ms, {1, 0});  // 2 cos(2 pi x)
  CHECK(lp_norm(c, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(lp_norm(c, kInf) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lp_norm(c, 4) == doctest::Approx(std::pow(6.0, 0.25)).epsilon(1e-12));  // E(2cos)^4 = 6
}

TEST_CASE("bony pieces add up to the product") {
  auto ms = make_mode_set(8);
  auto part = DyadicPartition::covering(16);
  std::mt19937_64 rng(13);
  auto f = random_polynomial(ms, rng), g = random_polynomial(ms, rng);
  auto b = bony_decompose(f, g, part);
  auto sum = b.para_fg + b.resonant + b.para_gf;
  auto p = multiply_full(f, g);
  CHECK(max_abs_diff(sum, p) < 1e-10 * std::max(1.0, p.max_abs()));
}

TEST_CASE("low frequency times high frequency is a paraproduct") {
  auto ms = make_mode_set(16);
  auto part = DyadicPartition::covering(16);
  auto f = SpectralField::cosine(ms, {1, 0});
  auto g = SpectralField::cosine(ms, {8, 0});
  auto b = bony_decompose(f, g, part);
  CHECK(b.resonant.max_abs() < 1e-12);
  CHECK(b.para_gf.max_abs() < 1e-12);
  CHECK(std::abs(b.para_fg.at({9, 0}) - cplx(1, 0)) < 1e-12);
  CHECK(std::abs(b.para_fg.at({7, 0}) - cplx(1, 0)) < 1e-12);
}

TEST_CASE("weighted diagram value") {
  auto ms = make_mode_set(4);
  WeightedNormSpec spec;
  std::vector<SpectralField> zero(3, SpectralField(ms));
  CHECK(weighted_value(zero, 0.3, spec) == 0.0);
  std::mt19937_64 rng(1);
  std::vector<SpectralField> Z{random_polynomial(ms, rng), random_polynomial(ms, rng), random_polynomial(ms, rng)};
  const double v = weighted_value(Z, 0.3, spec);
  std::vector<SpectralField> Z3;
  for (auto& z : Z) Z3.push_back(3.0 * z);
  CHECK(weighted_value(Z3, 0.3, spec) == doctest::Approx(3 * v).epsilon(1e-12));
  // a constant first-order entry: ||c||_{C^-alpha} = c 2^alpha
  std::vector<SpectralField> c{SpectralField::constant(ms, 2.0)};
  CHECK(weighted_value(c, 0.7, spec) == doctest::Approx(2.0 * std::pow(2.0, spec.alpha)).epsilon(1e-12));
}

TEST_CASE("besov norms are monotone in regularity") {
  auto ms = make_mode_set(12);
  auto part = DyadicPartition::covering(12);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 5; ++i) {
    auto f = random_polynomial(ms, rng);
    const double lo = besov_norm(f, {-0.5, 2, 2}, part), hi = besov_norm(f, {0.5, 2, 2}, part);
    CHECK(lo <= hi * (1 + 1e-12) * 2);  // 2^{-1/2} <= 2^{1/2} on every block, up to the constant in block -1
    CHECK(besov_norm(f, {0, kInf, kInf}, part) <= besov_norm(f, {0, kInf, 1}, part) * (1 + 1e-12));
  }
}
