#include <doctest.h>

#include <cmath>
#include <random>

#include "sqe/inequality_suite.hpp"
#include "sqe/spectral.hpp"

using namespace sqe;

TEST_CASE("mode set sizes for small cutoffs") {
  CHECK(make_mode_set(1)->size() == 1);
  CHECK(make_mode_set(2)->size() == 9);
  // |m| < 3: 25 lattice points
  CHECK(make_mode_set(3)->size() == 25);
  CHECK(make_mode_set(2) == make_mode_set(2));
}

TEST_CASE("mode set negation and representatives") {
  auto ms = make_mode_set(5);
  const auto& M = *ms;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const auto j = M.neg_index(i);
    CHECK(M[j].m1 == -M[i].m1);
    CHECK(M[j].m2 == -M[i].m2);
  }
  CHECK(M.representatives().size() * 2 + 1 == M.size());
  CHECK(M[M.zero_index()] == Mode{0, 0});
  CHECK(M.max_component() == 4);
}

TEST_CASE("heat semigroup factors") {
  auto ms = make_mode_set(3);
  auto f = SpectralField::basis(ms, {1, 0});
  auto g = heat_semigroup(f, 0.1);
  CHECK(g.at({1, 0}).real() == doctest::Approx(std::exp(-0.1 * (1 + 4 * kPi * kPi))).epsilon(1e-14));
  CHECK(g.at({1, 0}).real() == doctest::Approx(0.017475).epsilon(1e-4));
  auto c = heat_semigroup(SpectralField::constant(ms, 1), 1.0);
  CHECK(c.at({0, 0}).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  // semigroup property
  std::mt19937_64 rng(3);
  auto r = random_polynomial(ms, rng);
  CHECK(max_abs_diff(heat_semigroup(heat_semigroup(r, 0.2), 0.3), heat_semigroup(r, 0.5)) < 1e-15);
}

TEST_CASE("characters multiply by adding frequencies") {
  // fields are real, so e_(1,0) e_(0,1) = e_(1,1) is read off the product of the two cosines
  auto ms = make_mode_set(2);
  auto p = multiply(SpectralField::cosine(ms, {1, 0}), SpectralField::cosine(ms, {0, 1}), ms);
  for (Mode m : {Mode{1, 1}, Mode{1, -1}, Mode{-1, 1}, Mode{-1, -1}}) CHECK(std::abs(p.at(m) - cplx(1, 0)) < 1e-14);
  double others = 0;
  for (std::size_t i = 0; i < ms->size(); ++i)
    if (std::abs((*ms)[i].m1) + std::abs((*ms)[i].m2) != 2) others = std::max(others, std::abs(p[i]));
  CHECK(others < 1e-14);
}

TEST_CASE("cube of a cosine matches a brute-force convolution") {
  auto ms = make_mode_set(2);
  auto f = SpectralField::cosine(ms, {1, 0});
  auto p = dealiased_product({f, f, f}, 2.0);
  // (e1 + e-1)^3 = e3 + 3 e1 + 3 e-1 + e-3, truncated to |m| < 2
  SpectralField brute(ms);
  for (std::size_t i = 0; i < ms->size(); ++i)
    for (std::size_t j = 0; j < ms->size(); ++j)
      for (std::size_t k = 0; k < ms->size(); ++k) {
        Mode m{(*ms)[i].m1 + (*ms)[j].m1 + (*ms)[k].m1, (*ms)[i].m2 + (*ms)[j].m2 + (*ms)[k].m2};
        if (auto idx = ms->index_of(m)) brute[*idx] += f[i] * f[j] * f[k];
      }
  CHECK(max_abs_diff(p, brute) < 1e-13);
  CHECK(std::abs(p.at({1, 0}) - cplx(3, 0)) < 1e-13);
  auto q = multiply({&f, &f, &f}, ms);
  CHECK(max_abs_diff(p, q) < 1e-13);
}

TEST_CASE("full-band product keeps every mode") {
  auto ms = make_mode_set(3);
  std::mt19937_64 rng(11);
  auto f = random_polynomial(ms, rng);
  auto g = random_polynomial(ms, rng);
  auto p = multiply_full(f, g);
  CHECK(p.modes().cutoff() == doctest::Approx(6));
  // real-space check at the grid points of a fine grid
  const int N = 32;
  auto gf = to_grid(f, N), gg = to_grid(g, N), gp = to_grid(p, N);
  double err = 0;
  for (std::size_t i = 0; i < gp.size(); ++i) err = std::max(err, std::abs(gp[i] - gf[i] * gg[i]));
  CHECK(err < 1e-10);
  CHECK(p.hermitian_defect() < 1e-12);
}

TEST_CASE("grid round trip and parseval") {
  auto ms = make_mode_set(6);
  std::mt19937_64 rng(5);
  auto f = random_polynomial(ms, rng);
  const int N = grid_above(2 * ms->max_component());
  auto g = to_grid(f, N);
  auto back = from_grid(g, N, ms);
  CHECK(max_abs_diff(f, back) < 1e-12 * std::max(1.0, f.max_abs()));
  double l2 = 0;
  for (double x : g) l2 += x * x;
  l2 /= double(g.size());
  CHECK(l2 == doctest::Approx(f.inner(f)).epsilon(1e-12));
}

TEST_CASE("projection and arithmetic") {
  auto big = make_mode_set(5), small = make_mode_set(2);
  std::mt19937_64 rng(2);
  auto f = random_polynomial(big, rng);
  auto p = f.project(small).project(big);
  for (std::size_t i = 0; i < big->size(); ++i) {
    if (small->contains((*big)[i]))
      CHECK(p[i] == f[i]);
    else
      CHECK(p[i] == cplx(0, 0));
  }
  auto h = 2.0 * f - f - f;
  CHECK(h.max_abs() == 0.0);
}

TEST_CASE("phi1 factors") {
  auto ms = make_mode_set(3);
  auto p = phi1_factors(*ms, 1e-3);
  const auto& ev = ms->eigenvalues();
  for (std::size_t i = 0; i < ms->size(); ++i) CHECK(p[i] == doctest::Approx((1 - std::exp(-ev[i] * 1e-3)) / ev[i]));
}
