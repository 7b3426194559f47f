#include "sqe/besov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace sqe {

double smoothstep7(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  double x2 = x * x, x4 = x2 * x2;
  return x4 * (35 - 84 * x + 70 * x2 - 20 * x2 * x);
}

double smoothstep7_deriv(double x) {
  if (x <= 0 || x >= 1) return 0;
  double x2 = x * x, x3 = x2 * x;
  return x3 * (140 - 420 * x + 420 * x2 - 140 * x3);
}

double dyadic_theta(double rho) {
  if (rho <= 1.0) return 1.0;
  if (rho >= 4.0 / 3.0) return 0.0;
  return 1.0 - smoothstep7(3.0 * (rho - 1.0));
}

DyadicPartition::DyadicPartition(int max_level) : K_(max_level) {
  if (max_level < 0) throw SpectralError("max_level must be >= 0");
}

DyadicPartition DyadicPartition::covering(double cutoff) {
  int K = 0;
  while (std::ldexp(1.0, K) < cutoff) ++K;
  return DyadicPartition(K);
}

double DyadicPartition::raw_weight(int kappa, double r) const {
  if (kappa == -1) return dyadic_theta(r);
  return dyadic_theta(r / std::ldexp(1.0, kappa + 1)) - dyadic_theta(r / std::ldexp(1.0, kappa));
}

double DyadicPartition::weight(int kappa, Mode m) const {
  if (kappa < -1 || kappa > K_) return 0.0;
  double r = std::sqrt(norm2(m));
  double s = 0;
  for (int k = -1; k <= K_; ++k) s += raw_weight(k, r);
  if (s <= 0) return 0.0;
  return raw_weight(kappa, r) / s;
}

const std::vector<std::vector<double>>& DyadicPartition::weights_for(const ModeSet& ms) const {
  static std::mutex mu;
  static std::map<std::pair<double, int>, std::vector<std::vector<double>>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(ms.cutoff(), K_);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::vector<double>> w(K_ + 2, std::vector<double>(ms.size(), 0.0));
  for (std::size_t i = 0; i < ms.size(); ++i) {
    double r = std::sqrt(norm2(ms[i]));
    double s = 0;
    for (int k = -1; k <= K_; ++k) s += raw_weight(k, r);
    if (s <= 0) throw SpectralError("mode outside the dyadic partition coverage");
    for (int k = -1; k <= K_; ++k) w[k + 1][i] = raw_weight(k, r) / s;
  }
  return cache.emplace(key, std::move(w)).first->second;
}

SpectralField lp_block(const SpectralField& f, int kappa, const DyadicPartition& part) {
  if (kappa < -1 || kappa > part.max_level()) throw SpectralError("block index outside the partition");
  const auto& w = part.weights_for(f.modes())[kappa + 1];
  SpectralField b = f;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] *= w[i];
  return b;
}

double lp_norm_grid(const std::vector<double>& g, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (double x : g) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0;
  if (p == 2.0) {
    for (double x : g) s += x * x;
  } else if (p == 1.0) {
    for (double x : g) s += std::abs(x);
  } else {
    for (double x : g) s += std::pow(std::abs(x), p);
  }
  return std::pow(s / double(g.size()), 1.0 / p);
}

static int norm_grid(const ModeSet& ms, NormOptions opt) { return grid_above(2 * opt.pad * ms.max_component()); }

double lp_norm(const SpectralField& f, double p, NormOptions opt) {
  return lp_norm_grid(to_grid(f, norm_grid(f.modes(), opt)), p);
}

std::vector<double> block_norms(const SpectralField& f, double p, const DyadicPartition& part, NormOptions opt) {
  const auto& W = part.weights_for(f.modes());
  const int N = norm_grid(f.modes(), opt);
  std::vector<double> out(part.max_level() + 2, 0.0);
  SpectralField b = f;
  std::vector<double> g;
  for (int k = -1; k <= part.max_level(); ++k) {
    const auto& w = W[k + 1];
    bool any = false;
    for (std::size_t i = 0; i < b.size(); ++i) {
      b[i] = f[i] * w[i];
      any = any || (w[i] != 0.0 && f[i] != cplx{});
    }
    if (!any) continue;
    to_grid(b, N, g);
    out[k + 1] = lp_norm_grid(g, p);
  }
  return out;
}

double besov_norm(const SpectralField& f, BesovIndex idx, const DyadicPartition& part, NormOptions opt) {
  auto bn = block_norms(f, idx.p, part, opt);
  double acc = 0;
  for (int k = -1; k <= part.max_level(); ++k) {
    double a = std::pow(2.0, idx.alpha * k) * bn[k + 1];
    if (std::isinf(idx.q))
      acc = std::max(acc, a);
    else
      acc += std::pow(a, idx.q);
  }
  return std::isinf(idx.q) ? acc : std::pow(acc, 1.0 / idx.q);
}

double holder_norm(const SpectralField& f, double alpha, NormOptions opt) {
  return besov_norm(f, {alpha, kInf, kInf}, DyadicPartition::covering(f.modes().cutoff()), opt);
}

double weighted_value(const std::vector<SpectralField>& Z_at_t, double t, const WeightedNormSpec& spec,
                      NormOptions opt) {
  double v = 0;
  for (std::size_t k = 0; k < Z_at_t.size(); ++k) {
    double w = k == 0 ? 1.0 : std::pow(t, double(k) * spec.alpha_prime);
    if (w == 0.0) continue;
    v = std::max(v, w * holder_norm(Z_at_t[k], -spec.alpha, opt));
  }
  return v;
}

double weighted_diagram_norm(const std::vector<Trajectory>& Z, const WeightedNormSpec& spec, NormOptions opt) {
  if (Z.empty() || Z[0].size() == 0) throw SpectralError("empty diagram trajectory");
  for (auto& z : Z)
    if (z.times != Z[0].times) throw SpectralError("diagram trajectories must share a time grid");
  double v = 0;
  std::vector<SpectralField> at_t(Z.size());
  for (std::size_t i = 0; i < Z[0].size(); ++i) {
    double t = Z[0].times[i];
    if (t > spec.horizon + 1e-12) break;
    for (std::size_t k = 0; k < Z.size(); ++k) at_t[k] = Z[k].fields[i];
    v = std::max(v, weighted_value(at_t, t, spec, opt));
  }
  return v;
}

BonyParts bony_decompose(const SpectralField& f, const SpectralField& g, const DyadicPartition& part) {
  auto out = make_mode_set(f.modes().cutoff() + g.modes().cutoff());
  const int N = product_grid(f.modes().max_component() + g.modes().max_component(), out->max_component());
  const int K = part.max_level();
  auto blocks = [&](const SpectralField& h) {
    std::vector<std::vector<double>> b;
    for (int k = -1; k <= K; ++k) b.push_back(to_grid(lp_block(h, k, part), N));
    return b;
  };
  auto bf = blocks(f), bg = blocks(g);
  const std::size_t G = std::size_t(N) * N;
  std::vector<double> fg(G, 0.0), res(G, 0.0), gf(G, 0.0);
  for (int i = -1; i <= K; ++i)
    for (int k = -1; k <= K; ++k) {
      std::vector<double>* dst = nullptr;
      if (i < k - 1)
        dst = &fg;
      else if (k < i - 1)
        dst = &gf;
      else
        dst = &res;
      const auto& a = bf[i + 1];
      const auto& b = bg[k + 1];
      for (std::size_t j = 0; j < G; ++j) (*dst)[j] += a[j] * b[j];
    }
  return {from_grid(fg, N, out), from_grid(res, N, out), from_grid(gf, N, out)};
}

}  // namespace sqe
