#include "sqe/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <stdexcept>

namespace sqe {

RunningStats stats_of(const std::vector<double>& x) {
  RunningStats s;
  for (double v : x) s.add(v);
  return s;
}

double batch_means_se(const std::vector<double>& x, std::size_t n_batches) {
  if (x.size() < 2 * n_batches) n_batches = std::max<std::size_t>(2, x.size() / 2);
  const std::size_t b = x.size() / n_batches;
  if (b == 0) return 0.0;
  RunningStats s;
  for (std::size_t k = 0; k < n_batches; ++k) {
    double m = 0;
    for (std::size_t i = k * b; i < (k + 1) * b; ++i) m += x[i];
    s.add(m / double(b));
  }
  return s.stderr_mean();
}

double integrated_autocorr_time(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return 1.0;
  double mean = 0;
  for (double v : x) mean += v;
  mean /= double(n);
  double c0 = 0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= double(n);
  if (c0 <= 0) return 1.0;
  double tau = 1.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double c = 0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - mean) * (x[i + lag] - mean);
    c /= double(n) * c0;
    tau += 2 * c;
    if (double(lag) >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0);
}

static double t_quantile(std::size_t dof, double level) {
  if (dof == 0) return HUGE_VAL;
  boost::math::students_t dist{double(dof)};
  return boost::math::quantile(boost::math::complement(dist, (1 - level) / 2));
}

double LineFit::slope_lo(double level) const { return slope - t_quantile(dof, level) * slope_se; }
double LineFit::slope_hi(double level) const { return slope + t_quantile(dof, level) * slope_se; }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t n = x.size();
  if (y.size() != n || (!w.empty() && w.size() != n)) throw std::invalid_argument("fit_line: size mismatch");
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
  auto wt = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };
  double S = 0, Sx = 0, Sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    S += wt(i);
    Sx += wt(i) * x[i];
    Sy += wt(i) * y[i];
  }
  double xm = Sx / S, ym = Sy / S;
  double Sxx = 0, Sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Sxx += wt(i) * (x[i] - xm) * (x[i] - xm);
    Sxy += wt(i) * (x[i] - xm) * (y[i] - ym);
  }
  LineFit f;
  f.slope = Sxy / Sxx;
  f.intercept = ym - f.slope * xm;
  f.dof = n - 2;
  if (!w.empty()) {
    // known variances: se from the weights, inflated by the reduced chi^2 when it exceeds 1
    double chi2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      chi2 += wt(i) * r * r;
    }
    double scale = f.dof > 0 ? std::max(1.0, chi2 / double(f.dof)) : 1.0;
    f.slope_se = std::sqrt(scale / Sxx);
    if (f.dof == 0) f.dof = 1;
  } else if (f.dof > 0) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / double(f.dof) / Sxx);
  }
  return f;
}

double median(std::vector<double> x) {
  if (x.empty()) return std::nan("");
  std::size_t k = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + k, x.end());
  double hi = x[k];
  if (x.size() % 2) return hi;
  double lo = *std::max_element(x.begin(), x.begin() + k);
  return 0.5 * (lo + hi);
}

}  // namespace sqe
