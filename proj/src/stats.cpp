#include "depctl/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

#include "depctl/error.hpp"

namespace depctl::stats {

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw LengthMismatch("pearson: series differ in length");
  Correlation c;
  c.n = static_cast<long>(x.size());
  if (c.n < 3) return c;
  const double n = static_cast<double>(c.n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(c.r) == 1.0) {
    c.p_value = 0.0;
    return c;
  }
  const double df = n - 2.0;
  const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
  const boost::math::students_t dist(df);
  c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return c;
}

Correlation lag_correlation(const std::vector<double>& series, long lag) {
  if (lag < 1) throw InvalidArgument("lag_correlation: lag must be positive");
  if (static_cast<long>(series.size()) <= lag) return {};
  const auto l = static_cast<std::size_t>(lag);
  std::vector<double> head(series.begin(), series.end() - static_cast<std::ptrdiff_t>(l));
  std::vector<double> tail(series.begin() + static_cast<std::ptrdiff_t>(l), series.end());
  return pearson(head, tail);
}

MeanEstimate mean_estimate(const std::vector<double>& values) {
  MeanEstimate m;
  m.n = static_cast<long>(values.size());
  if (m.n == 0) return m;
  const double n = static_cast<double>(m.n);
  for (double v : values) m.mean += v;
  m.mean /= n;
  if (m.n < 2) return m;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std_err = std::sqrt(ss / (n - 1.0) / n);
  return m;
}

SlopeFit log_tail_slope(const std::vector<TailEstimate>& estimates, long min_hits) {
  std::vector<double> xs, ys;
  for (const auto& e : estimates) {
    if (e.hits >= min_hits && e.p_hat > 0.0) {
      xs.push_back(e.level);
      ys.push_back(std::log(e.p_hat));
    }
  }
  SlopeFit fit;
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 2) throw NumericError("log_tail_slope: fewer than two levels with enough exceedances");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw NumericError("log_tail_slope: levels are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

KsResult ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  KsResult r;
  r.statistic = d;
  const double ne = nx * ny / (nx + ny);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  // Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
  if (lambda < 1e-3) {
    r.p_value = 1.0;
    return r;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  r.p_value = std::clamp(2.0 * sum, 0.0, 1.0);
  return r;
}

}  // namespace depctl::stats
