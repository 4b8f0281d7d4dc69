// Small statistical helpers used by the simulation reports.
#pragma once

#include <vector>

#include "depctl/sim.hpp"

namespace depctl::stats {

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, t-test with n - 2 degrees of freedom
  long n = 0;
};

Correlation lag_correlation(const std::vector<double>& series, long lag = 1);
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

struct MeanEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  long n = 0;
};

MeanEstimate mean_estimate(const std::vector<double>& values);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// Least-squares line through (level, log p_hat) over the estimates with at
// least min_hits exceedances.
SlopeFit log_tail_slope(const std::vector<TailEstimate>& estimates, long min_hits = kMinHits);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic distribution.
KsResult ks_two_sample(std::vector<double> x, std::vector<double> y);

}  // namespace depctl::stats
