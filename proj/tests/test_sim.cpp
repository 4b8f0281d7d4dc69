#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "depctl/error.hpp"
#include "depctl/sim.hpp"
#include "depctl/stats.hpp"
#include "helpers.hpp"

using namespace depctl;
using depctl::testing::random_kernel;

namespace {

// B(t) = max_{0 <= s <= t} (A(s, t) - S(s, t)).
double sup_backlog(const std::vector<double>& a, const std::vector<double>& c, std::size_t t) {
  double best = 0.0;
  for (std::size_t s = 0; s <= t; ++s) {
    double net = 0.0;
    for (std::size_t u = s; u < t; ++u) net += a[u] - c[u];
    best = std::max(best, net);
  }
  return best;
}

}  // namespace

TEST(SamplePath, ConstantKernel) {
  const SamplePath p = sample_path(MapKernel::single_state(IncrementLaw::constant(2.5)), 100, 1);
  ASSERT_EQ(p.increments.size(), 100u);
  ASSERT_EQ(p.states.size(), 101u);
  for (double x : p.increments) EXPECT_EQ(x, 2.5);
}

TEST(SamplePath, TransitionFrequenciesAndMean) {
  std::mt19937_64 gen(41);
  const MapKernel k = random_kernel(gen, 3);
  const long horizon = 1000000;
  const SamplePath p = sample_path(k, horizon, 7);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
  for (long t = 0; t < horizon; ++t) counts(p.states[t], p.states[t + 1]) += 1.0;
  for (int i = 0; i < 3; ++i) {
    const double n = counts.row(i).sum();
    for (int j = 0; j < 3; ++j) {
      const double q = k.transition()(i, j);
      EXPECT_LE(std::abs(counts(i, j) / n - q), 3.0 * std::sqrt(q * (1 - q) / n) + 1e-12);
    }
  }
  // Batch means for the mean increment.
  std::vector<double> batches;
  for (int b = 0; b < 100; ++b) {
    double s = 0.0;
    for (long t = b * 10000L; t < (b + 1) * 10000L; ++t) s += p.increments[t];
    batches.push_back(s / 10000.0);
  }
  const stats::MeanEstimate m = stats::mean_estimate(batches);
  EXPECT_LE(std::abs(m.mean - mean_rate(k)), 3.0 * m.std_err);
}

TEST(SamplePath, Deterministic) {
  std::mt19937_64 gen(42);
  const MapKernel k = random_kernel(gen, 4);
  const SamplePath a = sample_path(k, 1000, 3, 5);
  const SamplePath b = sample_path(k, 1000, 3, 5);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.increments, b.increments);
}

TEST(Lindley, TrivialExamples) {
  const QueueTrace empty = lindley(std::vector<double>(10, 1.0), std::vector<double>(10, 2.0));
  for (double b : empty.backlog) EXPECT_EQ(b, 0.0);
  for (long d : empty.virtual_delay) EXPECT_EQ(d, 0);
  const QueueTrace grow = lindley(std::vector<double>(10, 2.0), std::vector<double>(10, 1.0));
  for (std::size_t t = 0; t <= 10; ++t) EXPECT_EQ(grow.backlog[t], double(t));
  EXPECT_THROW(lindley({1.0}, {1.0, 2.0}), LengthMismatch);
}

TEST(Lindley, MatchesSupRepresentationAndDelayDefinition) {
  std::mt19937_64 gen(43);
  std::uniform_int_distribution<int> len(1, 50);
  std::uniform_real_distribution<double> x(0.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = len(gen);
    std::vector<double> a(n), c(n);
    for (int t = 0; t < n; ++t) {
      // Integer-valued paths keep the recursion exact.
      a[t] = std::floor(x(gen));
      c[t] = std::floor(x(gen));
    }
    const QueueTrace q = lindley(a, c);
    std::vector<double> cum(n + 1, 0.0);
    for (int t = 0; t < n; ++t) cum[t + 1] = cum[t] + a[t];
    for (int t = 0; t <= n; ++t) {
      ASSERT_EQ(q.backlog[t], sup_backlog(a, c, t));
      long d = 0;
      while (d < t && cum[t - d] > cum[t] - q.backlog[t]) ++d;
      ASSERT_EQ(q.virtual_delay[t], d);
    }
  }
}

TEST(Lindley, ConstantArrivalDelayIsCeilOfBacklog) {
  std::mt19937_64 gen(44);
  std::uniform_real_distribution<double> x(0.0, 6.0);
  const double lambda = 2.0;
  std::vector<double> a(300, lambda), c(300);
  for (auto& v : c) v = std::floor(x(gen));
  const QueueTrace q = lindley(a, c);
  for (std::size_t t = 0; t <= 300; ++t) EXPECT_EQ(q.virtual_delay[t], static_cast<long>(std::ceil(q.backlog[t] / lambda)));
}

TEST(TailEstimate, StableDeterministicQueueNeverExceeds) {
  TailRequest req;
  req.backlog_levels = {0.0};
  req.delay_levels = {0.0};
  req.replications = 500;
  req.horizon = 50;
  req.seed = 1;
  const TailResult r = tail_estimate(MapKernel::single_state(IncrementLaw::constant(1.0)),
                                     MapKernel::single_state(IncrementLaw::constant(2.0)), req);
  EXPECT_EQ(r.backlog[0].hits, 0);
  EXPECT_EQ(r.delay[0].hits, 0);
  EXPECT_TRUE(r.backlog[0].inconclusive);
}

TEST(TailEstimate, MatchesLindleyOnSamePaths) {
  std::mt19937_64 gen(45);
  const MapKernel a = random_kernel(gen, 2, 0.0, 2.0);
  const MapKernel s = random_kernel(gen, 2, 0.5, 3.0);
  TailRequest req;
  req.delay_levels = {0, 1, 2, 4};
  req.backlog_levels = {0, 0.5, 1, 3};
  req.replications = 400;
  req.horizon = 60;
  req.seed = 17;
  req.threads = 1;
  const TailResult r = tail_estimate(a, s, req);
  std::vector<long> dh(4, 0), bh(4, 0);
  for (long rep = 0; rep < req.replications; ++rep) {
    const SamplePath pa = sample_path(a, req.horizon, req.seed, 2 * rep);
    const SamplePath ps = sample_path(s, req.horizon, req.seed, 2 * rep + 1);
    const QueueTrace q = lindley(pa.increments, ps.increments);
    for (int i = 0; i < 4; ++i) {
      dh[i] += q.virtual_delay.back() > req.delay_levels[i];
      bh[i] += q.backlog.back() > req.backlog_levels[i];
    }
  }
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(r.delay[i].hits, dh[i]);
    EXPECT_EQ(r.backlog[i].hits, bh[i]);
    const double p = double(bh[i]) / req.replications;
    EXPECT_DOUBLE_EQ(r.backlog[i].p_hat, p);
    EXPECT_DOUBLE_EQ(r.backlog[i].std_err, std::sqrt(p * (1 - p) / req.replications));
    EXPECT_EQ(r.backlog[i].inconclusive, bh[i] < kMinHits);
  }
}

TEST(TailEstimate, IndependentOfThreadCount) {
  TailRequest req;
  req.delay_levels = {0, 1};
  req.backlog_levels = {0, 1, 2};
  req.replications = 3000;
  req.horizon = 100;
  req.seed = 5;
  req.threads = 1;
  const auto a = depctl::testing::toy_arrival();
  const auto s = depctl::testing::toy_service();
  const TailResult one = tail_estimate(a, s, req);
  req.threads = 4;
  const TailResult four = tail_estimate(a, s, req);
  for (std::size_t i = 0; i < one.backlog.size(); ++i) EXPECT_EQ(one.backlog[i].hits, four.backlog[i].hits);
  for (std::size_t i = 0; i < one.delay.size(); ++i) EXPECT_EQ(one.delay[i].hits, four.delay[i].hits);
}

TEST(TailEstimate, ToySlopeNearMinusTwo) {
  TailRequest req;
  for (int k = 0; k <= 12; ++k) req.backlog_levels.push_back(0.25 * k);
  req.replications = 40000;
  req.horizon = 100;
  req.seed = 3;
  const TailResult r = tail_estimate(depctl::testing::toy_arrival(), depctl::testing::toy_service(), req);
  std::vector<TailEstimate> tail(r.backlog.begin() + 3, r.backlog.end());
  const stats::SlopeFit fit = stats::log_tail_slope(tail);
  EXPECT_NEAR(fit.slope, -2.0, 0.2);
}

TEST(Warmup, PositiveAndScalesWithRate) {
  const long w = warmup_slots(depctl::testing::toy_arrival(), depctl::testing::toy_service());
  EXPECT_EQ(w, 3);  // ceil(10 / (2 * 2))
}

TEST(Martingale, ThetaZeroIsExactlyOne) {
  std::mt19937_64 gen(46);
  const MartingaleResult m = martingale_check(random_kernel(gen, 3), 0.0, 20, 100, 1);
  EXPECT_EQ(m.mean, 1.0);
  EXPECT_EQ(m.std_err, 0.0);
}

TEST(Martingale, MeanOneOnRandomKernels) {
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> th(-0.6, 0.6);
  for (int rep = 0; rep < 4; ++rep) {
    const MapKernel k = random_kernel(gen, 1 + rep, -1.0, 1.0);
    const double theta = th(gen);
    const MartingaleResult m = martingale_check(k, theta, 20, 20000, 10 + rep);
    EXPECT_LE(std::abs(m.mean - 1.0), 3.0 * m.std_err + 1e-12) << theta;
  }
}

TEST(Parallel, RethrowsWorkerExceptions) {
  EXPECT_THROW(parallel_for(100, 4, [](long r) {
                 if (r == 57) throw NumericError("boom");
               }),
               NumericError);
}

TEST(Stats, PearsonAndLag) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const std::vector<double> y{2, 4, 5, 4, 5, 7};
  const stats::Correlation c = stats::pearson(x, y);
  EXPECT_NEAR(c.r, 0.8783100656536799, 1e-12);
  // Reference values from an independent statistics package.
  EXPECT_NEAR(c.p_value, 0.021311641128756765, 1e-10);
  std::vector<double> alt;
  for (int i = 0; i < 1000; ++i) alt.push_back(i % 2 ? 1.0 : -1.0);
  EXPECT_NEAR(stats::lag_correlation(alt).r, -1.0, 1e-12);
  EXPECT_THROW(stats::pearson({1, 2}, {1}), LengthMismatch);
}

TEST(Stats, LogTailSlopeExact) {
  std::vector<TailEstimate> est;
  for (int k = 0; k < 6; ++k) {
    TailEstimate e;
    e.level = k;
    e.p_hat = 0.5 * std::exp(-0.7 * k);
    e.hits = 1000;
    est.push_back(e);
  }
  est.push_back(TailEstimate{10.0, 1e-9, 0.0, 3, 1000, true});
  const stats::SlopeFit fit = stats::log_tail_slope(est);
  EXPECT_NEAR(fit.slope, -0.7, 1e-12);
  EXPECT_EQ(fit.points, 6);
  EXPECT_THROW(stats::log_tail_slope({est.back()}), NumericError);
}

TEST(Stats, KsTwoSample) {
  std::mt19937_64 gen(48);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(2000), b(2000), c(2000);
  for (auto& v : a) v = n(gen);
  for (auto& v : b) v = n(gen);
  for (auto& v : c) v = n(gen) + 0.3;
  EXPECT_GT(stats::ks_two_sample(a, b).p_value, 0.01);
  EXPECT_LT(stats::ks_two_sample(a, c).p_value, 1e-6);
  EXPECT_EQ(stats::ks_two_sample({1, 2, 3}, {1, 2, 3}).statistic, 0.0);
}
