#include <gtest/gtest.h>

#include <cmath>

#include "depctl/bounds.hpp"
#include "depctl/error.hpp"
#include "helpers.hpp"

using namespace depctl;
using depctl::testing::random_kernel;
using depctl::testing::toy_arrival;
using depctl::testing::toy_service;

namespace {

const BoundReport& avg_at(const std::vector<BoundReport>& rows, double level) {
  for (const auto& r : rows) {
    if (r.conditioning == "avg" && r.level == level) return r;
  }
  throw std::runtime_error("no avg row");
}

// Two-state service alternating between rates hi/lo by source state; smaller
// q means a more persistent chain.
MapKernel persistent_service(double q) {
  Eigen::MatrixXd p(2, 2);
  p << 1 - q, q, q, 1 - q;
  const auto hi = IncrementLaw::pmf({2.0, 5.0}, {0.5, 0.5});
  const auto lo = IncrementLaw::pmf({0.0, 2.5}, {0.5, 0.5});
  return MapKernel({"hi", "lo"}, p, {hi, hi, lo, lo}, Eigen::Vector2d(0.5, 0.5));
}

}  // namespace

TEST(DecayRates, ToyAndConstantArrival) {
  const DecayRates r = decay_rates(toy_arrival(), toy_service());
  EXPECT_NEAR(r.delay_rate, 2.0, 1e-9);
  EXPECT_NEAR(r.backlog_rate, 2.0, 1e-9);
  const MapKernel s = depctl::testing::rayleigh_service(0.0);
  const DecayRates f = decay_rates(depctl::testing::rayleigh_arrival(), s);
  EXPECT_NEAR(f.delay_rate, 10000.0 * f.backlog_rate, 1e-12 * f.delay_rate);
}

TEST(DelayBounds, ToyMatchesHandAlgebra) {
  const std::vector<double> ds{0, 1, 2, 5};
  const auto rows = delay_bounds(toy_arrival(), toy_service(), ds);
  for (double d : ds) {
    const BoundReport& r = avg_at(rows, d);
    EXPECT_NEAR(r.lower_raw, std::exp(-2.0 - 2.0 * d), 1e-9 * std::exp(-2.0 * d));
    EXPECT_NEAR(r.upper_raw, std::exp(-2.0 * d), 1e-9 * std::exp(-2.0 * d));
    EXPECT_NEAR(r.h_plus, 1.0, 1e-12);
    EXPECT_NEAR(r.h_minus, std::exp(-2.0), 1e-9);
  }
}

TEST(BacklogBounds, ToyMatchesHandAlgebra) {
  const std::vector<double> bs{0, 0.5, 1, 3};
  const auto rows = backlog_bounds(toy_arrival(), toy_service(), bs);
  for (double b : bs) {
    const BoundReport& r = avg_at(rows, b);
    EXPECT_NEAR(r.lower_raw, std::exp(-2.0) * std::exp(-2.0 * b), 1e-9 * std::exp(-2.0 * b));
    EXPECT_NEAR(r.upper_raw, std::exp(-2.0 * b), 1e-9 * std::exp(-2.0 * b));
  }
}

TEST(Bounds, RatioLevelIndependentAndSlopesExact) {
  std::mt19937_64 gen(21);
  int checked = 0;
  for (int rep = 0; rep < 20 && checked < 6; ++rep) {
    const MapKernel a = random_kernel(gen, 2, 0.0, 2.0);
    const MapKernel s = random_kernel(gen, 3, 0.5, 4.0);
    if (mean_rate(a) >= mean_rate(s)) continue;
    ++checked;
    const StabilityRoot root = stability_root(a, s);
    const std::vector<double> levels{0, 3, 7};
    for (int kind = 0; kind < 2; ++kind) {
      const auto rows = kind == 0 ? delay_bounds(a, s, levels) : backlog_bounds(a, s, levels);
      const double rate = kind == 0 ? root.kappa_arrival : root.theta_star;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const BoundReport& r = rows[i];
        EXPECT_NEAR(r.upper_raw / r.lower_raw, r.h_plus / r.h_minus, 1e-9 * r.h_plus / r.h_minus);
        EXPECT_LE(r.lower, r.upper);
        EXPECT_GE(r.lower, 0.0);
        EXPECT_LE(r.upper, 1.0);
        EXPECT_EQ(r.upper, std::min(r.upper_raw, 1.0));
        // Same conditioning one level further: slope of log(upper) is -rate
        // for the backlog; the delay avg row also carries the arrival
        // distribution at d, which is stationary here.
        if (i + (rows.size() / levels.size()) < rows.size()) {
          const BoundReport& next = rows[i + rows.size() / levels.size()];
          ASSERT_EQ(next.conditioning, r.conditioning);
          const double slope = (std::log(next.upper_raw) - std::log(r.upper_raw)) / (next.level - r.level);
          EXPECT_NEAR(slope, -rate, 1e-9 * rate);
        }
      }
    }
  }
  EXPECT_GE(checked, 3);
}

TEST(Bounds, TwoStateChannelLabels) {
  const auto rows = delay_bounds(depctl::testing::rayleigh_arrival(), depctl::testing::rayleigh_service(-0.5), {0, 1});
  ASSERT_EQ(rows.size(), 2u * (1 * 2 + 1));
  EXPECT_EQ(rows[0].conditioning, "A:s0|S:high");
  EXPECT_EQ(rows[1].conditioning, "A:s0|S:low");
  EXPECT_EQ(rows[2].conditioning, "avg");
}

TEST(HorizonBounds, ToyDelayClosedForm) {
  const HorizonBoundReport r = horizon_delay_bound(toy_arrival(), toy_service(), 2.0, 3.0);
  EXPECT_NEAR(r.theta, 1.25, 1e-9);
  EXPECT_NEAR(r.theta_y, 3.125, 1e-9);
  EXPECT_NEAR(r.y_gamma, 0.5, 1e-9);
  EXPECT_EQ(r.branch, HorizonBranch::LongHorizonRemainder);
  EXPECT_NEAR(r.bound_raw, std::exp(-3.0 * 3.125), 1e-9 * std::exp(-3.0 * 3.125));
}

TEST(HorizonBounds, ToyBacklogClosedForm) {
  const HorizonBoundReport r = horizon_backlog_bound(toy_arrival(), toy_service(), 1.0, 1.0);
  EXPECT_NEAR(r.theta, 1.5, 1e-9);
  EXPECT_NEAR(r.theta_y, 2.25, 1e-9);
  EXPECT_NEAR(r.y_gamma, 0.5, 1e-9);
  const HorizonBoundReport at = horizon_backlog_bound(toy_arrival(), toy_service(), 0.5, 1.0);
  EXPECT_NEAR(at.theta, 2.0, 1e-9);
  EXPECT_NEAR(at.theta_y, 2.0, 1e-9);
  const HorizonBoundReport shorter = horizon_backlog_bound(toy_arrival(), toy_service(), 0.25, 1.0);
  EXPECT_EQ(shorter.branch, HorizonBranch::ShortHorizon);
}

TEST(HorizonBounds, DelayContinuityAtYGamma) {
  const MapKernel a = depctl::testing::rayleigh_arrival();
  const MapKernel s = depctl::testing::rayleigh_service(0.5);
  const StabilityRoot root = stability_root(a, s);
  const double yg = horizon_delay_bound(a, s, 2.0, 1.0).y_gamma;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double eps : {0.2, 0.05, 0.01, 0.001}) {
    const double gap = std::abs(horizon_delay_bound(a, s, yg + eps, 1.0).theta_y - root.kappa_arrival);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 1e-3 * root.kappa_arrival);
}

TEST(HorizonBounds, ThetaYIsConcaveMaximum) {
  const MapKernel a = toy_arrival();
  const MapKernel s = toy_service();
  const MapKernel ns = negate(s);
  for (double y : {1.5, 2.0, 4.0}) {
    const HorizonBoundReport r = horizon_delay_bound(a, s, y, 1.0);
    for (double t = 0.05; t < 3.0; t += 0.05) {
      EXPECT_LE(-y * cgf(ns, t) - (y - 1) * cgf(a, t), r.theta_y + 1e-9);
    }
    const HorizonBoundReport b = horizon_backlog_bound(a, s, y, 1.0);
    for (double t = 0.05; t < 3.0; t += 0.05) {
      EXPECT_LE(t - y * (cgf(a, t) + cgf(ns, t)), b.theta_y + 1e-9);
    }
  }
}

TEST(ConstantArrival, ToyMatchesGeneralBounds) {
  const std::vector<double> ds{0, 1, 4};
  const ConstantArrivalReport c = constant_arrival_bounds(1.0, toy_service(), ds);
  const auto g = delay_bounds(toy_arrival(), toy_service(), ds);
  for (double d : ds) {
    EXPECT_NEAR(avg_at(c.delay, d).upper_raw, avg_at(g, d).upper_raw, 1e-12);
    EXPECT_NEAR(avg_at(c.delay, d).lower_raw, avg_at(g, d).lower_raw, 1e-12);
    EXPECT_DOUBLE_EQ(avg_at(c.backlog, d).upper_raw, avg_at(c.delay, d).upper_raw);
  }
}

TEST(ConstantArrival, BacklogLevelIsLambdaTimesDelay) {
  const ConstantArrivalReport c = constant_arrival_bounds(10000.0, depctl::testing::rayleigh_service(-0.5), {2.0});
  ASSERT_EQ(c.delay.size(), c.backlog.size());
  for (std::size_t i = 0; i < c.delay.size(); ++i) {
    EXPECT_DOUBLE_EQ(c.backlog[i].level, 20000.0);
    EXPECT_DOUBLE_EQ(c.backlog[i].upper, c.delay[i].upper);
  }
}

TEST(ConstantArrival, Errors) {
  EXPECT_THROW(constant_arrival_bounds(10.0, toy_service(), {1.0}), UnstableQueue);
  EXPECT_THROW(constant_arrival_bounds(1.0, MapKernel::single_state(IncrementLaw::constant(2.0)), {1.0}),
               NoRootInDomain);
}

TEST(Dcc, ToyHandEvaluation) {
  const DccBound b = dcc_upper(toy_arrival(), toy_service(), 10.0, 1e-3);
  EXPECT_NEAR(b.value, 1.0 - std::log(1e-3) / 20.0, 1e-8);
  EXPECT_NEAR(b.theta, 2.0, 1e-6);
  EXPECT_NEAR(b.asymptotic_cap, 1.0, 1e-9);
}

TEST(Dcc, MonotoneInEpsilonAndLimit) {
  const MapKernel a = depctl::testing::rayleigh_arrival();
  const MapKernel s = depctl::testing::rayleigh_service(0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1e-6, 1e-4, 1e-2, 0.2}) {
    const double v = dcc_upper(a, s, 20.0, eps).value;
    EXPECT_LE(v, prev);
    prev = v;
  }
  const DccBound far = dcc_upper(a, s, 1e7, 1e-3);
  EXPECT_NEAR(far.value, cgf(a, far.theta) / far.theta, 1e-3 * far.value);
  EXPECT_GE(far.value, 0.0);
}

TEST(DccInterval, ToyFixedPointOracle) {
  const double c = -std::log(1e-2) / 20.0;
  // theta(lambda) = 3 - lambda for the toy, so each endpoint is the larger root
  // of a quadratic.
  const double lo = (3.0 + std::sqrt(9.0 - 4.0 * c)) / 2.0;
  const double hi = (3.0 + std::sqrt(9.0 - 4.0 * c * 20.0 / 21.0)) / 2.0;
  const DccInterval iv = constant_dcc_interval(toy_service(), 20.0, 1e-2, Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(iv.lambda_hi, hi, 1e-6);
  EXPECT_NEAR(iv.lambda_lo, lo, 1e-6);
  EXPECT_LE(iv.lambda_lo, iv.lambda_hi);
  // Single state: the endpoints differ only by the e^{theta lambda} factor.
  EXPECT_NEAR(iv.theta_lo * iv.lambda_lo * 20.0, -std::log(1e-2), 1e-8);
  EXPECT_NEAR(iv.theta_hi * iv.lambda_hi * 21.0, -std::log(1e-2), 1e-8);
}

TEST(DccInterval, WidensWithEigenvectorSpread) {
  double prev_gap = -1.0;
  for (double q : {0.5, 0.3, 0.15, 0.05}) {
    const MapKernel s = persistent_service(q);
    const DccInterval iv = constant_dcc_interval(s, 20.0, 1e-3, s.initial_dist());
    const double gap = std::log(iv.lambda_hi / iv.lambda_lo);
    EXPECT_GT(gap, prev_gap) << q;
    prev_gap = gap;
  }
}
