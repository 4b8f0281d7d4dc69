#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>

#include "depctl/error.hpp"
#include "depctl/experiments.hpp"
#include "depctl/order.hpp"

using namespace depctl;

namespace {

IncrementLaw uniform_on(std::vector<double> pts) {
  std::vector<double> p(pts.size(), 1.0 / pts.size());
  return IncrementLaw::pmf(std::move(pts), std::move(p));
}

struct Pmf {
  std::vector<double> x, p;
};

Pmf random_pmf(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> n(2, 5);
  std::uniform_int_distribution<int> v(-6, 6);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<double> xs;
  const int m = n(gen);
  while (static_cast<int>(xs.size()) < m) {
    const double c = v(gen);
    if (std::find(xs.begin(), xs.end(), c) == xs.end()) xs.push_back(c);
  }
  std::sort(xs.begin(), xs.end());
  std::vector<double> ps;
  double t = 0.0;
  for (int i = 0; i < m; ++i) {
    ps.push_back(w(gen));
    t += ps.back();
  }
  for (auto& q : ps) q /= t;
  return {xs, ps};
}

// Mean-preserving spread: each atom x splits into x -/+ s with equal mass.
Pmf spread(const Pmf& a, double s) {
  std::map<double, double> m;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    m[a.x[i] - s] += a.p[i] / 2;
    m[a.x[i] + s] += a.p[i] / 2;
  }
  Pmf out;
  for (auto [x, p] : m) {
    out.x.push_back(x);
    out.p.push_back(p);
  }
  return out;
}

IncrementLaw law(const Pmf& a) { return a.x.size() == 1 ? IncrementLaw::constant(a.x[0]) : IncrementLaw::pmf(a.x, a.p); }

double expect(const Pmf& a, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) s += a.p[i] * f(a.x[i]);
  return s;
}

// Largest E[phi(X)] - E[phi(Y)] over random convex phi (max of affine pieces
// plus the linear functions +-x that encode the mean condition).
double brute_force_violation(const Pmf& x, const Pmf& y, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> slope(-3.0, 3.0), icpt(-5.0, 5.0);
  double worst = std::max(expect(x, [](double t) { return t; }) - expect(y, [](double t) { return t; }),
                          expect(y, [](double t) { return t; }) - expect(x, [](double t) { return t; }));
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::pair<double, double>> pieces(1 + k % 4);
    for (auto& pc : pieces) pc = {slope(gen), icpt(gen)};
    auto phi = [&](double t) {
      double m = -1e300;
      for (auto [a, b] : pieces) m = std::max(m, a * t + b);
      return m;
    };
    worst = std::max(worst, expect(x, phi) - expect(y, phi));
  }
  return worst;
}

}  // namespace

TEST(ConvexOrder, HandExamples) {
  const auto point = IncrementLaw::constant(2.0);
  const auto u13 = uniform_on({1.0, 3.0});
  const auto u04 = uniform_on({0.0, 4.0});
  EXPECT_TRUE(convex_order_leq(point, u13).holds);
  EXPECT_FALSE(convex_order_leq(u13, point).holds);
  EXPECT_TRUE(convex_order_leq(u13, u04).holds);
  const ConvexOrderResult shifted = convex_order_leq(point, uniform_on({2.0, 4.0}));
  EXPECT_FALSE(shifted.means_equal);
  EXPECT_FALSE(shifted.holds);
  EXPECT_THROW(convex_order_leq(IncrementLaw::rayleigh(1.0, 1.0), point), InvalidArgument);
}

TEST(ConvexOrder, PointMassAtMeanIsMinimal) {
  std::mt19937_64 gen(51);
  for (int k = 0; k < 100; ++k) {
    const Pmf y = random_pmf(gen);
    const double mean = expect(y, [](double t) { return t; });
    EXPECT_TRUE(convex_order_leq(IncrementLaw::constant(mean), law(y)).holds);
  }
}

TEST(ConvexOrder, AgreesWithBruteForce) {
  std::mt19937_64 gen(52);
  int holds = 0, refuted = 0;
  for (int k = 0; k < 200; ++k) {
    const Pmf x = random_pmf(gen);
    const Pmf y = k % 2 == 0 ? spread(x, 1.0 + k % 3) : random_pmf(gen);
    const ConvexOrderResult r = convex_order_leq(law(x), law(y));
    const double violation = brute_force_violation(x, y, gen);
    if (r.holds) {
      ++holds;
      EXPECT_LE(violation, 1e-9) << k;  // no false "holds"
    }
    if (violation > 1e-9) {
      ++refuted;
      EXPECT_FALSE(r.holds) << k;
    }
  }
  EXPECT_GE(holds, 90);
  EXPECT_GE(refuted, 50);
}

TEST(Supermodular, ComonotoneAndCountermonotone) {
  std::mt19937_64 gen(53);
  std::exponential_distribution<double> e(1.0);
  const int n = 20000;
  Eigen::MatrixXd indep(n, 2), como(n, 2), counter(n, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < n; ++r) {
    indep(r, 0) = e(gen);
    indep(r, 1) = e(gen);
    const double v = u(gen);
    como(r, 0) = como(r, 1) = -std::log1p(-v);
    const double w = u(gen);
    counter(r, 0) = -std::log1p(-w);
    counter(r, 1) = -std::log(w);
  }
  EXPECT_EQ(supermodular_battery(indep, como).verdict, Verdict::Holds);
  EXPECT_EQ(supermodular_battery(counter, indep).verdict, Verdict::Holds);
  EXPECT_EQ(supermodular_battery(como, indep).verdict, Verdict::Fails);
  const OrderReport same = supermodular_battery(indep.topRows(10000), indep.bottomRows(10000));
  EXPECT_NE(same.verdict, Verdict::Holds);
}

TEST(Supermodular, MarginalMismatchIsInconclusive) {
  std::mt19937_64 gen(54);
  std::exponential_distribution<double> e(1.0);
  Eigen::MatrixXd x(5000, 2), y(5000, 2);
  for (int r = 0; r < 5000; ++r) {
    x(r, 0) = e(gen);
    x(r, 1) = e(gen);
    y(r, 0) = y(r, 1) = 2.0 * e(gen);
  }
  const OrderReport rep = supermodular_battery(x, y);
  EXPECT_FALSE(rep.marginals_match);
  EXPECT_EQ(rep.verdict, Verdict::Inconclusive);
}

TEST(Supermodular, DimensionMismatch) {
  EXPECT_THROW(supermodular_battery(Eigen::MatrixXd::Ones(10, 2), Eigen::MatrixXd::Ones(10, 3)), DimensionMismatch);
}

TEST(OrderingExperiment, RandomMultiplexingHolds) {
  ExperimentSpec spec;
  spec.name = "random-multiplexing";
  spec.battery_samples = 20000;
  spec.seed = 3;
  const ExperimentReport rep = ordering_experiment(spec);
  EXPECT_TRUE(rep.ordered);
  EXPECT_FALSE(rep.batteries.empty());
}

TEST(OrderingExperiment, Validation) {
  ExperimentSpec spec;
  spec.name = "no-such-experiment";
  EXPECT_THROW(ordering_experiment(spec), UnknownExperiment);
  spec.name = "arrival-vs-constant";
  spec.replications = 10;
  EXPECT_THROW(ordering_experiment(spec), InvalidArgument);
  EXPECT_EQ(experiment_names().size(), 5u);
}
