#include "depctl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "depctl/error.hpp"
#include "depctl/stats.hpp"

namespace depctl {

namespace {

constexpr int kRateLevels = 48;
constexpr double kFitStartFraction = 0.25;
constexpr double kReferenceArrival = 10000.0;  // bits per slot
constexpr double kManipulatedAlpha = 0.8;

struct Pmf {
  std::vector<double> support;
  std::vector<double> probs;
};

Pmf to_pmf(const IncrementLaw& law) {
  if (const auto* c = std::get_if<IncrementLaw::Constant>(&law.variant())) return {{c->value}, {1.0}};
  if (const auto* p = std::get_if<IncrementLaw::DiscretePmf>(&law.variant())) return {p->support, p->probs};
  throw InvalidArgument("product kernel: increments must have finite support");
}

IncrementLaw convolve(const IncrementLaw& a, const IncrementLaw& b) {
  const Pmf pa = to_pmf(a);
  const Pmf pb = to_pmf(b);
  std::map<double, double> mass;
  for (std::size_t i = 0; i < pa.support.size(); ++i) {
    for (std::size_t j = 0; j < pb.support.size(); ++j) mass[pa.support[i] + pb.support[j]] += pa.probs[i] * pb.probs[j];
  }
  if (mass.size() == 1) return IncrementLaw::constant(mass.begin()->first);
  std::vector<double> support, probs;
  double total = 0.0;
  for (const auto& [x, p] : mass) {
    support.push_back(x);
    probs.push_back(p);
    total += p;
  }
  for (double& p : probs) p /= total;
  return IncrementLaw::pmf(std::move(support), std::move(probs));
}

// Two independent MAPs run side by side; the increment is the sum.
MapKernel product_kernel(const MapKernel& k1, const MapKernel& k2) {
  const Eigen::Index n1 = k1.size();
  const Eigen::Index n2 = k2.size();
  const Eigen::Index n = n1 * n2;
  Eigen::MatrixXd p(n, n);
  std::vector<std::string> labels;
  std::vector<IncrementLaw> laws;
  Eigen::VectorXd init(n);
  for (Eigen::Index i1 = 0; i1 < n1; ++i1) {
    for (Eigen::Index i2 = 0; i2 < n2; ++i2) {
      labels.push_back(k1.labels()[static_cast<std::size_t>(i1)] + "+" + k2.labels()[static_cast<std::size_t>(i2)]);
      init(i1 * n2 + i2) = k1.initial_dist()(i1) * k2.initial_dist()(i2);
      for (Eigen::Index j1 = 0; j1 < n1; ++j1) {
        for (Eigen::Index j2 = 0; j2 < n2; ++j2) {
          p(i1 * n2 + i2, j1 * n2 + j2) = k1.transition()(i1, j1) * k2.transition()(i2, j2);
          laws.push_back(convolve(k1.increment(i1, j1), k2.increment(i2, j2)));
        }
      }
    }
  }
  // Row sums of a Kronecker product can drift by an ulp; renormalize.
  for (Eigen::Index r = 0; r < n; ++r) p.row(r) /= p.row(r).sum();
  init /= init.sum();
  return MapKernel(std::move(labels), std::move(p), std::move(laws), std::move(init));
}

Eigen::MatrixXd increment_windows(const MapKernel& kernel, int window, long samples, std::uint64_t seed,
                                  unsigned threads) {
  Eigen::MatrixXd out(samples, window);
  parallel_for(samples, threads, [&](long r) {
    const SamplePath path = sample_path(kernel, window, seed, static_cast<std::uint64_t>(r));
    for (int k = 0; k < window; ++k) out(r, k) = path.increments[static_cast<std::size_t>(k)];
  });
  return out;
}

bool strictly_decreasing(const std::vector<ExperimentRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i - 1].empirical_rate > rows[i].empirical_rate)) return false;
  }
  return true;
}

ExperimentRow rate_row(const std::string& label, double parameter, const MapKernel& arrival, const MapKernel& service,
                       const ExperimentSpec& spec, double scale) {
  const StabilityRoot root = stability_root(arrival, service);
  const RateEstimate est =
      empirical_backlog_rate(arrival, service, root.theta_star, spec.replications, spec.horizon, spec.seed, spec.threads);
  return {label, parameter, scale * root.theta_star, scale * est.rate, est.points};
}

ExperimentReport arrival_vs_constant(const ExperimentSpec& spec) {
  ExperimentReport report;
  report.name = spec.name;
  report.direction = "backlog decay rate: constant >= bursty (same mean)";
  const MapKernel service = frechet_capacity_kernel(0.0);
  const MapKernel constant = MapKernel::single_state(IncrementLaw::constant(kReferenceArrival), "const");
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.1, 0.9;
  const MapKernel bursty({"off", "on"}, p,
                         {IncrementLaw::constant(0.0), IncrementLaw::constant(2.0 * kReferenceArrival),
                          IncrementLaw::constant(0.0), IncrementLaw::constant(2.0 * kReferenceArrival)},
                         Eigen::Vector2d(0.5, 0.5));
  report.rows.push_back(rate_row("constant", 0.0, constant, service, spec, 1.0));
  report.rows.push_back(rate_row("bursty", 1.0, bursty, service, spec, 1.0));
  report.ordered = strictly_decreasing(report.rows);
  report.note = "paired simulation with common random numbers on the service side";
  return report;
}

ExperimentReport service_dependence_sweep(const ExperimentSpec& spec) {
  ExperimentReport report;
  report.name = spec.name;
  report.direction = "delay decay rate decreasing in alpha";
  const MapKernel arrival = MapKernel::single_state(IncrementLaw::constant(kReferenceArrival), "const");
  std::map<double, MapKernel> kernels;
  for (double alpha : {-0.5, 0.0, 0.5}) {
    kernels.emplace(alpha, frechet_capacity_kernel(alpha));
    // With constant arrivals P(D > d) = P(B > lambda d), so the delay rate is
    // lambda times the backlog rate.
    report.rows.push_back(
        rate_row("alpha=" + std::to_string(alpha).substr(0, 5), alpha, arrival, kernels.at(alpha), spec, kReferenceArrival));
  }
  report.ordered = strictly_decreasing(report.rows);
  auto windows = [&](double alpha) {
    return increment_windows(kernels.at(alpha), spec.window, spec.battery_samples, spec.seed, spec.threads);
  };
  const Eigen::MatrixXd neg = windows(-0.5);
  const Eigen::MatrixXd ind = windows(0.0);
  const Eigen::MatrixXd pos = windows(0.5);
  report.batteries.emplace_back("independent <=sm positive", supermodular_battery(ind, pos));
  report.batteries.emplace_back("negative <=sm independent", supermodular_battery(neg, ind));
  report.note = "common random numbers across alpha; capacity windows of length " + std::to_string(spec.window);
  return report;
}

MapKernel subchannel_kernel(double alpha) {
  const Eigen::Vector2d varpi(0.3, 0.7);
  const Eigen::MatrixXd p = transition_from_copula(CopulaSpec::frechet1(alpha), varpi).transition;
  const IncrementLaw hi = quantize_capacity(10.0, 10000.0, 32);
  const IncrementLaw lo = quantize_capacity(0.5, 10000.0, 32);
  return MapKernel({"hi", "lo"}, p, {hi, hi, lo, lo}, varpi);
}

ExperimentReport subchannel_aggregation(const ExperimentSpec& spec) {
  ExperimentReport report;
  report.name = spec.name;
  report.direction = "positive dependence in more sub-channels: backlog decay rate decreasing, windows increasing in <=sm";
  std::vector<MapKernel> totals;
  for (int k = 0; k <= 2; ++k) {
    totals.push_back(product_kernel(subchannel_kernel(k >= 1 ? kManipulatedAlpha : 0.0),
                                    subchannel_kernel(k >= 2 ? kManipulatedAlpha : 0.0)));
  }
  const double lambda = 0.6 * mean_rate(totals.front());
  const MapKernel arrival = MapKernel::single_state(IncrementLaw::constant(lambda), "const");
  for (int k = 0; k <= 2; ++k) {
    report.rows.push_back(rate_row("manipulated=" + std::to_string(k), k, arrival, totals[static_cast<std::size_t>(k)], spec, 1.0));
  }
  report.ordered = strictly_decreasing(report.rows);
  std::vector<Eigen::MatrixXd> w;
  for (const auto& kernel : totals) w.push_back(increment_windows(kernel, spec.window, spec.battery_samples, spec.seed, spec.threads));
  report.batteries.emplace_back("0 manipulated <=sm 1 manipulated", supermodular_battery(w[0], w[1]));
  report.batteries.emplace_back("1 manipulated <=sm 2 manipulated", supermodular_battery(w[1], w[2]));
  report.note = "two quantized Rayleigh sub-channels, total capacity is the sum; manipulated alpha = 0.8";
  return report;
}

MapKernel on_off_source(double alpha) {
  const Eigen::Vector2d varpi(0.5, 0.5);
  const Eigen::MatrixXd p = transition_from_copula(CopulaSpec::frechet1(alpha), varpi).transition;
  const IncrementLaw off = IncrementLaw::constant(0.0);
  const IncrementLaw on = IncrementLaw::constant(1.0);
  return MapKernel({"off", "on"}, p, {off, on, off, on}, varpi);
}

ExperimentReport deterministic_multiplexing(const ExperimentSpec& spec) {
  ExperimentReport report;
  report.name = spec.name;
  report.direction = "positive dependence in more sources: backlog decay rate decreasing, windows increasing in <=sm";
  const MapKernel service = MapKernel::single_state(IncrementLaw::constant(1.3), "const");
  std::vector<MapKernel> aggregates;
  for (int k = 0; k <= 2; ++k) {
    aggregates.push_back(product_kernel(on_off_source(k >= 1 ? kManipulatedAlpha : 0.0),
                                        on_off_source(k >= 2 ? kManipulatedAlpha : 0.0)));
    report.rows.push_back(
        rate_row("manipulated=" + std::to_string(k), k, aggregates.back(), service, spec, 1.0));
  }
  report.ordered = strictly_decreasing(report.rows);
  std::vector<Eigen::MatrixXd> w;
  for (const auto& kernel : aggregates) {
    w.push_back(increment_windows(kernel, spec.window, spec.battery_samples, spec.seed, spec.threads));
  }
  report.batteries.emplace_back("0 manipulated <=sm 1 manipulated", supermodular_battery(w[0], w[1]));
  report.batteries.emplace_back("1 manipulated <=sm 2 manipulated", supermodular_battery(w[1], w[2]));
  report.note = "two on/off sources multiplexed onto a constant-rate server; manipulated alpha = 0.8";
  return report;
}

ExperimentReport random_multiplexing(const ExperimentSpec& spec) {
  ExperimentReport report;
  report.name = spec.name;
  report.direction = "independent batch counts <=sm comonotone batch counts";
  constexpr int kCoords = 3;
  // Binomial(4, 1/2) batch-count distribution.
  const double cdf[] = {1.0 / 16, 5.0 / 16, 11.0 / 16, 15.0 / 16, 1.0};
  auto count_of = [&cdf](double u) {
    int m = 0;
    while (m < 4 && u >= cdf[m]) ++m;
    return m;
  };
  const long n = spec.battery_samples;
  Eigen::MatrixXd independent(n, kCoords), comonotone(n, kCoords);
  parallel_for(n, spec.threads, [&](long r) {
    for (int variant = 0; variant < 2; ++variant) {
      CounterRng counts(spec.seed, 4 * static_cast<std::uint64_t>(r) + 2 * variant);
      CounterRng sizes(spec.seed, 4 * static_cast<std::uint64_t>(r) + 2 * variant + 1);
      const double shared = counts.uniform();
      for (int k = 0; k < kCoords; ++k) {
        const int m = count_of(variant == 0 ? counts.uniform() : shared);
        double total = 0.0;
        for (int j = 0; j < m; ++j) total += sizes.exponential();
        (variant == 0 ? independent : comonotone)(r, k) = total;
      }
    }
  });
  const OrderReport battery = supermodular_battery(independent, comonotone);
  report.ordered = battery.verdict == Verdict::Holds;
  report.batteries.emplace_back("independent <=sm comonotone", battery);
  report.note = "batch counts coupled through shared vs independent uniforms; unit-mean exponential batch sizes";
  return report;
}

}  // namespace

ChannelSpec two_state_rayleigh_channel() {
  ChannelSpec ch;
  ch.bandwidth = 20000.0;
  const double g = std::exp(0.5);
  ch.snr.resize(2, 2);
  ch.snr << g, g, 0.7 * g, 0.7 * g;
  ch.power_states = {"high", "low"};
  return ch;
}

Eigen::VectorXd two_state_varpi() { return Eigen::Vector2d(0.3, 0.7); }

MapKernel frechet_capacity_kernel(double alpha) {
  const Eigen::VectorXd varpi = two_state_varpi();
  const TransitionStep step = transition_from_copula(CopulaSpec::frechet1(alpha), varpi);
  return capacity_kernel(step.transition, two_state_rayleigh_channel(), varpi);
}

RateEstimate empirical_backlog_rate(const MapKernel& arrival, const MapKernel& service, double theta_hint,
                                    long replications, long horizon, std::uint64_t seed, unsigned threads) {
  if (!(theta_hint > 0.0)) throw InvalidArgument("empirical_backlog_rate: theta_hint must be positive");
  const double span = std::log(static_cast<double>(replications) / static_cast<double>(kMinHits)) / theta_hint;
  TailRequest request;
  request.replications = replications;
  request.horizon = horizon;
  request.seed = seed;
  request.threads = threads;
  for (int k = 0; k < kRateLevels; ++k) request.backlog_levels.push_back(span * k / (kRateLevels - 1));
  RateEstimate est;
  est.tail = tail_estimate(arrival, service, request).backlog;
  std::vector<TailEstimate> region;
  for (const auto& e : est.tail) {
    if (e.level >= kFitStartFraction * span) region.push_back(e);
  }
  const stats::SlopeFit fit = stats::log_tail_slope(region);
  est.rate = -fit.slope;
  est.points = fit.points;
  return est;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"arrival-vs-constant", "service-dependence-sweep",
                                              "subchannel-aggregation", "deterministic-multiplexing",
                                              "random-multiplexing"};
  return names;
}

ExperimentReport ordering_experiment(const ExperimentSpec& spec) {
  if (spec.replications < 100 || spec.horizon < 1 || spec.window < 2 || spec.battery_samples < 10) {
    throw InvalidArgument("ordering_experiment: replications >= 100, horizon >= 1, window >= 2, battery_samples >= 10");
  }
  if (spec.name == "arrival-vs-constant") return arrival_vs_constant(spec);
  if (spec.name == "service-dependence-sweep") return service_dependence_sweep(spec);
  if (spec.name == "subchannel-aggregation") return subchannel_aggregation(spec);
  if (spec.name == "deterministic-multiplexing") return deterministic_multiplexing(spec);
  if (spec.name == "random-multiplexing") return random_multiplexing(spec);
  throw UnknownExperiment("unknown experiment '" + spec.name + "'");
}

}  // namespace depctl
