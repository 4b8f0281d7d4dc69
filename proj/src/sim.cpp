#include "depctl/sim.hpp"

#include <algorithm>
#include <cmath>

#include "depctl/error.hpp"

namespace depctl {

namespace {

// Relative slack when comparing cumulative sums, so that a backlog built from
// rounded additions does not shift the virtual delay by one slot.
constexpr double kCumulativeSlack = 1e-12;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Smallest d with cum[t - d] <= target (cum nondecreasing, cum[0] = 0).
long delay_at(const std::vector<double>& cum, long t, double target) {
  const double slack = kCumulativeSlack * std::max(1.0, std::abs(cum[static_cast<std::size_t>(t)]));
  long d = 0;
  while (d < t && cum[static_cast<std::size_t>(t - d)] > target + slack) ++d;
  return d;
}

}  // namespace

int draw_state(const Eigen::Ref<const Eigen::RowVectorXd>& probs, double u) {
  double acc = 0.0;
  const Eigen::Index n = probs.size();
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    acc += probs(j);
    if (u < acc) return static_cast<int>(j);
  }
  // Skip trailing zero-probability states.
  for (Eigen::Index j = n - 1; j > 0; --j) {
    if (probs(j) > 0.0) return static_cast<int>(j);
  }
  return 0;
}

SamplePath sample_path(const MapKernel& kernel, long horizon, std::uint64_t seed, std::uint64_t stream_id) {
  if (horizon < 0) throw InvalidArgument("sample_path: horizon must be nonnegative");
  CounterRng chain(seed, 2 * stream_id);
  CounterRng incr(seed, 2 * stream_id + 1);
  SamplePath path;
  path.states.reserve(static_cast<std::size_t>(horizon) + 1);
  path.increments.reserve(static_cast<std::size_t>(horizon));
  int state = draw_state(kernel.initial_dist().transpose(), chain.uniform());
  path.states.push_back(state);
  for (long t = 0; t < horizon; ++t) {
    const int next = draw_state(kernel.transition().row(state), chain.uniform());
    path.increments.push_back(kernel.increment(state, next).sample(incr));
    path.states.push_back(next);
    state = next;
  }
  return path;
}

QueueTrace lindley(const std::vector<double>& arrivals, const std::vector<double>& services) {
  if (arrivals.size() != services.size()) {
    throw LengthMismatch("lindley: arrival and service paths differ in length (" + std::to_string(arrivals.size()) +
                         " vs " + std::to_string(services.size()) + ")");
  }
  const std::size_t horizon = arrivals.size();
  QueueTrace trace;
  trace.horizon = static_cast<long>(horizon);
  trace.arrivals = arrivals;
  trace.services = services;
  trace.backlog.assign(horizon + 1, 0.0);
  trace.virtual_delay.assign(horizon + 1, 0);
  std::vector<double> cum(horizon + 1, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    trace.backlog[t + 1] = std::max(trace.backlog[t] + arrivals[t] - services[t], 0.0);
    cum[t + 1] = cum[t] + arrivals[t];
  }
  for (std::size_t t = 0; t <= horizon; ++t) {
    trace.virtual_delay[t] = delay_at(cum, static_cast<long>(t), cum[t] - trace.backlog[t]);
  }
  return trace;
}

TailResult tail_estimate(const MapKernel& arrival, const MapKernel& service, const TailRequest& request) {
  if (request.replications <= 0 || request.horizon <= 0) {
    throw InvalidArgument("tail_estimate: replications and horizon must be positive");
  }
  const auto reps = static_cast<std::size_t>(request.replications);
  std::vector<double> final_backlog(reps);
  std::vector<long> final_delay(reps);

  parallel_for(request.replications, request.threads, [&](long r) {
    const auto ur = static_cast<std::uint64_t>(r);
    CounterRng a_chain(request.seed, 4 * ur), a_incr(request.seed, 4 * ur + 1);
    CounterRng s_chain(request.seed, 4 * ur + 2), s_incr(request.seed, 4 * ur + 3);
    int ja = draw_state(arrival.initial_dist().transpose(), a_chain.uniform());
    int js = draw_state(service.initial_dist().transpose(), s_chain.uniform());
    std::vector<double> cum(static_cast<std::size_t>(request.horizon) + 1, 0.0);
    double backlog = 0.0;
    for (long t = 0; t < request.horizon; ++t) {
      const int na = draw_state(arrival.transition().row(ja), a_chain.uniform());
      const double a = arrival.increment(ja, na).sample(a_incr);
      const int ns = draw_state(service.transition().row(js), s_chain.uniform());
      const double c = service.increment(js, ns).sample(s_incr);
      backlog = std::max(backlog + a - c, 0.0);
      cum[static_cast<std::size_t>(t) + 1] = cum[static_cast<std::size_t>(t)] + a;
      ja = na;
      js = ns;
    }
    final_backlog[static_cast<std::size_t>(r)] = backlog;
    final_delay[static_cast<std::size_t>(r)] =
        delay_at(cum, request.horizon, cum[static_cast<std::size_t>(request.horizon)] - backlog);
  });

  auto summarize = [&](double level, long hits) {
    TailEstimate e;
    e.level = level;
    e.hits = hits;
    e.replications = request.replications;
    e.p_hat = static_cast<double>(hits) / static_cast<double>(request.replications);
    e.std_err = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(request.replications));
    e.inconclusive = hits < kMinHits;
    return e;
  };

  TailResult result;
  for (double d : request.delay_levels) {
    const long hits = std::count_if(final_delay.begin(), final_delay.end(),
                                    [d](long x) { return static_cast<double>(x) > d; });
    result.delay.push_back(summarize(d, hits));
  }
  for (double b : request.backlog_levels) {
    const long hits = std::count_if(final_backlog.begin(), final_backlog.end(), [b](double x) { return x > b; });
    result.backlog.push_back(summarize(b, hits));
  }
  return result;
}

long warmup_slots(const MapKernel& arrival, const MapKernel& service) {
  const StabilityRoot root = stability_root(arrival, service);
  const double drift = mean_rate(service) - mean_rate(arrival);
  return static_cast<long>(std::ceil(10.0 / (root.theta_star * drift)));
}

MartingaleResult martingale_check(const MapKernel& kernel, double theta, long horizon, long replications,
                                  std::uint64_t seed, unsigned threads) {
  if (replications <= 1 || horizon < 0) {
    throw InvalidArgument("martingale_check: need at least two replications and a nonnegative horizon");
  }
  const SpectralSolution sol = perron(kernel, theta);
  std::vector<double> values(static_cast<std::size_t>(replications));
  parallel_for(replications, threads, [&](long r) {
    const SamplePath path = sample_path(kernel, horizon, seed, static_cast<std::uint64_t>(r));
    KahanSum s;
    for (double x : path.increments) s.add(x);
    const double log_l = theta * s.sum - static_cast<double>(horizon) * sol.kappa;
    values[static_cast<std::size_t>(r)] =
        sol.h(path.states.back()) / sol.h(path.states.front()) * std::exp(log_l);
  });
  KahanSum sum;
  for (double v : values) sum.add(v);
  const double n = static_cast<double>(replications);
  const double mean = sum.sum / n;
  KahanSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  MartingaleResult out;
  out.mean = mean;
  out.std_err = std::sqrt(sq.sum / (n - 1.0) / n);
  out.replications = replications;
  return out;
}

}  // namespace depctl
