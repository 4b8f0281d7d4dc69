// Monte Carlo simulation of Markov additive queues.
#pragma once

#include <cstdint>
#include <vector>

#include "depctl/spectral.hpp"

namespace depctl {

// Inverse-CDF draw of a state index from a probability row.
int draw_state(const Eigen::Ref<const Eigen::RowVectorXd>& probs, double u);

struct SamplePath {
  std::vector<int> states;           // J_0 .. J_T
  std::vector<double> increments;    // X(0) .. X(T-1), X(t) ~ H(J_t, J_{t+1})
};

// Chain moves use stream 2 * stream_id and increments 2 * stream_id + 1, so
// kernels sharing increment laws see the same increment randomness.
SamplePath sample_path(const MapKernel& kernel, long horizon, std::uint64_t seed, std::uint64_t stream_id = 0);

struct QueueTrace {
  long horizon = 0;
  std::vector<double> backlog;        // B(0) .. B(T), B(0) = 0
  std::vector<long> virtual_delay;    // D(0) .. D(T)
  std::vector<double> arrivals;       // a(0) .. a(T-1)
  std::vector<double> services;       // c(0) .. c(T-1)
};

// B(t+1) = max(B(t) + a(t) - c(t), 0); D(t) = min{d >= 0 : A(t-d) <= A(t) - B(t)}.
QueueTrace lindley(const std::vector<double>& arrivals, const std::vector<double>& services);

struct TailEstimate {
  double level = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;
  long hits = 0;
  long replications = 0;
  bool inconclusive = true;  // fewer than kMinHits exceedances
};

inline constexpr long kMinHits = 50;

struct TailRequest {
  std::vector<double> delay_levels;    // slots
  std::vector<double> backlog_levels;  // bits
  long replications = 0;
  long horizon = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct TailResult {
  std::vector<TailEstimate> delay;
  std::vector<TailEstimate> backlog;
};

// Replication r runs the arrival on streams (4r, 4r+1) and the service on
// (4r+2, 4r+3), and contributes the pair (D(T), B(T)) at the end of the
// horizon. Results do not depend on the thread count.
TailResult tail_estimate(const MapKernel& arrival, const MapKernel& service, const TailRequest& request);

// Slots needed to forget the empty initial queue: 10 / (theta* |drift|),
// with drift the mean net service per slot.
long warmup_slots(const MapKernel& arrival, const MapKernel& service);

struct MartingaleResult {
  double mean = 0.0;
  double std_err = 0.0;
  long replications = 0;
};

// L(T) = h_{J_T}(theta) / h_{J_0}(theta) * exp(theta S(T) - T kappa(theta)).
MartingaleResult martingale_check(const MapKernel& kernel, double theta, long horizon, long replications,
                                  std::uint64_t seed, unsigned threads = 0);

// Runs body(r) for r in [0, count) on a fixed pool of threads with static
// contiguous blocks.
template <class Body>
void parallel_for(long count, unsigned threads, Body body);

}  // namespace depctl

#include "depctl/detail/parallel.hpp"
