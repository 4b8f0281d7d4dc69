// Rayleigh-fading wireless channels as Markov additive service processes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depctl/copula.hpp"
#include "depctl/spectral.hpp"

namespace depctl {

struct ChannelSpec {
  double bandwidth = 0.0;            // Hz
  Eigen::MatrixXd snr;               // linear SNR per (source, destination) power state
  std::vector<std::string> power_states;

  void validate() const;
  std::size_t size() const { return power_states.size(); }
};

// W log2(1 + snr * gain) bits per slot.
double instantaneous_capacity(double gain_power, double snr, double bandwidth);

// Kernel with RayleighCapacity(bandwidth, snr(i, j)) on transition (i, j).
// The initial distribution defaults to the stationary one.
MapKernel capacity_kernel(const Eigen::MatrixXd& transition, const ChannelSpec& channel);
MapKernel capacity_kernel(const Eigen::MatrixXd& transition, const ChannelSpec& channel,
                          const Eigen::VectorXd& initial_dist);

struct CapacityPath {
  int initial_state = 0;
  std::vector<int> states;               // state after slot t
  std::vector<double> gains;
  std::vector<double> capacity;          // C(t)
  std::vector<double> transient;         // S(t) / t, t = 1..horizon
};

// Simulates the power-state chain of one plan dimension (P_j at step j, the
// last matrix reused past the plan horizon) with i.i.d. unit-mean
// exponential gains. Slot t uses snr(J_t, J_{t+1}).
CapacityPath controlled_capacity_process(const ControlPlan& plan, const ChannelSpec& channel, long horizon,
                                         std::uint64_t seed, std::uint64_t stream = 0, std::size_t dimension = 0);

// Capacity quantiles at levels (k - 0.5) / n with equal masses 1 / n.
IncrementLaw quantize_capacity(double snr, double bandwidth, int n_points);

// Closed-form mean of W log2(1 + snr g): (W / ln 2) e^{1/snr} E1(1/snr).
double rayleigh_mean_capacity(double snr, double bandwidth);

}  // namespace depctl
