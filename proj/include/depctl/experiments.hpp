// Paired simulation experiments on dependence and decay-rate ordering.
//
// Every experiment estimates finite-horizon tail slopes, so a reported
// ordering supports the asymptotic claim without proving it.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "depctl/channel.hpp"
#include "depctl/order.hpp"
#include "depctl/sim.hpp"

namespace depctl {

// Two power states with stationary mass (0.3, 0.7), 20 kHz, SNR e^0.5 in the
// first state and 0.7 e^0.5 in the second (source-state dependent).
ChannelSpec two_state_rayleigh_channel();
Eigen::VectorXd two_state_varpi();

// Capacity kernel of two_state_rayleigh_channel() whose transition matrix is
// extracted from frechet1(alpha) on two_state_varpi().
MapKernel frechet_capacity_kernel(double alpha);

struct RateEstimate {
  double rate = 0.0;    // -slope of log P(B > b) in b
  int points = 0;
  std::vector<TailEstimate> tail;
};

// Backlog tail on 48 levels spanning [0, log(R / 50) / theta_hint]; the slope
// is fitted over levels above a quarter of that span with at least 50 hits.
RateEstimate empirical_backlog_rate(const MapKernel& arrival, const MapKernel& service, double theta_hint,
                                    long replications, long horizon, std::uint64_t seed, unsigned threads = 0);

struct ExperimentSpec {
  std::string name;  // arrival-vs-constant | service-dependence-sweep | subchannel-aggregation |
                     // deterministic-multiplexing | random-multiplexing
  std::uint64_t seed = 1;
  long replications = 20000;
  long horizon = 200;
  int window = 4;
  long battery_samples = 20000;
  unsigned threads = 0;
};

struct ExperimentRow {
  std::string label;
  double parameter = 0.0;
  double analytic_rate = 0.0;
  double empirical_rate = 0.0;
  int fit_points = 0;
};

struct ExperimentReport {
  std::string name;
  std::string direction;
  std::vector<ExperimentRow> rows;
  // Empirical rates strictly ordered in the stated direction (or, for
  // experiments without rates, every battery verdict is "holds").
  bool ordered = false;
  std::vector<std::pair<std::string, OrderReport>> batteries;
  std::string note;
};

const std::vector<std::string>& experiment_names();
ExperimentReport ordering_experiment(const ExperimentSpec& spec);

}  // namespace depctl
