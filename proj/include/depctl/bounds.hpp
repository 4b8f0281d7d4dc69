// Analytic delay and backlog tail bounds for queues fed and drained by Markov
// additive processes.
#pragma once

#include <string>
#include <vector>

#include "depctl/spectral.hpp"

namespace depctl {

struct DecayRates {
  double delay_rate = 0.0;    // kappa^A(theta*)
  double backlog_rate = 0.0;  // theta*
};

DecayRates decay_rates(const MapKernel& arrival, const MapKernel& service);

struct BoundReport {
  double level = 0.0;
  double lower = 0.0;  // clamped to [0, 1]
  double upper = 0.0;
  double lower_raw = 0.0;
  double upper_raw = 0.0;
  double theta_star = 0.0;
  double h_plus = 0.0;
  double h_minus = 0.0;
  // "A:<state>|S:<state>" for a conditioned pair, "avg" for the average over
  // the initial distributions.
  std::string conditioning;
};

// Rows are grouped by level; within a level every (arrival, service) state
// pair comes first and "avg" last.
std::vector<BoundReport> delay_bounds(const MapKernel& arrival, const MapKernel& service,
                                      const std::vector<double>& d_range);
std::vector<BoundReport> backlog_bounds(const MapKernel& arrival, const MapKernel& service,
                                        const std::vector<double>& b_range);

enum class HorizonBranch { ShortHorizon, LongHorizonRemainder };
std::string to_string(HorizonBranch branch);

struct HorizonBoundReport {
  double level = 0.0;
  double y = 0.0;
  double theta = 0.0;    // root of the derivative equation
  double theta_y = 0.0;
  double y_gamma = 0.0;
  HorizonBranch branch = HorizonBranch::ShortHorizon;
  double bound = 0.0;    // clamped, averaged over the initial distributions
  double bound_raw = 0.0;
};

HorizonBoundReport horizon_delay_bound(const MapKernel& arrival, const MapKernel& service, double y, double d);
HorizonBoundReport horizon_backlog_bound(const MapKernel& arrival, const MapKernel& service, double y, double b);

struct ConstantArrivalReport {
  double theta = 0.0;  // -theta is the negative root for S(t) - lambda t
  std::vector<BoundReport> delay;
  std::vector<BoundReport> backlog;  // level b = lambda * d
};

// Conditioning labels are "S:<state>" and "avg"; the average weighs the
// service initial distribution.
ConstantArrivalReport constant_arrival_bounds(double lambda, const MapKernel& service,
                                              const std::vector<double>& d_range);

struct DccBound {
  double value = 0.0;  // bound on the delay-constrained capacity, >= 0
  double theta = 0.0;  // optimizing theta
  double asymptotic_cap = 0.0;  // kappa^A(theta*) / theta*
};

DccBound dcc_upper(const MapKernel& arrival, const MapKernel& service, double d, double epsilon);

// Rates at which the upper and the lower delay tail bound for constant
// arrivals equal epsilon. Each is the largest such rate below the mean service
// rate, since the capacity is the supremum of the feasible rates.
struct DccInterval {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  int iterations_lo = 0;  // bound evaluations
  int iterations_hi = 0;
};

DccInterval constant_dcc_interval(const MapKernel& service, double d, double epsilon,
                                  const Eigen::VectorXd& varpi);

}  // namespace depctl
