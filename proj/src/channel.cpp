#include "depctl/channel.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <numbers>

#include "depctl/error.hpp"
#include "depctl/sim.hpp"

namespace depctl {

void ChannelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw InvalidArgument("channel: bandwidth must be positive");
  const auto n = static_cast<Eigen::Index>(power_states.size());
  if (n == 0 || snr.rows() != n || snr.cols() != n) {
    throw DimensionMismatch("channel: snr matrix must be square and match the power state count");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(snr(i, j) > 0.0) || !std::isfinite(snr(i, j))) throw InvalidArgument("channel: snr entries must be positive");
    }
  }
}

double instantaneous_capacity(double gain_power, double snr, double bandwidth) {
  if (!(gain_power >= 0.0 && snr >= 0.0 && bandwidth >= 0.0)) {
    throw InvalidArgument("instantaneous_capacity: inputs must be nonnegative");
  }
  return bandwidth * std::log1p(snr * gain_power) / std::numbers::ln2;
}

MapKernel capacity_kernel(const Eigen::MatrixXd& transition, const ChannelSpec& channel) {
  channel.validate();
  if (transition.rows() != static_cast<Eigen::Index>(channel.size())) {
    throw DimensionMismatch("capacity_kernel: transition size differs from the channel state count");
  }
  return capacity_kernel(transition, channel, stationary_distribution(transition));
}

MapKernel capacity_kernel(const Eigen::MatrixXd& transition, const ChannelSpec& channel,
                          const Eigen::VectorXd& initial_dist) {
  channel.validate();
  const auto n = static_cast<Eigen::Index>(channel.size());
  if (transition.rows() != n || transition.cols() != n) {
    throw DimensionMismatch("capacity_kernel: transition size differs from the channel state count");
  }
  std::vector<IncrementLaw> laws;
  laws.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) laws.push_back(IncrementLaw::rayleigh(channel.bandwidth, channel.snr(i, j)));
  }
  return MapKernel(channel.power_states, transition, std::move(laws), initial_dist);
}

CapacityPath controlled_capacity_process(const ControlPlan& plan, const ChannelSpec& channel, long horizon,
                                         std::uint64_t seed, std::uint64_t stream, std::size_t dimension) {
  channel.validate();
  if (dimension >= plan.per_dimension.size()) throw DimensionMismatch("controlled_capacity_process: no such dimension");
  const DimensionPlan& dim = plan.per_dimension[dimension];
  if (dim.transitions.empty()) throw InvalidArgument("controlled_capacity_process: plan has no transitions");
  if (dim.transitions.front().rows() != static_cast<Eigen::Index>(channel.size())) {
    throw DimensionMismatch("controlled_capacity_process: plan size differs from the channel state count");
  }
  CounterRng chain_rng(seed, 2 * stream);
  CounterRng gain_rng(seed, 2 * stream + 1);

  CapacityPath path;
  path.initial_state = draw_state(dim.distributions.front().transpose(), chain_rng.uniform());
  path.states.reserve(static_cast<std::size_t>(horizon));
  path.gains.reserve(static_cast<std::size_t>(horizon));
  path.capacity.reserve(static_cast<std::size_t>(horizon));
  path.transient.reserve(static_cast<std::size_t>(horizon));
  int state = path.initial_state;
  double cumulative = 0.0;
  for (long t = 0; t < horizon; ++t) {
    const std::size_t step = std::min<std::size_t>(static_cast<std::size_t>(t), dim.transitions.size() - 1);
    const int next = draw_state(dim.transitions[step].row(state), chain_rng.uniform());
    const double gain = gain_rng.exponential();
    const double c = instantaneous_capacity(gain, channel.snr(state, next), channel.bandwidth);
    cumulative += c;
    path.states.push_back(next);
    path.gains.push_back(gain);
    path.capacity.push_back(c);
    path.transient.push_back(cumulative / static_cast<double>(t + 1));
    state = next;
  }
  return path;
}

IncrementLaw quantize_capacity(double snr, double bandwidth, int n_points) {
  if (n_points < 1) throw InvalidArgument("quantize_capacity: n_points must be at least 1");
  if (!(snr > 0.0) || !(bandwidth > 0.0)) throw InvalidArgument("quantize_capacity: snr and bandwidth must be positive");
  std::vector<double> support;
  std::vector<double> probs;
  const double mass = 1.0 / n_points;
  for (int k = 1; k <= n_points; ++k) {
    const double level = (k - 0.5) / n_points;
    const double gain = -std::log1p(-level);
    const double c = instantaneous_capacity(gain, snr, bandwidth);
    if (!support.empty() && !(c > support.back())) {
      probs.back() += mass;  // collapse ties
    } else {
      support.push_back(c);
      probs.push_back(mass);
    }
  }
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  return IncrementLaw::pmf(std::move(support), std::move(probs));
}

double rayleigh_mean_capacity(double snr, double bandwidth) {
  const double x = 1.0 / snr;
  return bandwidth / std::numbers::ln2 * std::exp(x) * boost::math::expint(1, x);
}

}  // namespace depctl
