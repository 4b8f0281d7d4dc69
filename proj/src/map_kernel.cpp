#include <cmath>
#include <queue>

#include "depctl/error.hpp"
#include "depctl/spectral.hpp"

namespace depctl {

namespace {

constexpr double kStochasticTol = 1e-12;

void validate_distribution(const Eigen::VectorXd& dist, Eigen::Index n, const char* what) {
  if (dist.size() != n) {
    throw InvalidKernel(std::string(what) + " has " + std::to_string(dist.size()) +
                        " entries, expected " + std::to_string(n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dist(i) >= 0.0)) throw InvalidKernel(std::string(what) + " has a negative entry");
  }
  if (std::abs(dist.sum() - 1.0) > kStochasticTol) {
    throw InvalidKernel(std::string(what) + " does not sum to 1");
  }
}

}  // namespace

bool is_irreducible(const Eigen::MatrixXd& transition) {
  const Eigen::Index n = transition.rows();
  // Every state must reach every state: check forward and backward
  // reachability from state 0.
  for (bool forward : {true, false}) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<Eigen::Index> frontier;
    frontier.push(0);
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!frontier.empty()) {
      const Eigen::Index s = frontier.front();
      frontier.pop();
      for (Eigen::Index t = 0; t < n; ++t) {
        const double p = forward ? transition(s, t) : transition(t, s);
        if (p > 0.0 && !seen[static_cast<std::size_t>(t)]) {
          seen[static_cast<std::size_t>(t)] = 1;
          ++count;
          frontier.push(t);
        }
      }
    }
    if (count != n) return false;
  }
  return true;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const Eigen::Index n = transition.rows();
  // Solve pi (P - I) = 0 with sum(pi) = 1 as an overdetermined system.
  Eigen::MatrixXd system(n + 1, n);
  system.topRows(n) = (transition - Eigen::MatrixXd::Identity(n, n)).transpose();
  system.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  Eigen::VectorXd pi = system.colPivHouseholderQr().solve(rhs);
  for (Eigen::Index i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
  return pi / pi.sum();
}

MapKernel::MapKernel(std::vector<std::string> labels, Eigen::MatrixXd transition,
                     std::vector<IncrementLaw> increments, Eigen::VectorXd initial_dist)
    : labels_(std::move(labels)),
      transition_(std::move(transition)),
      increments_(std::move(increments)),
      initial_dist_(std::move(initial_dist)) {
  const Eigen::Index n = transition_.rows();
  if (n == 0 || transition_.cols() != n) throw InvalidKernel("transition must be a non-empty square matrix");
  if (static_cast<Eigen::Index>(labels_.size()) != n) {
    throw InvalidKernel("state label count does not match the transition matrix");
  }
  if (static_cast<Eigen::Index>(increments_.size()) != n * n) {
    throw InvalidKernel("increment matrix must have one law per transition");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(transition_(i, j) >= 0.0)) throw InvalidKernel("transition has a negative entry");
    }
    if (std::abs(transition_.row(i).sum() - 1.0) > kStochasticTol) {
      throw InvalidKernel("transition row " + std::to_string(i) + " does not sum to 1");
    }
  }
  validate_distribution(initial_dist_, n, "initial distribution");
  if (!is_irreducible(transition_)) throw InvalidKernel("transition matrix is not irreducible");
  stationary_ = stationary_distribution(transition_);
}

MapKernel MapKernel::single_state(IncrementLaw law, std::string label) {
  return MapKernel({std::move(label)}, Eigen::MatrixXd::Ones(1, 1), {std::move(law)},
                   Eigen::VectorXd::Ones(1));
}

Eigen::VectorXd MapKernel::distribution_at(long steps) const {
  Eigen::RowVectorXd dist = initial_dist_.transpose();
  for (long t = 0; t < steps; ++t) {
    Eigen::RowVectorXd next = dist * transition_;
    if ((next - dist).lpNorm<Eigen::Infinity>() == 0.0) break;
    dist = next;
  }
  return dist.transpose();
}

MapKernel MapKernel::with_initial(Eigen::VectorXd initial_dist) const {
  return MapKernel(labels_, transition_, increments_, std::move(initial_dist));
}

bool operator==(const MapKernel& a, const MapKernel& b) {
  return a.labels_ == b.labels_ && a.transition_ == b.transition_ &&
         a.increments_ == b.increments_ && a.initial_dist_ == b.initial_dist_;
}

}  // namespace depctl
