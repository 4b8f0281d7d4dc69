// Markov additive processes: increment laws, kernels, transform matrices and
// Perron-Frobenius spectra.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "depctl/rng.hpp"

namespace depctl {

// Distribution of the additive increment attached to one state transition.
class IncrementLaw {
 public:
  struct Constant {
    double value;
  };
  struct DiscretePmf {
    std::vector<double> support;  // strictly increasing
    std::vector<double> probs;
    std::vector<double> cdf;      // derived, used for sampling
  };
  // W log2(1 + snr * g) with g unit-mean exponential (Rayleigh power gain).
  struct RayleighCapacity {
    double bandwidth;
    double snr;
  };
  struct Negated {
    std::shared_ptr<const IncrementLaw> inner;
  };
  struct Shifted {
    std::shared_ptr<const IncrementLaw> inner;
    double offset;
  };
  using Variant = std::variant<Constant, DiscretePmf, RayleighCapacity, Negated, Shifted>;

  static IncrementLaw constant(double value);
  static IncrementLaw pmf(std::vector<double> support, std::vector<double> probs);
  static IncrementLaw rayleigh(double bandwidth, double snr);
  static IncrementLaw negated(IncrementLaw inner);
  static IncrementLaw shifted(IncrementLaw inner, double offset);

  // N(mean, variance) quantized onto the n-point Gauss-Hermite rule. Moments
  // and MGF values agree with the Gaussian to rounding for moderate theta.
  static IncrementLaw gaussian(double mean, double variance, int points = 48);

  const Variant& variant() const noexcept { return law_; }

  // E[exp(theta X)]. Throws MgfDiverged if the value is not finite or the
  // quadrature fails.
  double mgf(double theta) const;
  // E[X exp(theta X)].
  double tilted_mean(double theta) const;
  double mean() const { return tilted_mean(0.0); }

  double sample(CounterRng& rng) const;

  friend bool operator==(const IncrementLaw& a, const IncrementLaw& b);

 private:
  explicit IncrementLaw(Variant v) : law_(std::move(v)) {}
  Variant law_;
};

// Finite-state discrete-time Markov additive process.
class MapKernel {
 public:
  MapKernel(std::vector<std::string> labels, Eigen::MatrixXd transition,
            std::vector<IncrementLaw> increments, Eigen::VectorXd initial_dist);

  // One state, i.i.d. increments.
  static MapKernel single_state(IncrementLaw law, std::string label = "s0");

  Eigen::Index size() const noexcept { return transition_.rows(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Eigen::MatrixXd& transition() const noexcept { return transition_; }
  const Eigen::VectorXd& initial_dist() const noexcept { return initial_dist_; }
  const Eigen::VectorXd& stationary() const noexcept { return stationary_; }
  const IncrementLaw& increment(Eigen::Index from, Eigen::Index to) const {
    return increments_[static_cast<std::size_t>(from * size() + to)];
  }
  const std::vector<IncrementLaw>& increments() const noexcept { return increments_; }

  // State distribution after `steps` transitions from the initial distribution.
  Eigen::VectorXd distribution_at(long steps) const;

  MapKernel with_initial(Eigen::VectorXd initial_dist) const;

  friend bool operator==(const MapKernel& a, const MapKernel& b);

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd transition_;
  std::vector<IncrementLaw> increments_;
  Eigen::VectorXd initial_dist_;
  Eigen::VectorXd stationary_;
};

// Stationary distribution of an irreducible stochastic matrix.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

// True when every state reaches every other state on the support graph.
bool is_irreducible(const Eigen::MatrixXd& transition);

struct SpectralSolution {
  double theta = 0.0;
  double kappa = 0.0;   // log Perron root of the transform matrix
  Eigen::VectorXd h;    // right eigenvector, pi . h = 1
  Eigen::VectorXd v;    // left eigenvector, v . h = 1
  Eigen::VectorXd pi;   // stationary distribution
};

struct StabilityRoot {
  double theta_star = 0.0;
  double kappa_arrival = 0.0;
  double residual = 0.0;
};

// Entry (i, j) = p_ij * E[exp(theta X_ij)].
Eigen::MatrixXd transform_matrix(const MapKernel& kernel, double theta);
// Entry (i, j) = p_ij * E[X_ij exp(theta X_ij)].
Eigen::MatrixXd transform_matrix_derivative(const MapKernel& kernel, double theta);

SpectralSolution perron(const MapKernel& kernel, double theta);
double cgf(const MapKernel& kernel, double theta);
double cgf_derivative(const MapKernel& kernel, double theta);
double mean_rate(const MapKernel& kernel);
MapKernel negate(const MapKernel& kernel);

// Positive root of cgf(arrival, .) + cgf(negate(service), .).
StabilityRoot stability_root(const MapKernel& arrival, const MapKernel& service);

}  // namespace depctl
