// Shared fixtures for the unit tests.
#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "depctl/experiments.hpp"
#include "depctl/spectral.hpp"

namespace depctl::testing {

// Strictly positive transition matrix (hence irreducible) with small finite
// PMF increments on a bounded range.
inline MapKernel random_kernel(std::mt19937_64& gen, int n, double lo = 0.0, double hi = 3.0) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> x(lo, hi);
  std::uniform_int_distribution<int> k(1, 3);
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) p(i, j) = u(gen);
    p.row(i) /= p.row(i).sum();
  }
  std::vector<IncrementLaw> laws;
  for (int e = 0; e < n * n; ++e) {
    const int m = k(gen);
    std::vector<double> support;
    for (int s = 0; s < m; ++s) support.push_back(x(gen));
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    if (support.size() == 1) {
      laws.push_back(IncrementLaw::constant(support.front()));
      continue;
    }
    std::vector<double> probs;
    double total = 0.0;
    for (std::size_t s = 0; s < support.size(); ++s) {
      probs.push_back(u(gen));
      total += probs.back();
    }
    for (double& q : probs) q /= total;
    laws.push_back(IncrementLaw::pmf(support, probs));
  }
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
  return MapKernel(labels, p, laws, stationary_distribution(p));
}

// Constant arrival 1 against a Gaussian-equivalent N(3, 2) service.
inline MapKernel toy_arrival() { return MapKernel::single_state(IncrementLaw::constant(1.0)); }
inline MapKernel toy_service() { return MapKernel::single_state(IncrementLaw::gaussian(3.0, 2.0)); }

// Rayleigh channel with the Frechet-derived transition matrix.
inline MapKernel rayleigh_service(double alpha) { return frechet_capacity_kernel(alpha); }
inline MapKernel rayleigh_arrival() { return MapKernel::single_state(IncrementLaw::constant(10000.0)); }

}  // namespace depctl::testing
