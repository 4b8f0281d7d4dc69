// Convex and supermodular stochastic-order checks.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "depctl/spectral.hpp"

namespace depctl {

struct ConvexOrderResult {
  bool holds = false;
  bool means_equal = false;
  double mean_x = 0.0;
  double mean_y = 0.0;
  // Largest E[(X-t)+] - E[(Y-t)+] over the pooled support (positive refutes).
  double max_stop_loss_excess = 0.0;
  double at = 0.0;
};

// Exact decision of X <=_cx Y for finite discrete laws: equal means and
// stop-loss dominance at every support point of either law. Comparisons use
// an absolute tolerance of 1e-12 scaled by the support magnitude.
ConvexOrderResult convex_order_leq(const IncrementLaw& x, const IncrementLaw& y);

enum class Verdict { Holds, Fails, Inconclusive };
std::string to_string(Verdict v);

struct OrderTest {
  std::string id;
  double mean_diff = 0.0;  // E[phi(Y)] - E[phi(X)]
  double std_err = 0.0;
};

struct OrderReport {
  Verdict verdict = Verdict::Inconclusive;
  bool marginals_match = false;
  double z_threshold = 0.0;
  std::vector<OrderTest> tests;
  std::string note;
};

// Necessary-condition check of X <=_sm Y from samples (one row per draw,
// one column per coordinate). Values must be nonnegative for the truncated
// product family to be supermodular.
OrderReport supermodular_battery(const Eigen::MatrixXd& samples_x, const Eigen::MatrixXd& samples_y);

}  // namespace depctl
