// Bivariate copulas, the Darsow star product, transition extraction and the
// dependence-control plan builder.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace depctl {

struct CopulaM {};
struct CopulaW {};
struct CopulaP {};
// Convex combination w_w * W + w_p * P + w_m * M.
struct FrechetCopula {
  double w_w;
  double w_p;
  double w_m;
};
struct OneParamFrechet {
  double alpha;
};
struct Gaussian2 {
  double rho;
};
// Values C(u_i, v_j) on a rectangular lattice; both node vectors start at 0
// and end at 1. Evaluated by bilinear interpolation (checkerboard copula).
struct GridCopula {
  std::vector<double> u_nodes;
  std::vector<double> v_nodes;
  Eigen::MatrixXd values;
};

class CopulaSpec {
 public:
  using Variant = std::variant<CopulaM, CopulaW, CopulaP, FrechetCopula, OneParamFrechet, Gaussian2, GridCopula>;

  static CopulaSpec m() { return CopulaSpec(CopulaM{}); }
  static CopulaSpec w() { return CopulaSpec(CopulaW{}); }
  static CopulaSpec p() { return CopulaSpec(CopulaP{}); }
  static CopulaSpec frechet(double w_w, double w_p, double w_m);
  static CopulaSpec frechet1(double alpha);
  static CopulaSpec gauss2(double rho);
  // Uniform lattice: values is (n+1) x (n+1) at nodes k/n.
  static CopulaSpec grid(Eigen::MatrixXd values);
  static CopulaSpec grid(std::vector<double> u_nodes, std::vector<double> v_nodes, Eigen::MatrixXd values);

  const Variant& variant() const noexcept { return spec_; }
  std::string family() const;

  // C(u, v). Throws OutOfUnitInterval outside [0,1]^2.
  double operator()(double u, double v) const;

  // Weights (w_w, w_p, w_m) for the M/W/P/Frechet families, or false.
  bool frechet_weights(double& w_w, double& w_p, double& w_m) const;

 private:
  explicit CopulaSpec(Variant v) : spec_(std::move(v)) {}
  Variant spec_;
};

inline double eval(const CopulaSpec& c, double u, double v) { return c(u, v); }

// Frechet-family parameters: alpha is the W weight, beta the M weight.
struct FrechetParams {
  double alpha;
  double beta;
};

FrechetParams frechet_homogeneous_params(double h);
CopulaSpec frechet_homogeneous(double h);
FrechetParams frechet_compose(const FrechetParams& c1, const FrechetParams& c2);
CopulaSpec frechet_from_params(const FrechetParams& p);

// Numerical A * B on an n x n lattice. Both factors are replaced by their
// checkerboard approximations, for which the product is exact on the lattice.
CopulaSpec star(const CopulaSpec& a, const CopulaSpec& b, int grid_n = 512);

// Cumulative distribution of an ordered finite state space.
struct MarginalLadder {
  std::vector<double> cdf_levels;  // F(0), ..., F(n-1) = 1

  static MarginalLadder from_distribution(const Eigen::VectorXd& dist);
  std::size_t state_count() const noexcept { return cdf_levels.size(); }
  double at(long x) const { return x < 0 ? 0.0 : cdf_levels[static_cast<std::size_t>(x)]; }
};

struct TransitionStep {
  Eigen::MatrixXd transition;
  Eigen::VectorXd next_dist;
};

TransitionStep transition_from_copula(const CopulaSpec& copula, const Eigen::VectorXd& varpi);

// Level copula of a chain step: a checkerboard on the ladders of varpi and
// varpi * P. Extracting a transition from it returns P.
CopulaSpec chain_copula(const Eigen::MatrixXd& transition, const Eigen::VectorXd& varpi);

struct DimensionPlan {
  std::vector<Eigen::MatrixXd> transitions;     // P_0 .. P_{horizon-1}
  std::vector<Eigen::VectorXd> distributions;   // varpi_0 .. varpi_horizon
};

struct ControlPlan {
  int horizon = 0;
  std::vector<DimensionPlan> per_dimension;
};

// temporal_copulas[i] holds the copula sequence of dimension i: either one
// copula (time-homogeneous) or one per step.
ControlPlan dependence_control(const std::vector<std::vector<CopulaSpec>>& temporal_copulas,
                               const std::vector<Eigen::VectorXd>& varpi0, int horizon);

// Four-argument copula C(u1, v1, u2, v2) sampled on a uniform lattice with n
// cells per axis, evaluated by multilinear interpolation.
class Grid4Copula {
 public:
  using Function = std::function<double(double, double, double, double)>;
  static Grid4Copula sample(const Function& f, int n);

  int cells() const noexcept { return n_; }
  double operator()(double u1, double v1, double u2, double v2) const;

 private:
  Grid4Copula(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {}
  double node(int i, int j, int k, int l) const;
  int n_;
  std::vector<double> values_;
};

struct GrangerReport {
  double max_deviation = 0.0;
  double at_u1 = 0.0;
  double at_v1 = 0.0;
  double at_u2 = 0.0;
};

// Sup-norm distance between C(u1, v1, u2, 1) and v1 * C_temporal(u1, u2) on
// the lattice with grid_n cells per axis.
GrangerReport granger_product_check(const Grid4Copula& joint, const CopulaSpec& temporal_marginal, int grid_n);

}  // namespace depctl
