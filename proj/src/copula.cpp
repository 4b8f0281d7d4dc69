#include "depctl/copula.hpp"

#include <algorithm>
#include <cmath>

#include "depctl/error.hpp"
#include "depctl/normal.hpp"

namespace depctl {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr double kNegativeTol = -1e-9;

void check_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw OutOfUnitInterval(std::string("copula argument ") + name + "=" + std::to_string(x) +
                            " outside [0, 1]");
  }
}

double eval_w(double u, double v) { return std::max(u + v - 1.0, 0.0); }
double eval_m(double u, double v) { return std::min(u, v); }

void validate_nodes(const std::vector<double>& nodes, const char* axis) {
  if (nodes.size() < 2 || nodes.front() != 0.0 || nodes.back() != 1.0) {
    throw InvalidArgument(std::string("grid copula: ") + axis + " nodes must run from 0 to 1");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw InvalidArgument(std::string("grid copula: ") + axis + " nodes must be strictly increasing");
    }
  }
}

// Index of the lattice cell [nodes[k], nodes[k+1]] containing x.
std::size_t cell_of(const std::vector<double>& nodes, double x) {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - nodes.begin() - 1, 0));
  return std::min(k, nodes.size() - 2);
}

double eval_grid(const GridCopula& g, double u, double v) {
  const std::size_t i = cell_of(g.u_nodes, u);
  const std::size_t j = cell_of(g.v_nodes, v);
  const double tu = (u - g.u_nodes[i]) / (g.u_nodes[i + 1] - g.u_nodes[i]);
  const double tv = (v - g.v_nodes[j]) / (g.v_nodes[j + 1] - g.v_nodes[j]);
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  const Eigen::MatrixXd& c = g.values;
  return (1.0 - tu) * (1.0 - tv) * c(ii, jj) + tu * (1.0 - tv) * c(ii + 1, jj) +
         (1.0 - tu) * tv * c(ii, jj + 1) + tu * tv * c(ii + 1, jj + 1);
}

double eval_gauss(double rho, double u, double v) {
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  return normal::bvn_cdf(normal::quantile(u), normal::quantile(v), rho);
}

FrechetCopula one_param_weights(double alpha) {
  const double a2 = alpha * alpha;
  return {a2 * (1.0 - alpha) / 2.0, 1.0 - a2, a2 * (1.0 + alpha) / 2.0};
}

std::vector<double> uniform_nodes(Eigen::Index n) {
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  for (Eigen::Index k = 0; k <= n; ++k) nodes[static_cast<std::size_t>(k)] = static_cast<double>(k) / static_cast<double>(n);
  nodes.back() = 1.0;
  return nodes;
}

// Rectangle masses of c on the uniform n x n lattice.
Eigen::MatrixXd cell_masses(const CopulaSpec& c, int n) {
  const std::vector<double> nodes = uniform_nodes(n);
  Eigen::MatrixXd values(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) values(i, j) = c(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]);
  }
  return values.bottomRightCorner(n, n) - values.topRightCorner(n, n) - values.bottomLeftCorner(n, n) +
         values.topLeftCorner(n, n);
}

// Mass that W puts on [a0, a1] x [b0, b1]: the length of the set of u in
// [a0, a1] with 1 - u in [b0, b1].
double w_cell_mass(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, 1.0 - b0) - std::max(a0, 1.0 - b1));
}

}  // namespace

CopulaSpec CopulaSpec::frechet(double w_w, double w_p, double w_m) {
  if (!(w_w >= 0.0 && w_p >= 0.0 && w_m >= 0.0)) {
    throw InvalidArgument("frechet copula: weights must be nonnegative");
  }
  if (std::abs(w_w + w_p + w_m - 1.0) > kWeightTol) {
    throw InvalidArgument("frechet copula: weights must sum to 1");
  }
  return CopulaSpec(FrechetCopula{w_w, w_p, w_m});
}

CopulaSpec CopulaSpec::frechet1(double alpha) {
  if (!(alpha >= -1.0 && alpha <= 1.0)) throw InvalidArgument("frechet1 copula: alpha must lie in [-1, 1]");
  return CopulaSpec(OneParamFrechet{alpha});
}

CopulaSpec CopulaSpec::gauss2(double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("gauss2 copula: rho must lie in (-1, 1)");
  return CopulaSpec(Gaussian2{rho});
}

CopulaSpec CopulaSpec::grid(Eigen::MatrixXd values) {
  if (values.rows() < 2 || values.rows() != values.cols()) {
    throw InvalidArgument("grid copula: values must be a square matrix with at least 2 nodes per axis");
  }
  auto nodes = uniform_nodes(values.rows() - 1);
  return grid(nodes, nodes, std::move(values));
}

CopulaSpec CopulaSpec::grid(std::vector<double> u_nodes, std::vector<double> v_nodes, Eigen::MatrixXd values) {
  validate_nodes(u_nodes, "u");
  validate_nodes(v_nodes, "v");
  if (values.rows() != static_cast<Eigen::Index>(u_nodes.size()) ||
      values.cols() != static_cast<Eigen::Index>(v_nodes.size())) {
    throw InvalidArgument("grid copula: value matrix does not match the node vectors");
  }
  return CopulaSpec(GridCopula{std::move(u_nodes), std::move(v_nodes), std::move(values)});
}

std::string CopulaSpec::family() const {
  static const char* names[] = {"m", "w", "p", "frechet", "frechet1", "gauss2", "grid"};
  return names[spec_.index()];
}

double CopulaSpec::operator()(double u, double v) const {
  check_unit(u, "u");
  check_unit(v, "v");
  return std::visit(
      [u, v](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CopulaM>) {
          return eval_m(u, v);
        } else if constexpr (std::is_same_v<T, CopulaW>) {
          return eval_w(u, v);
        } else if constexpr (std::is_same_v<T, CopulaP>) {
          return u * v;
        } else if constexpr (std::is_same_v<T, FrechetCopula>) {
          return c.w_w * eval_w(u, v) + c.w_p * u * v + c.w_m * eval_m(u, v);
        } else if constexpr (std::is_same_v<T, OneParamFrechet>) {
          const FrechetCopula f = one_param_weights(c.alpha);
          return f.w_w * eval_w(u, v) + f.w_p * u * v + f.w_m * eval_m(u, v);
        } else if constexpr (std::is_same_v<T, Gaussian2>) {
          return eval_gauss(c.rho, u, v);
        } else {
          return eval_grid(c, u, v);
        }
      },
      spec_);
}

bool CopulaSpec::frechet_weights(double& w_w, double& w_p, double& w_m) const {
  FrechetCopula f{};
  if (std::holds_alternative<CopulaM>(spec_)) {
    f = {0.0, 0.0, 1.0};
  } else if (std::holds_alternative<CopulaW>(spec_)) {
    f = {1.0, 0.0, 0.0};
  } else if (std::holds_alternative<CopulaP>(spec_)) {
    f = {0.0, 1.0, 0.0};
  } else if (const auto* fr = std::get_if<FrechetCopula>(&spec_)) {
    f = *fr;
  } else if (const auto* one = std::get_if<OneParamFrechet>(&spec_)) {
    f = one_param_weights(one->alpha);
  } else {
    return false;
  }
  w_w = f.w_w;
  w_p = f.w_p;
  w_m = f.w_m;
  return true;
}

FrechetParams frechet_homogeneous_params(double h) {
  if (!(h >= 0.0)) throw InvalidArgument("frechet_homogeneous: h must be nonnegative");
  const double s = std::exp(-h);
  return {s * s * (1.0 - s) / 2.0, s * s * (1.0 + s) / 2.0};
}

CopulaSpec frechet_from_params(const FrechetParams& p) {
  return CopulaSpec::frechet(p.alpha, 1.0 - p.alpha - p.beta, p.beta);
}

CopulaSpec frechet_homogeneous(double h) { return frechet_from_params(frechet_homogeneous_params(h)); }

FrechetParams frechet_compose(const FrechetParams& c1, const FrechetParams& c2) {
  return {c1.beta * c2.alpha + c1.alpha * c2.beta, c1.alpha * c2.alpha + c1.beta * c2.beta};
}

CopulaSpec star(const CopulaSpec& a, const CopulaSpec& b, int grid_n) {
  if (grid_n < 64) throw InvalidArgument("star: grid_n must be at least 64");
  const Eigen::MatrixXd ma = cell_masses(a, grid_n);
  const Eigen::MatrixXd mb = cell_masses(b, grid_n);
  // On checkerboards the partial derivatives are piecewise constant, so the
  // integral over each xi-cell reduces to a matrix product of masses.
  const Eigen::MatrixXd mass = static_cast<double>(grid_n) * (ma * mb);
  const Eigen::Index n = grid_n;
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    for (Eigen::Index j = 1; j <= n; ++j) {
      values(i, j) = values(i - 1, j) + values(i, j - 1) - values(i - 1, j - 1) + mass(i - 1, j - 1);
    }
  }
  const std::vector<double> nodes = uniform_nodes(n);
  for (Eigen::Index k = 0; k <= n; ++k) {
    values(n, k) = nodes[static_cast<std::size_t>(k)];
    values(k, n) = nodes[static_cast<std::size_t>(k)];
  }
  return CopulaSpec::grid(nodes, nodes, std::move(values));
}

MarginalLadder MarginalLadder::from_distribution(const Eigen::VectorXd& dist) {
  if (dist.size() == 0) throw InvalidArgument("marginal ladder: empty distribution");
  MarginalLadder ladder;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    if (!(dist(i) >= 0.0)) throw InvalidArgument("marginal ladder: negative probability");
    acc += dist(i);
    ladder.cdf_levels.push_back(acc);
  }
  if (std::abs(acc - 1.0) > kWeightTol) throw InvalidArgument("marginal ladder: distribution does not sum to 1");
  ladder.cdf_levels.back() = 1.0;
  for (double& level : ladder.cdf_levels) level = std::min(level, 1.0);
  return ladder;
}

TransitionStep transition_from_copula(const CopulaSpec& copula, const Eigen::VectorXd& varpi) {
  const MarginalLadder ladder = MarginalLadder::from_distribution(varpi);
  const Eigen::Index n = varpi.size();
  for (Eigen::Index x = 0; x < n; ++x) {
    if (varpi(x) == 0.0) throw ZeroMassState("transition_from_copula: state " + std::to_string(x) + " has zero mass");
  }

  Eigen::MatrixXd p(n, n);
  double w_w = 0.0, w_p = 0.0, w_m = 0.0;
  if (copula.frechet_weights(w_w, w_p, w_m)) {
    // Closed forms per extreme copula keep P, M and W results exact.
    for (Eigen::Index x = 0; x < n; ++x) {
      for (Eigen::Index y = 0; y < n; ++y) {
        double value = w_p * varpi(y);
        if (x == y) value += w_m;
        if (w_w > 0.0) {
          value += w_w * w_cell_mass(ladder.at(x - 1), ladder.at(x), ladder.at(y - 1), ladder.at(y)) / varpi(x);
        }
        p(x, y) = value;
      }
    }
  } else {
    Eigen::MatrixXd g(n + 1, n + 1);
    for (Eigen::Index x = -1; x < n; ++x) {
      for (Eigen::Index y = -1; y < n; ++y) g(x + 1, y + 1) = copula(ladder.at(x), ladder.at(y));
    }
    for (Eigen::Index x = 0; x < n; ++x) {
      for (Eigen::Index y = 0; y < n; ++y) {
        double value = (g(x + 1, y + 1) - g(x, y + 1) - g(x + 1, y) + g(x, y)) / varpi(x);
        if (value < 0.0) {
          if (value < kNegativeTol) {
            throw IncompatibleCopula("transition_from_copula: entry (" + std::to_string(x) + "," +
                                     std::to_string(y) + ") = " + std::to_string(value) + " is negative");
          }
          value = 0.0;
        }
        p(x, y) = value;
      }
    }
  }
  TransitionStep step;
  step.next_dist = (varpi.transpose() * p).transpose();
  step.transition = std::move(p);
  return step;
}

CopulaSpec chain_copula(const Eigen::MatrixXd& transition, const Eigen::VectorXd& varpi) {
  const Eigen::Index n = varpi.size();
  if (transition.rows() != n || transition.cols() != n) {
    throw DimensionMismatch("chain_copula: transition and distribution sizes differ");
  }
  const Eigen::VectorXd next = (varpi.transpose() * transition).transpose();
  const MarginalLadder lu = MarginalLadder::from_distribution(varpi);
  const MarginalLadder lv = MarginalLadder::from_distribution(next);

  // Lattice nodes are the distinct ladder levels; zero-mass states collapse.
  auto build_nodes = [](const MarginalLadder& ladder, std::vector<Eigen::Index>& index_of) {
    std::vector<double> nodes{0.0};
    index_of.assign(ladder.state_count(), 0);
    for (std::size_t s = 0; s < ladder.state_count(); ++s) {
      if (ladder.cdf_levels[s] > nodes.back()) nodes.push_back(ladder.cdf_levels[s]);
      index_of[s] = static_cast<Eigen::Index>(nodes.size()) - 1;
    }
    return nodes;
  };
  std::vector<Eigen::Index> iu, iv;
  const std::vector<double> u_nodes = build_nodes(lu, iu);
  const std::vector<double> v_nodes = build_nodes(lv, iv);

  // Joint cumulative mass H(x, y) = sum_{s <= x} varpi_s P(s, <= y).
  Eigen::MatrixXd joint = varpi.asDiagonal() * transition;
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(u_nodes.size()),
                                                 static_cast<Eigen::Index>(v_nodes.size()));
  Eigen::MatrixXd cumulative = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      cumulative(x, y) = joint(x, y) + (x > 0 ? cumulative(x - 1, y) : 0.0) + (y > 0 ? cumulative(x, y - 1) : 0.0) -
                         (x > 0 && y > 0 ? cumulative(x - 1, y - 1) : 0.0);
    }
  }
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      values(iu[static_cast<std::size_t>(x)], iv[static_cast<std::size_t>(y)]) = cumulative(x, y);
    }
  }
  for (std::size_t k = 0; k < v_nodes.size(); ++k) values(values.rows() - 1, static_cast<Eigen::Index>(k)) = v_nodes[k];
  for (std::size_t k = 0; k < u_nodes.size(); ++k) values(static_cast<Eigen::Index>(k), values.cols() - 1) = u_nodes[k];
  return CopulaSpec::grid(u_nodes, v_nodes, std::move(values));
}

ControlPlan dependence_control(const std::vector<std::vector<CopulaSpec>>& temporal_copulas,
                               const std::vector<Eigen::VectorXd>& varpi0, int horizon) {
  if (temporal_copulas.size() != varpi0.size()) {
    throw DimensionMismatch("dependence_control: one copula sequence and one distribution per dimension");
  }
  if (horizon < 0) throw InvalidArgument("dependence_control: horizon must be nonnegative");
  ControlPlan plan;
  plan.horizon = horizon;
  for (std::size_t i = 0; i < temporal_copulas.size(); ++i) {
    const auto& seq = temporal_copulas[i];
    if (seq.empty() || (seq.size() != 1 && seq.size() != static_cast<std::size_t>(horizon))) {
      throw DimensionMismatch("dependence_control: dimension " + std::to_string(i) +
                              " needs one copula or one per step");
    }
    DimensionPlan dim;
    dim.distributions.push_back(varpi0[i]);
    for (int j = 0; j < horizon; ++j) {
      const CopulaSpec& c = seq.size() == 1 ? seq.front() : seq[static_cast<std::size_t>(j)];
      TransitionStep step = transition_from_copula(c, dim.distributions.back());
      dim.transitions.push_back(std::move(step.transition));
      dim.distributions.push_back(std::move(step.next_dist));
    }
    plan.per_dimension.push_back(std::move(dim));
  }
  return plan;
}

Grid4Copula Grid4Copula::sample(const Function& f, int n) {
  if (n < 1) throw InvalidArgument("Grid4Copula: need at least one cell per axis");
  const auto m = static_cast<std::size_t>(n) + 1;
  std::vector<double> values(m * m * m * m);
  const double step = 1.0 / static_cast<double>(n);
  auto node = [step, n](std::size_t k) { return static_cast<int>(k) == n ? 1.0 : static_cast<double>(k) * step; };
  std::size_t idx = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) values[idx++] = f(node(i), node(j), node(k), node(l));
  return Grid4Copula(n, std::move(values));
}

double Grid4Copula::node(int i, int j, int k, int l) const {
  const auto m = static_cast<std::size_t>(n_) + 1;
  return values_[((static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j)) * m + static_cast<std::size_t>(k)) * m +
                 static_cast<std::size_t>(l)];
}

double Grid4Copula::operator()(double u1, double v1, double u2, double v2) const {
  const double args[4] = {u1, v1, u2, v2};
  int base[4];
  double frac[4];
  for (int a = 0; a < 4; ++a) {
    check_unit(args[a], "grid4");
    const double scaled = args[a] * n_;
    base[a] = std::min(static_cast<int>(std::floor(scaled)), n_ - 1);
    frac[a] = scaled - base[a];
  }
  double total = 0.0;
  for (int corner = 0; corner < 16; ++corner) {
    double weight = 1.0;
    int idx[4];
    for (int a = 0; a < 4; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = base[a] + bit;
      weight *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (weight != 0.0) total += weight * node(idx[0], idx[1], idx[2], idx[3]);
  }
  return total;
}

GrangerReport granger_product_check(const Grid4Copula& joint, const CopulaSpec& temporal_marginal, int grid_n) {
  if (grid_n < 1) throw InvalidArgument("granger_product_check: grid_n must be positive");
  GrangerReport report;
  for (int i = 0; i <= grid_n; ++i) {
    const double u1 = static_cast<double>(i) / grid_n;
    for (int j = 0; j <= grid_n; ++j) {
      const double v1 = static_cast<double>(j) / grid_n;
      for (int k = 0; k <= grid_n; ++k) {
        const double u2 = static_cast<double>(k) / grid_n;
        const double dev = std::abs(joint(u1, v1, u2, 1.0) - v1 * temporal_marginal(u1, u2));
        if (dev > report.max_deviation) report = {dev, u1, v1, u2};
      }
    }
  }
  return report;
}

}  // namespace depctl
