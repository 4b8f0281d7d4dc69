#include "depctl/bounds.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "depctl/error.hpp"

namespace depctl {

namespace {

constexpr int kDccGridPoints = 200;
constexpr double kDccGridSpan = 1e-4;  // smallest grid theta relative to theta*
constexpr int kDccScanPoints = 256;
constexpr std::uintmax_t kDccRootIterations = 200;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Eigenvector data shared by every bound formula at one theta.
struct Spectra {
  double theta;
  SpectralSolution a;    // arrival
  SpectralSolution ns;   // negated service
  double h_plus_delay;
  double h_minus_delay;
  double h_plus_backlog;
  double h_minus_backlog;
};

Spectra spectra_at(const MapKernel& arrival, const MapKernel& neg_service, double theta) {
  Spectra s{theta, perron(arrival, theta), perron(neg_service, theta), 0, 0, 0, 0};
  const double a_max = s.a.h.maxCoeff();
  const double a_min = s.a.h.minCoeff();
  const double s_max = s.ns.h.maxCoeff();
  const double s_min = s.ns.h.minCoeff();
  const double damp = std::exp(-s.a.kappa);
  s.h_plus_delay = (a_max / a_min) / s_min;
  s.h_minus_delay = damp * (a_min / a_max) * (a_min / a_max) / s_max;
  s.h_plus_backlog = 1.0 / (a_min * s_min);
  s.h_minus_backlog = damp * a_min / (a_max * a_max) / s_max;
  return s;
}

std::string pair_label(const MapKernel& arrival, Eigen::Index i, const MapKernel& service, Eigen::Index j) {
  return "A:" + arrival.labels()[static_cast<std::size_t>(i)] + "|S:" + service.labels()[static_cast<std::size_t>(j)];
}

BoundReport make_report(double level, double lower, double upper, double theta_star, double h_plus, double h_minus,
                        std::string conditioning) {
  BoundReport r;
  r.level = level;
  r.lower_raw = lower;
  r.upper_raw = upper;
  r.lower = clamp01(lower);
  r.upper = clamp01(upper);
  r.theta_star = theta_star;
  r.h_plus = h_plus;
  r.h_minus = h_minus;
  r.conditioning = std::move(conditioning);
  return r;
}

long slots_of(double d) { return d <= 0.0 ? 0 : static_cast<long>(std::floor(d)); }

// Root of an increasing-through-zero function f on (0, inf), given f(0) < 0.
// The bracket grows geometrically from `scale`.
double positive_root(const std::function<double(double)>& f, double scale, const char* what) {
  double lo = 0.0;
  double f_lo = f(0.0);
  if (!(f_lo < 0.0)) throw NoDerivativeRoot(std::string(what) + ": equation is not negative at theta = 0");
  double hi = scale;
  double f_hi = 0.0;
  bool found = false;
  for (int i = 0; i < 200; ++i) {
    try {
      f_hi = f(hi);
    } catch (const MgfDiverged&) {
      throw NoDerivativeRoot(std::string(what) + ": MGF diverges before the equation changes sign");
    }
    if (f_hi >= 0.0) {
      found = true;
      break;
    }
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
  }
  if (!found) throw NoDerivativeRoot(std::string(what) + ": equation never changes sign");
  if (f_hi == 0.0) return hi;
  std::uintmax_t max_iter = 300;
  const auto bracket = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                         boost::math::tools::eps_tolerance<double>(50), max_iter);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace

DecayRates decay_rates(const MapKernel& arrival, const MapKernel& service) {
  const StabilityRoot root = stability_root(arrival, service);
  return {root.kappa_arrival, root.theta_star};
}

std::vector<BoundReport> delay_bounds(const MapKernel& arrival, const MapKernel& service,
                                      const std::vector<double>& d_range) {
  const StabilityRoot root = stability_root(arrival, service);
  const Spectra s = spectra_at(arrival, negate(service), root.theta_star);
  const double kappa = s.a.kappa;
  const Eigen::VectorXd& hs = s.ns.h;
  const Eigen::VectorXd& varpi_s = service.initial_dist();

  std::vector<BoundReport> out;
  for (double d : d_range) {
    const double decay = std::exp(-d * kappa);
    for (Eigen::Index i = 0; i < arrival.size(); ++i) {
      for (Eigen::Index j = 0; j < service.size(); ++j) {
        out.push_back(make_report(d, s.h_minus_delay * hs(j) * decay, s.h_plus_delay * hs(j) * decay,
                                  root.theta_star, s.h_plus_delay, s.h_minus_delay, pair_label(arrival, i, service, j)));
      }
    }
    // Weights varpi^A_d x varpi^S_0; the factor depends on the service
    // state only, so the arrival weights sum out.
    const Eigen::VectorXd varpi_a = arrival.distribution_at(slots_of(d));
    double factor = 0.0;
    for (Eigen::Index i = 0; i < arrival.size(); ++i) {
      for (Eigen::Index j = 0; j < service.size(); ++j) factor += varpi_a(i) * varpi_s(j) * hs(j);
    }
    out.push_back(make_report(d, s.h_minus_delay * factor * decay, s.h_plus_delay * factor * decay, root.theta_star,
                              s.h_plus_delay, s.h_minus_delay, "avg"));
  }
  return out;
}

std::vector<BoundReport> backlog_bounds(const MapKernel& arrival, const MapKernel& service,
                                        const std::vector<double>& b_range) {
  const StabilityRoot root = stability_root(arrival, service);
  const double theta = root.theta_star;
  const Spectra s = spectra_at(arrival, negate(service), theta);
  const Eigen::VectorXd& ha = s.a.h;
  const Eigen::VectorXd& hs = s.ns.h;
  const Eigen::VectorXd& varpi_a = arrival.initial_dist();
  const Eigen::VectorXd& varpi_s = service.initial_dist();

  std::vector<BoundReport> out;
  for (double b : b_range) {
    const double decay = std::exp(-theta * b);
    double factor = 0.0;
    for (Eigen::Index i = 0; i < arrival.size(); ++i) {
      for (Eigen::Index j = 0; j < service.size(); ++j) {
        const double f = ha(i) * hs(j);
        factor += varpi_a(i) * varpi_s(j) * f;
        out.push_back(make_report(b, s.h_minus_backlog * f * decay, s.h_plus_backlog * f * decay, theta,
                                  s.h_plus_backlog, s.h_minus_backlog, pair_label(arrival, i, service, j)));
      }
    }
    out.push_back(make_report(b, s.h_minus_backlog * factor * decay, s.h_plus_backlog * factor * decay, theta,
                              s.h_plus_backlog, s.h_minus_backlog, "avg"));
  }
  return out;
}

std::string to_string(HorizonBranch branch) {
  return branch == HorizonBranch::ShortHorizon ? "short-horizon" : "long-horizon-remainder";
}

HorizonBoundReport horizon_delay_bound(const MapKernel& arrival, const MapKernel& service, double y, double d) {
  if (!(y > 0.0)) throw InvalidArgument("horizon_delay_bound: y must be positive");
  const StabilityRoot root = stability_root(arrival, service);
  const MapKernel neg_service = negate(service);
  const double gamma = root.theta_star;
  const double ka_dot = cgf_derivative(arrival, gamma);
  const double ks_dot = cgf_derivative(neg_service, gamma);

  HorizonBoundReport r;
  r.level = d;
  r.y = y;
  r.y_gamma = ka_dot / (ka_dot + ks_dot);
  r.branch = y < r.y_gamma ? HorizonBranch::ShortHorizon : HorizonBranch::LongHorizonRemainder;
  r.theta = positive_root(
      [&](double th) { return y * cgf_derivative(neg_service, th) + (y - 1.0) * cgf_derivative(arrival, th); },
      gamma, "horizon_delay_bound");
  const Spectra s = spectra_at(arrival, neg_service, r.theta);
  r.theta_y = -y * s.ns.kappa - (y - 1.0) * s.a.kappa;
  const double factor = service.initial_dist().dot(s.ns.h);
  r.bound_raw = s.h_plus_delay * factor * std::exp(-d * r.theta_y);
  r.bound = clamp01(r.bound_raw);
  return r;
}

HorizonBoundReport horizon_backlog_bound(const MapKernel& arrival, const MapKernel& service, double y, double b) {
  if (!(y > 0.0)) throw InvalidArgument("horizon_backlog_bound: y must be positive");
  const StabilityRoot root = stability_root(arrival, service);
  const MapKernel neg_service = negate(service);
  const double gamma = root.theta_star;
  const double sum_dot = cgf_derivative(arrival, gamma) + cgf_derivative(neg_service, gamma);

  HorizonBoundReport r;
  r.level = b;
  r.y = y;
  r.y_gamma = 1.0 / sum_dot;
  r.branch = y < r.y_gamma ? HorizonBranch::ShortHorizon : HorizonBranch::LongHorizonRemainder;
  r.theta = positive_root(
      [&](double th) { return y * (cgf_derivative(arrival, th) + cgf_derivative(neg_service, th)) - 1.0; }, gamma,
      "horizon_backlog_bound");
  const Spectra s = spectra_at(arrival, neg_service, r.theta);
  r.theta_y = r.theta - y * (s.a.kappa + s.ns.kappa);
  const double factor = arrival.initial_dist().dot(s.a.h) * service.initial_dist().dot(s.ns.h);
  r.bound_raw = s.h_plus_backlog * factor * std::exp(-b * r.theta_y);
  r.bound = clamp01(r.bound_raw);
  return r;
}

ConstantArrivalReport constant_arrival_bounds(double lambda, const MapKernel& service,
                                              const std::vector<double>& d_range) {
  const MapKernel arrival = MapKernel::single_state(IncrementLaw::constant(lambda), "const");
  const StabilityRoot root = stability_root(arrival, service);
  const double theta = root.theta_star;
  const SpectralSolution ns = perron(negate(service), theta);
  const Eigen::VectorXd& h = ns.h;
  const double h_max = h.maxCoeff();
  const double h_min = h.minCoeff();
  const double first_step = std::exp(-theta * lambda);  // e^{-theta A(1)}
  const double h_plus = 1.0 / h_min;
  const double h_minus = first_step / h_max;
  const double avg_h = service.initial_dist().dot(h);

  ConstantArrivalReport report;
  report.theta = theta;
  for (double d : d_range) {
    const double decay = std::exp(-theta * lambda * d);
    for (auto* rows : {&report.delay, &report.backlog}) {
      const double level = rows == &report.delay ? d : lambda * d;
      for (Eigen::Index j = 0; j < service.size(); ++j) {
        rows->push_back(make_report(level, h_minus * h(j) * decay, h_plus * h(j) * decay, theta, h_plus, h_minus,
                                    "S:" + service.labels()[static_cast<std::size_t>(j)]));
      }
      rows->push_back(make_report(level, h_minus * avg_h * decay, h_plus * avg_h * decay, theta, h_plus, h_minus, "avg"));
    }
  }
  return report;
}

DccBound dcc_upper(const MapKernel& arrival, const MapKernel& service, double d, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("dcc_upper: epsilon must lie in (0, 1)");
  if (!(d > 0.0)) throw InvalidArgument("dcc_upper: d must be positive");
  const StabilityRoot root = stability_root(arrival, service);
  const MapKernel neg_service = negate(service);
  const Eigen::VectorXd& varpi_s = service.initial_dist();

  auto objective = [&](double theta) {
    const Spectra s = spectra_at(arrival, neg_service, theta);
    double tail = 0.0;
    for (Eigen::Index j = 0; j < service.size(); ++j) {
      tail += varpi_s(j) * (-1.0 / (theta * d)) * std::log(epsilon / (s.h_plus_delay * s.ns.h(j)));
    }
    return s.a.kappa / theta + tail;
  };

  const double theta_max = root.theta_star;
  std::vector<double> grid(kDccGridPoints);
  std::vector<double> values(kDccGridPoints);
  const double log_lo = std::log(theta_max * kDccGridSpan);
  const double log_hi = std::log(theta_max);
  for (int k = 0; k < kDccGridPoints; ++k) {
    grid[static_cast<std::size_t>(k)] =
        k + 1 == kDccGridPoints ? theta_max : std::exp(log_lo + (log_hi - log_lo) * k / (kDccGridPoints - 1));
    values[static_cast<std::size_t>(k)] = objective(grid[static_cast<std::size_t>(k)]);
  }
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  double best_theta = grid[best];
  double best_value = values[best];

  // Golden-section refinement between the neighbours of the grid minimum.
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  if (b > a) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double e = a + inv_phi * (b - a);
    double fc = objective(c);
    double fe = objective(e);
    for (int it = 0; it < 100 && (b - a) > 1e-12 * b; ++it) {
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - inv_phi * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + inv_phi * (b - a);
        fe = objective(e);
      }
    }
    const double mid = 0.5 * (a + b);
    const double f_mid = objective(mid);
    if (f_mid < best_value) {
      best_value = f_mid;
      best_theta = mid;
    }
  }

  DccBound out;
  out.value = std::max(best_value, 0.0);
  out.theta = best_theta;
  out.asymptotic_cap = root.kappa_arrival / root.theta_star;
  return out;
}

DccInterval constant_dcc_interval(const MapKernel& service, double d, double epsilon, const Eigen::VectorXd& varpi) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("constant_dcc_interval: epsilon must lie in (0, 1)");
  if (!(d > 0.0)) throw InvalidArgument("constant_dcc_interval: d must be positive");
  if (varpi.size() != service.size()) throw DimensionMismatch("constant_dcc_interval: varpi size differs from service");
  const MapKernel neg_service = negate(service);
  const double mean = mean_rate(service);

  // lambda - T(lambda), where T is the rate at which the bound equals epsilon.
  // Positive means lambda meets the constraint; theta is infinite (and the
  // constraint trivially met) when lambda never exceeds the service.
  int evaluations = 0;
  auto excess = [&](bool from_upper, double lambda, double* theta_out) {
    ++evaluations;
    StabilityRoot root;
    try {
      root = stability_root(MapKernel::single_state(IncrementLaw::constant(lambda), "const"), service);
    } catch (const NoRootInDomain&) {
      if (theta_out) *theta_out = std::numeric_limits<double>::infinity();
      return lambda;
    }
    const SpectralSolution ns = perron(neg_service, root.theta_star);
    const double avg_h = varpi.dot(ns.h);
    const double inside = from_upper ? epsilon * ns.h.minCoeff() / avg_h
                                     : std::exp(root.theta_star * lambda) * epsilon * ns.h.maxCoeff() / avg_h;
    if (theta_out) *theta_out = root.theta_star;
    return lambda + std::log(inside) / (root.theta_star * d);
  };

  // The capacity is a supremum, so take the largest root below the mean rate:
  // scan down from the mean (where T diverges) to the first feasible point.
  auto solve = [&](bool from_upper, double& theta_out, int& count) {
    evaluations = 0;
    double hi = mean * (1.0 - 1.0 / kDccScanPoints);
    double f_hi = excess(from_upper, hi, nullptr);
    if (f_hi >= 0.0) throw NoFixedPoint("constant_dcc_interval: bound is met up to the mean service rate");
    for (int k = 2; k < kDccScanPoints; ++k) {
      const double lo = mean * (1.0 - static_cast<double>(k) / kDccScanPoints);
      const double f_lo = excess(from_upper, lo, nullptr);
      if (f_lo < 0.0) {
        hi = lo;
        f_hi = f_lo;
        continue;
      }
      auto f = [&](double x) { return excess(from_upper, x, nullptr); };
      std::uintmax_t iters = kDccRootIterations;
      const auto bracket = boost::math::tools::toms748_solve(
          f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), iters);
      const double lambda = 0.5 * (bracket.first + bracket.second);
      excess(from_upper, lambda, &theta_out);
      count = evaluations;
      return lambda;
    }
    throw NoFixedPoint("constant_dcc_interval: no rate in (0, mean) meets the bound");
  };

  DccInterval out;
  double theta_up = 0.0, theta_low = 0.0;
  int n_up = 0, n_low = 0;
  const double from_upper = solve(true, theta_up, n_up);
  const double from_lower = solve(false, theta_low, n_low);
  // The upper tail bound gives a guaranteed rate, the lower tail bound an
  // unattainable one; order them so that lambda_lo <= lambda_hi.
  if (from_upper <= from_lower) {
    out = {from_upper, from_lower, theta_up, theta_low, n_up, n_low};
  } else {
    out = {from_lower, from_upper, theta_low, theta_up, n_low, n_up};
  }
  return out;
}

}  // namespace depctl
