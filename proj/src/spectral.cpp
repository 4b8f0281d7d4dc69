#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>

#include "depctl/error.hpp"
#include "depctl/spectral.hpp"

namespace depctl {

namespace {

constexpr Eigen::Index kDenseLimit = 64;
constexpr double kResidualTol = 1e-10;
constexpr int kPowerIterations = 200000;

struct Eigenpair {
  double value;
  Eigen::VectorXd vector;
};

Eigenpair dominant_dense(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NoConvergence("perron: dense eigensolver failed");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < m.rows(); ++i) {
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  }
  Eigen::VectorXd vec = es.eigenvectors().col(best).real();
  if (vec.sum() < 0.0) vec = -vec;
  return {es.eigenvalues()(best).real(), vec};
}

// Power iteration on m + shift * I; the shift makes the Perron root strictly
// dominant even for periodic chains.
Eigenpair dominant_power(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  const double shift = m.rowwise().sum().maxCoeff() / static_cast<double>(n);
  const Eigen::MatrixXd shifted = m + shift * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / static_cast<double>(n);
  for (int it = 0; it < kPowerIterations; ++it) {
    Eigen::VectorXd y = shifted * x;
    y /= y.sum();
    const double change = (y - x).lpNorm<Eigen::Infinity>();
    x = std::move(y);
    if (change <= 1e-15) break;
  }
  const Eigen::VectorXd mx = m * x;
  return {mx.sum() / x.sum(), x};
}

Eigenpair dominant(const Eigen::MatrixXd& m) {
  return m.rows() <= kDenseLimit ? dominant_dense(m) : dominant_power(m);
}

double relative_residual(const Eigen::MatrixXd& m, const Eigen::VectorXd& x, double value) {
  const double scale = std::abs(value) * x.lpNorm<Eigen::Infinity>();
  return (m * x - value * x).lpNorm<Eigen::Infinity>() / scale;
}

}  // namespace

Eigen::MatrixXd transform_matrix(const MapKernel& kernel, double theta) {
  const Eigen::Index n = kernel.size();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = kernel.transition()(i, j);
      if (p > 0.0) f(i, j) = p * kernel.increment(i, j).mgf(theta);
    }
  }
  return f;
}

Eigen::MatrixXd transform_matrix_derivative(const MapKernel& kernel, double theta) {
  const Eigen::Index n = kernel.size();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = kernel.transition()(i, j);
      if (p > 0.0) f(i, j) = p * kernel.increment(i, j).tilted_mean(theta);
    }
  }
  return f;
}

SpectralSolution perron(const MapKernel& kernel, double theta) {
  SpectralSolution sol;
  sol.theta = theta;
  sol.pi = kernel.stationary();
  const Eigen::Index n = kernel.size();
  if (theta == 0.0) {
    sol.kappa = 0.0;
    sol.h = Eigen::VectorXd::Ones(n);
    sol.v = sol.pi;
    return sol;
  }

  const Eigen::MatrixXd f = transform_matrix(kernel, theta);
  Eigenpair right = dominant(f);
  Eigenpair left = dominant(f.transpose());
  const double rho = right.value;
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw NoConvergence("perron: Perron root is not a positive finite number");
  }
  right.vector = right.vector.cwiseAbs();
  left.vector = left.vector.cwiseAbs();

  const double res_right = relative_residual(f, right.vector, rho);
  const double res_left = relative_residual(f.transpose(), left.vector, rho);
  if (!(res_right <= kResidualTol) || !(res_left <= kResidualTol)) {
    throw NoConvergence("perron: eigenvector residual " + std::to_string(std::max(res_right, res_left)) +
                        " above tolerance at theta=" + std::to_string(theta));
  }

  sol.kappa = std::log(rho);
  sol.h = right.vector / sol.pi.dot(right.vector);
  sol.v = left.vector / left.vector.dot(sol.h);
  return sol;
}

double cgf(const MapKernel& kernel, double theta) { return perron(kernel, theta).kappa; }

double cgf_derivative(const MapKernel& kernel, double theta) {
  const SpectralSolution sol = perron(kernel, theta);
  const Eigen::MatrixXd df = transform_matrix_derivative(kernel, theta);
  return sol.v.dot(df * sol.h) * std::exp(-sol.kappa);
}

double mean_rate(const MapKernel& kernel) { return cgf_derivative(kernel, 0.0); }

MapKernel negate(const MapKernel& kernel) {
  std::vector<IncrementLaw> flipped;
  flipped.reserve(kernel.increments().size());
  for (const auto& law : kernel.increments()) flipped.push_back(IncrementLaw::negated(law));
  return MapKernel(kernel.labels(), kernel.transition(), std::move(flipped), kernel.initial_dist());
}

StabilityRoot stability_root(const MapKernel& arrival, const MapKernel& service) {
  const double rate_a = mean_rate(arrival);
  const double rate_s = mean_rate(service);
  if (rate_a >= rate_s) throw UnstableQueue(rate_a, rate_s);

  const MapKernel neg_service = negate(service);
  // Combined cgf, or nullopt outside the MGF finiteness domain or where the
  // transform underflows.
  auto combined = [&](double theta) -> std::optional<double> {
    try {
      return cgf(arrival, theta) + cgf(neg_service, theta);
    } catch (const MgfDiverged&) {
      return std::nullopt;
    } catch (const NoConvergence&) {
      return std::nullopt;
    }
  };

  double lo = 1e-3;
  double hi = 0.0;
  std::optional<double> f_start = combined(lo);
  for (int i = 0; i < 200 && !f_start; ++i) {
    lo *= 0.5;
    f_start = combined(lo);
  }
  if (!f_start) throw NoRootInDomain("stability_root: MGF diverges arbitrarily close to 0");

  double f_lo = 0.0;
  double f_hi = 0.0;
  if (*f_start > 0.0) {
    // Root lies below the starting point; the drift is negative so the
    // combined cgf is negative close enough to the origin.
    hi = lo;
    f_hi = *f_start;
    bool found = false;
    for (int i = 0; i < 1000; ++i) {
      const double cand = hi * 0.5;
      const auto fc = combined(cand);
      if (fc && *fc < 0.0) {
        lo = cand;
        f_lo = *fc;
        found = true;
        break;
      }
      hi = cand;
      f_hi = fc.value_or(f_hi);
    }
    if (!found) throw NoRootInDomain("stability_root: no sign change near the origin");
  } else {
    f_lo = *f_start;
    bool found = false;
    double cand = lo;
    for (int i = 0; i < 80 && !found; ++i) {
      cand *= 2.0;
      auto fc = combined(cand);
      if (!fc) {
        // Walk towards the divergence boundary looking for a sign change.
        double bad = cand;
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (lo + bad);
          const auto fm = combined(mid);
          if (!fm) {
            bad = mid;
          } else if (*fm > 0.0) {
            hi = mid;
            f_hi = *fm;
            found = true;
            break;
          } else {
            lo = mid;
            f_lo = *fm;
          }
        }
        if (!found) throw NoRootInDomain("stability_root: combined cgf stays negative up to the MGF boundary");
        break;
      }
      if (*fc > 0.0) {
        hi = cand;
        f_hi = *fc;
        found = true;
      } else {
        lo = cand;
        f_lo = *fc;
      }
    }
    if (!found) throw NoRootInDomain("stability_root: combined cgf never crosses zero");
  }

  // Brent's method on [lo, hi] with f(lo) < 0 < f(hi).
  double a = lo, fa = f_lo, b = hi, fb = f_hi;
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < 300; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * 2.2e-16 * std::abs(b);
    const double m = 0.5 * (c - b);
    if (std::abs(fb) <= 1e-13 || std::abs(m) <= tol) break;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = d;
      }
    } else {
      d = m;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    const auto fnew = combined(b);
    if (!fnew) throw NoConvergence("stability_root: MGF diverged inside the bracket");
    fb = *fnew;
  }

  StabilityRoot root;
  root.theta_star = b;
  root.kappa_arrival = cgf(arrival, b);
  root.residual = std::abs(fb);
  if (!(root.residual <= kResidualTol)) {
    throw NoConvergence("stability_root: residual " + std::to_string(root.residual) + " above 1e-10");
  }
  return root;
}

}  // namespace depctl
