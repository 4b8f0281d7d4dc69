#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "depctl/error.hpp"
#include "depctl/quadrature.hpp"
#include "depctl/spectral.hpp"

namespace depctl {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kMaxLogMgf = 700.0;

// Integrals of exp(-g) (1 + snr g)^k * weight(g) over g >= 0, returned as
// (log scale m, scaled integral I) so that the value is exp(m) * I.
struct ScaledIntegral {
  double log_scale;
  double value;
};

template <class Weight>
ScaledIntegral rayleigh_integral(double snr, double k, Weight weight) {
  double peak = 0.0;
  if (k * snr > 1.0) peak = k - 1.0 / snr;
  const auto log_kernel = [snr, k](double g) { return -g + k * std::log1p(snr * g); };
  const double m = log_kernel(peak);

  std::vector<double> breaks{1.0 / snr};
  if (peak > 0.0) {
    const double width = std::sqrt(k + 1.0);
    breaks.push_back(peak);
    for (double w : {-5.0, -2.0, 2.0, 5.0}) {
      const double x = peak + w * width;
      if (x > 0.0) breaks.push_back(x);
    }
  }
  if (k < -1.0) {
    const double scale = 1.0 / (snr * -k);
    breaks.push_back(scale);
    breaks.push_back(10.0 * scale);
  }
  breaks.push_back(std::max(peak, 1.0) + 40.0);

  auto integrand = [&](double g) {
    const double e = log_kernel(g) - m;
    if (e < -745.0) return 0.0;
    return std::exp(e) * weight(g);
  };
  const quad::Result r = quad::integrate_to_infinity(integrand, 0.0, {}, breaks);
  if (!r.converged) {
    throw MgfDiverged("Rayleigh capacity MGF quadrature did not converge (exponent " +
                      std::to_string(k) + ")");
  }
  return {m, r.value};
}

double checked_exp(double log_value, const char* what) {
  if (!(log_value < kMaxLogMgf)) {
    throw MgfDiverged(std::string(what) + ": value overflows (log " +
                      std::to_string(log_value) + ")");
  }
  return std::exp(log_value);
}

}  // namespace

IncrementLaw IncrementLaw::constant(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("constant increment must be finite");
  return IncrementLaw(Constant{value});
}

IncrementLaw IncrementLaw::pmf(std::vector<double> support, std::vector<double> probs) {
  if (support.empty() || support.size() != probs.size()) {
    throw InvalidArgument("pmf: support and probs must be non-empty and equally long");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!std::isfinite(support[i])) throw InvalidArgument("pmf: support must be finite");
    if (i > 0 && !(support[i] > support[i - 1])) {
      throw InvalidArgument("pmf: support must be strictly increasing");
    }
    if (!(probs[i] >= 0.0)) throw InvalidArgument("pmf: probabilities must be nonnegative");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("pmf: probabilities must sum to 1 (got " + std::to_string(total) + ")");
  }
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  cdf.back() = 1.0;
  return IncrementLaw(DiscretePmf{std::move(support), std::move(probs), std::move(cdf)});
}

IncrementLaw IncrementLaw::rayleigh(double bandwidth, double snr) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidArgument("rayleigh: bandwidth must be positive");
  }
  if (!(snr > 0.0) || !std::isfinite(snr)) throw InvalidArgument("rayleigh: snr must be positive");
  return IncrementLaw(RayleighCapacity{bandwidth, snr});
}

IncrementLaw IncrementLaw::negated(IncrementLaw inner) {
  return IncrementLaw(Negated{std::make_shared<const IncrementLaw>(std::move(inner))});
}

IncrementLaw IncrementLaw::shifted(IncrementLaw inner, double offset) {
  if (!std::isfinite(offset)) throw InvalidArgument("shifted: offset must be finite");
  return IncrementLaw(Shifted{std::make_shared<const IncrementLaw>(std::move(inner)), offset});
}

IncrementLaw IncrementLaw::gaussian(double mean, double variance, int points) {
  if (!(variance > 0.0) || points < 2) {
    throw InvalidArgument("gaussian: variance must be positive and points >= 2");
  }
  // Golub-Welsch for the probabilists' Hermite weight exp(-z^2 / 2).
  const int n = points;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  const double sd = std::sqrt(variance);
  std::vector<double> support(n), probs(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    support[i] = mean + sd * es.eigenvalues()(i);
    probs[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return pmf(std::move(support), std::move(probs));
}

double IncrementLaw::mgf(double theta) const {
  return std::visit(
      [theta](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return checked_exp(theta * law.value, "constant mgf");
        } else if constexpr (std::is_same_v<T, DiscretePmf>) {
          double top = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < law.support.size(); ++i) {
            if (law.probs[i] > 0.0) top = std::max(top, theta * law.support[i]);
          }
          double sum = 0.0;
          for (std::size_t i = 0; i < law.support.size(); ++i) {
            sum += law.probs[i] * std::exp(theta * law.support[i] - top);
          }
          return checked_exp(top + std::log(sum), "pmf mgf");
        } else if constexpr (std::is_same_v<T, RayleighCapacity>) {
          if (theta == 0.0) return 1.0;
          const double k = theta * law.bandwidth / kLn2;
          const auto s = rayleigh_integral(law.snr, k, [](double) { return 1.0; });
          return checked_exp(s.log_scale + std::log(s.value), "rayleigh mgf");
        } else if constexpr (std::is_same_v<T, Negated>) {
          return law.inner->mgf(-theta);
        } else {
          return checked_exp(theta * law.offset, "shifted mgf") * law.inner->mgf(theta);
        }
      },
      law_);
}

double IncrementLaw::tilted_mean(double theta) const {
  return std::visit(
      [theta](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return law.value * checked_exp(theta * law.value, "constant tilted mean");
        } else if constexpr (std::is_same_v<T, DiscretePmf>) {
          double sum = 0.0;
          for (std::size_t i = 0; i < law.support.size(); ++i) {
            sum += law.probs[i] * law.support[i] * std::exp(theta * law.support[i]);
          }
          if (!std::isfinite(sum)) throw MgfDiverged("pmf tilted mean overflows");
          return sum;
        } else if constexpr (std::is_same_v<T, RayleighCapacity>) {
          const double scale = law.bandwidth / kLn2;
          const double k = theta * scale;
          const double snr = law.snr;
          const auto s =
              rayleigh_integral(snr, k, [snr, scale](double g) { return scale * std::log1p(snr * g); });
          return checked_exp(s.log_scale + std::log(s.value), "rayleigh tilted mean");
        } else if constexpr (std::is_same_v<T, Negated>) {
          return -law.inner->tilted_mean(-theta);
        } else {
          const double shift = checked_exp(theta * law.offset, "shifted tilted mean");
          return shift * (law.inner->tilted_mean(theta) + law.offset * law.inner->mgf(theta));
        }
      },
      law_);
}

double IncrementLaw::sample(CounterRng& rng) const {
  return std::visit(
      [&rng](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return law.value;
        } else if constexpr (std::is_same_v<T, DiscretePmf>) {
          const double u = rng.uniform();
          const auto it = std::upper_bound(law.cdf.begin(), law.cdf.end(), u);
          const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - law.cdf.begin()),
                                                 law.support.size() - 1);
          return law.support[idx];
        } else if constexpr (std::is_same_v<T, RayleighCapacity>) {
          return law.bandwidth / kLn2 * std::log1p(law.snr * rng.exponential());
        } else if constexpr (std::is_same_v<T, Negated>) {
          return -law.inner->sample(rng);
        } else {
          return law.inner->sample(rng) + law.offset;
        }
      },
      law_);
}

bool operator==(const IncrementLaw& a, const IncrementLaw& b) {
  if (a.law_.index() != b.law_.index()) return false;
  return std::visit(
      [&b](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.law_);
        if constexpr (std::is_same_v<T, IncrementLaw::Constant>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, IncrementLaw::DiscretePmf>) {
          return lhs.support == rhs.support && lhs.probs == rhs.probs;
        } else if constexpr (std::is_same_v<T, IncrementLaw::RayleighCapacity>) {
          return lhs.bandwidth == rhs.bandwidth && lhs.snr == rhs.snr;
        } else if constexpr (std::is_same_v<T, IncrementLaw::Negated>) {
          return *lhs.inner == *rhs.inner;
        } else {
          return lhs.offset == rhs.offset && *lhs.inner == *rhs.inner;
        }
      },
      a.law_);
}

}  // namespace depctl
