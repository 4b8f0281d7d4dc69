// Univariate and bivariate standard normal distribution functions.
#pragma once

namespace depctl::normal {

double pdf(double x);
double cdf(double x);

// Inverse of cdf on (0, 1); Acklam's rational approximation followed by one
// Halley step on cdf. Returns -inf/+inf at 0/1.
double quantile(double p);

// P(X <= a, Y <= b) for standard normals with correlation rho, |rho| < 1.
// Genz's Gauss-Legendre scheme; infinite arguments are accepted.
double bvn_cdf(double a, double b, double rho);

}  // namespace depctl::normal
