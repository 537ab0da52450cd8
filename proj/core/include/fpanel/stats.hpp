#ifndef FPANEL_STATS_HPP
#define FPANEL_STATS_HPP

namespace fpanel {

// Standard normal CDF, accurate in both tails (built on erfc).
double normal_cdf(double x);

// Standard normal quantile (inverse CDF) for p in (0, 1), via the
// Wichura AS241 rational approximations (about 1e-15 relative accuracy).
// Throws std::invalid_argument outside (0, 1).
double normal_quantile(double p);

// log of the Beta function, log B(a, b), for a, b > 0.
double log_beta(double a, double b);

// Regularized incomplete beta function I_x(a, b) for x in [0, 1] and
// a, b > 0, evaluated with the Lentz continued fraction. This is the CDF
// of the Beta(a, b) distribution.
double regularized_incomplete_beta(double x, double a, double b);

// Quantile of the Beta(a, b) distribution: the x with I_x(a, b) = p.
// Solved by bisection to an interval of width <= 1e-12, which is plenty
// for the coverage probabilities this library needs.
double beta_quantile(double p, double a, double b);

} // namespace fpanel

#endif
