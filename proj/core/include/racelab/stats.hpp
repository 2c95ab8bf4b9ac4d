#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace racelab::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance (n - 1 denominator).
double variance(std::span<const double> xs);
double median(std::vector<double> xs);
/// Linear-interpolation quantile (type 7), q in [0, 1].
double quantile(std::vector<double> xs, double q);

struct Interval {
    double lo;
    double hi;
};

/// Wilson score interval for a binomial proportion at confidence level
/// given by the standard normal quantile z (1.959964 for 95 %).
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Wasserstein-1 distance between two empirical measures on the line.
double wasserstein1(std::vector<double> a, std::vector<double> b);

struct KsResult {
    double statistic;
    double p_value;
};
/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
    double slope;
    double intercept;
    double slope_stderr;
    double r;  ///< Pearson correlation
    std::size_t n;
};
/// Ordinary least squares of y on x. Throws std::domain_error when x has
/// zero variance or fewer than two points are given.
LinearFit ols(std::span<const double> x, std::span<const double> y);

double pearson(std::span<const double> x, std::span<const double> y);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Survival function of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Student-t CDF and quantile.
double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

}  // namespace racelab::stats
