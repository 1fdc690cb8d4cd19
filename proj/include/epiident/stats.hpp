#pragma once

#include <span>
#include <vector>

namespace epiident {

double mean_of(std::span<const double> xs);
/// Sample variance with divisor (n - ddof); ddof=1 for the unbiased estimator.
double variance_of(std::span<const double> xs, int ddof = 1);
double stddev_of(std::span<const double> xs, int ddof = 1);

/// Linear-interpolation quantile (type 7) of an UNSORTED sample, p in [0,1].
double percentile(std::vector<double> xs, double p);

/// Spearman rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// One-sample Kolmogorov-Smirnov statistic against Exp(1).
double ks_statistic_exp1(std::vector<double> xs);
/// Two-sample KS statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic Kolmogorov critical constant c(alpha) = sqrt(-ln(alpha/2)/2);
/// one-sample rejects when sqrt(n)*D > c, two-sample when
/// D > c*sqrt((n+m)/(n*m)).
double kolmogorov_critical(double alpha);

double normal_pdf(double z);
double normal_cdf(double z);
/// log(Phi(z)) with an asymptotic series in the deep lower tail.
double normal_logcdf(double z);
/// Inverse Mills ratio phi(z)/Phi(z), stable for large negative z.
double normal_hazard(double z);

double digamma(double x);
double trigamma(double x);

/// Quantile of the chi-square distribution with 2 degrees of freedom.
double chi2_quantile_df2(double p);

}  // namespace epiident
