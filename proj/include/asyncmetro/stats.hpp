#pragma once

#include <span>
#include <vector>

namespace asyncmetro::stats {

/// Half the L1 distance between two probability vectors of equal length.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Normalizes counts into frequencies. All-zero input gives all zeros.
std::vector<double> frequencies(std::span<const double> counts);

double mean(std::span<const double> xs);
double median(std::vector<double> xs);
double max(std::span<const double> xs);

/// Ordinary least squares y ~ X b, where every row of X already contains the
/// regressors (add a column of ones for an intercept).
struct LeastSquares {
  std::vector<double> coefficients;
  std::vector<double> residuals;
  double r_squared = 0.0;
};

LeastSquares least_squares(const std::vector<std::vector<double>>& rows, std::span<const double> y);

/// y ~ a + b x.
LeastSquares fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace asyncmetro::stats
