#include "asyncmetro/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace asyncmetro::stats {

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

std::vector<double> frequencies(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::vector<double> out(counts.size(), 0.0);
  if (total <= 0.0) return out;
  for (std::size_t k = 0; k < counts.size(); ++k) out[k] = counts[k] / total;
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

double max(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("max of empty sample");
  return *std::max_element(xs.begin(), xs.end());
}

LeastSquares least_squares(const std::vector<std::vector<double>>& rows, std::span<const double> y) {
  if (rows.size() != y.size() || rows.empty()) throw std::invalid_argument("least_squares: bad shape");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != k) throw std::invalid_argument("least_squares: ragged rows");
    for (Eigen::Index j = 0; j < k; ++j) X(i, j) = rows[i][j];
    Y(i) = y[i];
  }
  const Eigen::VectorXd b = X.completeOrthogonalDecomposition().solve(Y);
  const Eigen::VectorXd r = Y - X * b;

  LeastSquares out;
  out.coefficients.assign(b.data(), b.data() + k);
  out.residuals.assign(r.data(), r.data() + n);
  const double ybar = Y.mean();
  const double ss_tot = (Y.array() - ybar).square().sum();
  const double ss_res = r.squaredNorm();
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return out;
}

LeastSquares fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: length mismatch");
  std::vector<std::vector<double>> rows;
  rows.reserve(x.size());
  for (double xi : x) rows.push_back({1.0, xi});
  return least_squares(rows, y);
}

}  // namespace asyncmetro::stats
