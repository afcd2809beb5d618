#include "mgfc/spline.hpp"

#include <algorithm>

namespace mgfc {

namespace {

void validate_grid(const Eigen::VectorXd& grid, const Eigen::MatrixXd& values) {
  if (grid.size() < 2) throw Error("CubicSpline: need at least two knots");
  if (values.rows() != grid.size()) {
    throw DimensionMismatch("CubicSpline: grid/value count mismatch");
  }
  for (int i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i + 1] > grid[i])) {
      throw Error("CubicSpline: grid must be strictly increasing");
    }
  }
}

}  // namespace

CubicSpline::CubicSpline(Eigen::VectorXd grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  validate_grid(grid_, values_);
  const int k = static_cast<int>(grid_.size()) - 1;
  Eigen::VectorXd d0 =
      (values_.row(1) - values_.row(0)).transpose() / (grid_[1] - grid_[0]);
  Eigen::VectorXd dn = (values_.row(k) - values_.row(k - 1)).transpose() /
                       (grid_[k] - grid_[k - 1]);
  build(d0, dn);
}

CubicSpline::CubicSpline(Eigen::VectorXd grid, Eigen::MatrixXd values,
                         Eigen::VectorXd start_slope, Eigen::VectorXd end_slope)
    : grid_(std::move(grid)), values_(std::move(values)) {
  validate_grid(grid_, values_);
  if (start_slope.size() != values_.cols() ||
      end_slope.size() != values_.cols()) {
    throw DimensionMismatch("CubicSpline: slope dimension mismatch");
  }
  build(start_slope, end_slope);
}

void CubicSpline::build(const Eigen::VectorXd& d0, const Eigen::VectorXd& dn) {
  const int n = static_cast<int>(grid_.size());  // knot count
  const int dims = static_cast<int>(values_.cols());
  second_.resize(n, dims);

  // Tridiagonal system for the knot second derivatives, clamped ends.
  Eigen::VectorXd a(n), b(n), c(n);
  Eigen::MatrixXd rhs(n, dims);
  auto h = [&](int i) { return grid_[i + 1] - grid_[i]; };
  auto slope = [&](int i) {
    return ((values_.row(i + 1) - values_.row(i)) / h(i)).transpose().eval();
  };

  b[0] = 2.0 * h(0);
  c[0] = h(0);
  rhs.row(0) = 6.0 * (slope(0) - d0).transpose();
  for (int i = 1; i + 1 < n; ++i) {
    a[i] = h(i - 1);
    b[i] = 2.0 * (h(i - 1) + h(i));
    c[i] = h(i);
    rhs.row(i) = 6.0 * (slope(i) - slope(i - 1)).transpose();
  }
  a[n - 1] = h(n - 2);
  b[n - 1] = 2.0 * h(n - 2);
  rhs.row(n - 1) = 6.0 * (dn - slope(n - 2)).transpose();

  // Thomas algorithm.
  for (int i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    rhs.row(i) -= w * rhs.row(i - 1);
  }
  second_.row(n - 1) = rhs.row(n - 1) / b[n - 1];
  for (int i = n - 2; i >= 0; --i) {
    second_.row(i) = (rhs.row(i) - c[i] * second_.row(i + 1)) / b[i];
  }
}

int CubicSpline::cell(double s) const {
  const int n = static_cast<int>(grid_.size());
  auto it = std::upper_bound(grid_.data(), grid_.data() + n, s);
  int i = static_cast<int>(it - grid_.data()) - 1;
  return std::clamp(i, 0, n - 2);
}

Eigen::VectorXd CubicSpline::eval(double s, int derivative) const {
  const int i = cell(s);
  const double h = grid_[i + 1] - grid_[i];
  const double t = s - grid_[i];
  const auto y0 = values_.row(i);
  const auto y1 = values_.row(i + 1);
  const auto m0 = second_.row(i);
  const auto m1 = second_.row(i + 1);
  auto b = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
  auto d = (m1 - m0) / h;
  switch (derivative) {
    case 0:
      return (y0 + t * b + 0.5 * t * t * m0 + t * t * t / 6.0 * d).transpose();
    case 1:
      return (b + t * m0 + 0.5 * t * t * d).transpose();
    case 2:
      return (m0 + t * d).transpose();
    case 3:
      return d.transpose();
    default:
      throw Error("CubicSpline: derivative order must be 0..3");
  }
}

}  // namespace mgfc
