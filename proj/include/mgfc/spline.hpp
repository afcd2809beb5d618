#pragma once

#include <Eigen/Dense>

#include "mgfc/errors.hpp"

namespace mgfc {

// Clamped cubic spline over a strictly increasing grid, vector-valued.
// End slopes default to one-sided finite differences of the knots.
class CubicSpline {
 public:
  CubicSpline(Eigen::VectorXd grid, Eigen::MatrixXd values);
  CubicSpline(Eigen::VectorXd grid, Eigen::MatrixXd values,
              Eigen::VectorXd start_slope, Eigen::VectorXd end_slope);

  int dims() const { return static_cast<int>(values_.cols()); }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::MatrixXd& knots() const { return values_; }

  // derivative order 0..3; the third derivative is piecewise constant.
  Eigen::VectorXd eval(double s, int derivative = 0) const;

 private:
  void build(const Eigen::VectorXd& d0, const Eigen::VectorXd& dn);
  int cell(double s) const;

  Eigen::VectorXd grid_;
  Eigen::MatrixXd values_;   // (K+1) x dims
  Eigen::MatrixXd second_;   // second derivatives at knots
};

}  // namespace mgfc
