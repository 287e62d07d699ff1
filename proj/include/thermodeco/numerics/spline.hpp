#pragma once

#include <span>
#include <vector>

namespace thermodeco::numerics {

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
/// Evaluation outside [x_0, x_n] extrapolates with the end cubic.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives
};

}  // namespace thermodeco::numerics
