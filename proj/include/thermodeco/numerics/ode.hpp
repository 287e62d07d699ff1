#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermodeco/numerics/quadrature.hpp"

namespace thermodeco::numerics {

class OdeError : public std::runtime_error {
 public:
  OdeError(const std::string& what, double last_t, double last_y)
      : std::runtime_error(what), last_t_(last_t), last_y_(last_y) {}

  double last_t() const noexcept { return last_t_; }
  double last_y() const noexcept { return last_y_; }

 private:
  double last_t_;
  double last_y_;
};

/// Accepted steps of a scalar ODE solution with cubic Hermite dense output.
class OdeSolution {
 public:
  OdeSolution(std::vector<double> t, std::vector<double> y, std::vector<double> dydt);

  double operator()(double t) const;

  std::span<const double> times() const { return t_; }
  std::span<const double> values() const { return y_; }
  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }

 private:
  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> dydt_;
};

using OdeRhs = std::function<double(double t, double y)>;

/// Dormand-Prince 5(4) with adaptive steps. The local error per step is held
/// below abs_tol + rel_tol * |y|; only rel_tol and abs_tol of spec are used.
OdeSolution integrate_ode(const OdeRhs& rhs, double y0, double t0, double t1,
                          const QuadratureSpec& spec = {});

}  // namespace thermodeco::numerics
