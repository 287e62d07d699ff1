#include "thermodeco/numerics/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thermodeco::numerics {

OdeSolution::OdeSolution(std::vector<double> t, std::vector<double> y, std::vector<double> dydt)
    : t_(std::move(t)), y_(std::move(y)), dydt_(std::move(dydt)) {
  if (t_.empty() || t_.size() != y_.size() || t_.size() != dydt_.size()) {
    throw std::invalid_argument("OdeSolution: inconsistent sample arrays");
  }
}

double OdeSolution::operator()(double t) const {
  if (t_.size() == 1 || t <= t_.front()) return y_.front();
  if (t >= t_.back()) return y_.back();
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  const double h = t_[i + 1] - t_[i];
  const double s = (t - t_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[i] + h10 * h * dydt_[i] + h01 * y_[i + 1] + h11 * h * dydt_[i + 1];
}

OdeSolution integrate_ode(const OdeRhs& rhs, double y0, double t0, double t1,
                          const QuadratureSpec& spec) {
  spec.validate();
  if (!std::isfinite(y0)) throw OdeError("integrate_ode: initial value not finite", t0, y0);
  if (!(t1 >= t0)) throw std::invalid_argument("integrate_ode: requires t1 >= t0");

  auto eval = [&](double t, double y) {
    const double v = rhs(t, y);
    if (!std::isfinite(v)) throw OdeError("integrate_ode: right-hand side not finite", t, y);
    return v;
  };

  std::vector<double> ts{t0};
  std::vector<double> ys{y0};
  double f = eval(t0, y0);
  std::vector<double> fs{f};
  if (t1 == t0) return OdeSolution(std::move(ts), std::move(ys), std::move(fs));

  // Dormand-Prince tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  double y = y0;
  const double span = t1 - t0;
  // Initial step from the local time scale |y / y'|.
  double h = span;
  if (f != 0.0) {
    const double scale = (std::abs(y) + spec.abs_tol) / std::abs(f);
    h = std::min(span, 0.01 * scale * std::pow(spec.rel_tol, 0.2));
  }
  h = std::max(h, span * 1e-12);

  const double h_min_rel = 64.0 * std::numeric_limits<double>::epsilon();
  for (int step = 0; step < 1000000; ++step) {
    if (t >= t1) break;
    h = std::min(h, t1 - t);
    if (h <= h_min_rel * std::max(std::abs(t), span)) {
      throw OdeError("integrate_ode: step size underflow", t, y);
    }
    const double k1 = f;
    const double k2 = eval(t + c2 * h, y + h * a21 * k1);
    const double k3 = eval(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const double k4 = eval(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = eval(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 =
        eval(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = eval(t + h, y_new);
    const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double sc = spec.abs_tol + spec.rel_tol * std::max(std::abs(y), std::abs(y_new));
    const double ratio = std::abs(err) / sc;
    if (ratio <= 1.0) {
      const bool last = (t + h >= t1) || (t1 - (t + h) <= h_min_rel * span);
      t = last ? t1 : t + h;
      y = y_new;
      f = k7;
      ts.push_back(t);
      ys.push_back(y);
      fs.push_back(f);
      if (last) break;
    }
    const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
    h *= factor;
  }
  if (t < t1) throw OdeError("integrate_ode: maximum step count exceeded", t, y);
  return OdeSolution(std::move(ts), std::move(ys), std::move(fs));
}

}  // namespace thermodeco::numerics
