#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermodeco::numerics {

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 4000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1) {
      throw std::invalid_argument(
          "QuadratureSpec requires rel_tol > 0, abs_tol >= 0, max_subdivisions >= 1");
    }
  }

  QuadratureSpec tightened(double factor) const {
    QuadratureSpec s = *this;
    s.rel_tol /= factor;
    s.abs_tol /= factor;
    return s;
  }
};

/// Thrown when the adaptive scheme cannot meet the requested tolerance.
/// Carries the best available estimate and its error bound.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

class NonFiniteIntegrandError : public QuadratureError {
 public:
  explicit NonFiniteIntegrandError(double abscissa)
      : QuadratureError(message(abscissa), std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::infinity()),
        abscissa_(abscissa) {}

  double abscissa() const noexcept { return abscissa_; }

 private:
  static std::string message(double x) {
    std::ostringstream os;
    os.precision(17);
    os << "integrand is not finite at x = " << x;
    return os.str();
  }
  double abscissa_;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
};

namespace detail {

// 21-point Gauss-Kronrod rule (QUADPACK qk21 abscissae and weights).
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980115363, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[10];
  double resg = 0.0;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{};
  std::array<double, 10> f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  resk *= half;
  resg *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, resk, err};
}

template <class F>
QuadratureResult adaptive(F& f, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod21(f, a, b);
  double total = first.value;
  double total_err = first.error;
  panels.push(first);
  int evaluations = 21;
  int subdivisions = 0;
  auto converged = [&] {
    return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
  };
  while (!converged()) {
    if (subdivisions >= spec.max_subdivisions) {
      throw QuadratureError("quadrature did not converge within max_subdivisions", total,
                            total_err);
    }
    Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("quadrature panel width reached floating-point resolution",
                            total, total_err);
    }
    panels.pop();
    Panel left = gauss_kronrod21(f, worst.a, mid);
    Panel right = gauss_kronrod21(f, mid, worst.b);
    evaluations += 42;
    ++subdivisions;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    // Periodically resum to keep the running totals free of drift.
    if (subdivisions % 64 == 0) {
      auto copy = panels;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, total_err, evaluations, subdivisions};
}

}  // namespace detail

/// Adaptive 21-point Gauss-Kronrod quadrature of f over [a, b].
///
/// b may be +infinity; the half line is mapped onto [0, 1) with
/// x = a + s t / (1 - t), s taken from a coarse probe of |f|. Throws QuadratureError when the tolerance
/// max(abs_tol, rel_tol * |I|) cannot be reached and
/// NonFiniteIntegrandError when f returns NaN or infinity.
template <class F>
QuadratureResult integrate_detailed(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (std::isnan(a) || std::isnan(b) || std::isinf(a)) {
    throw std::invalid_argument("integrate: lower limit must be finite and limits not NaN");
  }
  if (a == b) return {};
  if (b < a) {
    QuadratureResult r = integrate_detailed(f, b, a, spec);
    r.value = -r.value;
    return r;
  }
  if (std::isinf(b)) {
    // Scale the map to where |f(x)| (x - a) peaks on a coarse binary ladder.
    double scale = 1.0, best = 0.0;
    for (int k = -64; k <= 256; k += 2) {
      const double h = std::ldexp(1.0, k);
      const double y = std::abs(f(a + h)) * h;
      if (std::isfinite(y) && y > best) {
        best = y;
        scale = h;
      }
    }
    auto mapped = [&](double t) {
      const double one_minus = 1.0 - t;
      const double x = a + scale * t / one_minus;
      const double y = f(x);
      if (!std::isfinite(y)) throw NonFiniteIntegrandError(x);
      // Decaying integrands underflow before the Jacobian overflows.
      return y == 0.0 ? 0.0 : scale * y / (one_minus * one_minus);
    };
    return detail::adaptive(mapped, 0.0, 1.0, spec);
  }
  auto checked = [&](double x) {
    const double y = f(x);
    if (!std::isfinite(y)) throw NonFiniteIntegrandError(x);
    return y;
  };
  return detail::adaptive(checked, a, b, spec);
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  return integrate_detailed(std::forward<F>(f), a, b, spec).value;
}

/// Integrates over consecutive breakpoints; useful for integrands with kinks
/// (piecewise-linear tables). The tolerance is shared out by panel.
template <class F>
double integrate_piecewise(F&& f, const std::vector<double>& breakpoints,
                           const QuadratureSpec& spec = {}) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    total += integrate(f, breakpoints[i], breakpoints[i + 1], spec);
  }
  return total;
}

}  // namespace thermodeco::numerics
