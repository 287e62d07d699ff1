#include "thermodeco/numerics/roots.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace thermodeco::numerics {

double find_root(const std::function<double(double)>& f, RootBracket bracket, double tol) {
  if (!(bracket.lo < bracket.hi)) {
    throw RootError("find_root: bracket requires lo < hi");
  }
  if (!(tol > 0.0)) throw RootError("find_root: tolerance must be positive");

  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw RootError("find_root: f is NaN at bracket end");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream os;
    os << "find_root: f has the same sign at both ends of [" << a << ", " << b << "]";
    throw RootError(os.str());
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 300; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;  // secant
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;  // inverse quadratic interpolation
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;  // bisection fallback
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if (std::isnan(fb)) throw RootError("find_root: f returned NaN during iteration");
  }
  throw RootError("find_root: maximum iterations exceeded");
}

RootBracket expand_bracket(const std::function<double(double)>& f, RootBracket start,
                           double lower_limit, double upper_limit, double factor) {
  double lo = std::max(start.lo, lower_limit);
  double hi = std::min(start.hi, upper_limit);
  double flo = f(lo);
  double fhi = f(hi);
  for (int iter = 0; iter < 200; ++iter) {
    if ((flo > 0.0) != (fhi > 0.0) || flo == 0.0 || fhi == 0.0) return {lo, hi};
    const bool can_lower = lo > lower_limit;
    const bool can_raise = hi < upper_limit;
    if (!can_lower && !can_raise) break;
    // Move the end whose value is closer to zero first; both when unclear.
    const bool prefer_low = std::abs(flo) < std::abs(fhi);
    if (can_lower && (prefer_low || !can_raise)) {
      hi = lo;
      fhi = flo;
      lo = std::max(lo / factor, lower_limit);
      flo = f(lo);
    } else {
      lo = hi;
      flo = fhi;
      hi = std::min(hi * factor, upper_limit);
      fhi = f(hi);
    }
  }
  std::ostringstream os;
  os << "no sign change found in [" << lower_limit << ", " << upper_limit << "]";
  throw RootError(os.str());
}

}  // namespace thermodeco::numerics
