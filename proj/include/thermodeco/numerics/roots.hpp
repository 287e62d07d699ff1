#pragma once

#include <functional>
#include <stdexcept>

namespace thermodeco::numerics {

struct RootBracket {
  double lo;
  double hi;
};

class RootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Brent's method with a bisection safeguard. Requires f(lo) * f(hi) <= 0;
/// returns once the bracket is narrower than tol or f vanishes.
double find_root(const std::function<double(double)>& f, RootBracket bracket, double tol);

/// Grows [lo, hi] geometrically (factor) until f changes sign or the limits
/// are hit. Intended for positive, monotone problems such as temperatures and
/// times. Throws RootError when no sign change exists inside the limits.
RootBracket expand_bracket(const std::function<double(double)>& f, RootBracket start,
                           double lower_limit, double upper_limit, double factor = 4.0);

}  // namespace thermodeco::numerics
