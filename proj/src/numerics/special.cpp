#include "thermodeco/numerics/special.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "thermodeco/constants.hpp"

namespace thermodeco::numerics {

namespace {

constexpr double kSiSeriesLimit = 16.0;
constexpr double kSiAsymptoticLimit = 64.0;

// Power series for Si. The largest term near x = 16 is ~1e6, so the sum is
// carried in extended precision to keep the absolute error below 1e-12.
double si_series(double x) {
  const long double xl = x;
  const long double x2 = xl * xl;
  long double term = xl;  // x^(2n+1) / (2n+1)!
  long double sum = xl;
  for (int n = 1; n < 200; ++n) {
    term *= -x2 / ((2.0L * n) * (2.0L * n + 1.0L));
    const long double contribution = term / (2.0L * n + 1.0L);
    sum += contribution;
    if (std::abs(contribution) < 1e-22L * std::abs(sum)) break;
  }
  return static_cast<double>(sum);
}

// Continued fraction for E1(ix) (modified Lentz), valid for x > 2.
double si_continued_fraction(double x) {
  using cd = std::complex<double>;
  constexpr double tiny = 1e-300;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  cd b(1.0, x);
  cd c(1.0 / tiny, 0.0);
  cd d = 1.0 / b;
  cd h = d;
  for (int i = 2; i < 1000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
  }
  h *= cd(std::cos(x), -std::sin(x));
  return constants::pi / 2.0 + h.imag();
}

// Si(x) = pi/2 - f(x) cos x - g(x) sin x with the auxiliary asymptotic series.
double si_asymptotic(double x) {
  const double inv2 = 1.0 / (x * x);
  double f_sum = 1.0;
  double g_sum = 1.0;
  double f_term = 1.0;  // (2k)! / x^(2k)
  double g_term = 1.0;  // (2k+1)! / x^(2k)
  for (int k = 1; k < 40; ++k) {
    const double next_f = -f_term * (2.0 * k - 1.0) * (2.0 * k) * inv2;
    const double next_g = -g_term * (2.0 * k) * (2.0 * k + 1.0) * inv2;
    if (std::abs(next_f) > std::abs(f_term)) break;
    f_term = next_f;
    g_term = next_g;
    f_sum += f_term;
    g_sum += g_term;
    if (std::abs(f_term) < 1e-18 && std::abs(g_term) < 1e-18) break;
  }
  const double f = f_sum / x;
  const double g = g_sum * inv2;
  return constants::pi / 2.0 - f * std::cos(x) - g * std::sin(x);
}

}  // namespace

double sinc(double x) {
  if (std::abs(x) <= kSincSeriesThreshold) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double one_minus_sinc(double x) {
  if (std::abs(x) < 1.0) {
    // sum_{n>=1} (-1)^(n+1) x^(2n) / (2n+1)!
    const double x2 = x * x;
    double term = x2 / 6.0;
    double sum = term;
    for (int n = 2; n < 30; ++n) {
      term *= -x2 / ((2.0 * n) * (2.0 * n + 1.0));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return 1.0 - std::sin(x) / x;
}

double sine_integral(double x) {
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("sine_integral: argument must be >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x <= kSiSeriesLimit) return si_series(x);
  if (x < kSiAsymptoticLimit) return si_continued_fraction(x);
  return si_asymptotic(x);
}

double one_minus_si_ratio(double x) {
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("one_minus_si_ratio: argument must be >= 0");
  }
  if (x < 1.0) {
    // sum_{n>=1} (-1)^(n+1) x^(2n) / ((2n+1) (2n+1)!)
    const double x2 = x * x;
    double power = 1.0;  // x^(2n) / (2n+1)!
    double sum = 0.0;
    for (int n = 1; n < 30; ++n) {
      power *= x2 / ((2.0 * n) * (2.0 * n + 1.0));
      const double term = ((n % 2 == 1) ? 1.0 : -1.0) * power / (2.0 * n + 1.0);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return 1.0 - sine_integral(x) / x;
}

}  // namespace thermodeco::numerics
