#pragma once

namespace thermodeco::numerics {

/// |x| at or below which sinc switches to its Taylor series.
inline constexpr double kSincSeriesThreshold = 1e-4;

/// sin(x)/x with the removable singularity at 0.
double sinc(double x);

/// 1 - sinc(x), free of cancellation for small |x|.
double one_minus_sinc(double x);

/// Si(x) = integral of sinc from 0 to x, for x >= 0. Absolute error below 1e-12.
double sine_integral(double x);

/// 1 - Si(x)/x for x >= 0, free of cancellation for small x; 0 at x = 0.
double one_minus_si_ratio(double x);

}  // namespace thermodeco::numerics
