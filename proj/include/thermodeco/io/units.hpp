#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermodeco::io {

enum class Dimension {
  length,
  time,
  mass,
  area,
  temperature,
  heat_capacity,
  velocity,
  dimensionless,
};

class UnitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Human-readable dimension name with an example, used in error messages.
std::string describe(Dimension dim);

/// Parses "<number> [unit]" into SI. A bare number is taken as SI.
/// Accepted suffixes:
///   length         m cm mm um μm nm
///   time           s ms us μs ns
///   mass           kg g amu u Da
///   area           m2 m^2 cm2 mm2 um2 μm2 nm2
///   temperature    K
///   heat capacity  J/K kB k_B (multiples of Boltzmann's constant)
///   velocity       m/s km/s
/// "inf" (optionally with a unit) yields +infinity; callers decide whether
/// that is meaningful.
double parse_quantity(std::string_view text, Dimension dim);

}  // namespace thermodeco::io
