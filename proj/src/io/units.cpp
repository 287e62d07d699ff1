#include "thermodeco/io/units.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "thermodeco/constants.hpp"

namespace thermodeco::io {

namespace {

struct Unit {
  std::string_view name;
  double factor;
};

constexpr std::array kLength{Unit{"m", 1.0}, Unit{"cm", 1e-2}, Unit{"mm", 1e-3}, Unit{"um", 1e-6},
                             Unit{"μm", 1e-6}, Unit{"µm", 1e-6}, Unit{"nm", 1e-9}};
constexpr std::array kTime{Unit{"s", 1.0}, Unit{"ms", 1e-3}, Unit{"us", 1e-6}, Unit{"μs", 1e-6},
                           Unit{"µs", 1e-6}, Unit{"ns", 1e-9}};
constexpr std::array kMass{Unit{"kg", 1.0}, Unit{"g", 1e-3}, Unit{"amu", constants::amu},
                           Unit{"u", constants::amu}, Unit{"Da", constants::amu}};
constexpr std::array kArea{Unit{"m2", 1.0},     Unit{"m^2", 1.0},    Unit{"cm2", 1e-4},
                           Unit{"mm2", 1e-6},   Unit{"um2", 1e-12},  Unit{"μm2", 1e-12},
                           Unit{"µm2", 1e-12},  Unit{"nm2", 1e-18}};
constexpr std::array kTemperature{Unit{"K", 1.0}};
constexpr std::array kHeatCapacity{Unit{"J/K", 1.0}, Unit{"kB", constants::k_B},
                                   Unit{"k_B", constants::k_B}};
constexpr std::array kVelocity{Unit{"m/s", 1.0}, Unit{"km/s", 1e3}};

template <std::size_t N>
std::optional<double> lookup(const std::array<Unit, N>& table, std::string_view unit) {
  for (const auto& u : table) {
    if (u.name == unit) return u.factor;
  }
  return std::nullopt;
}

std::optional<double> factor_for(Dimension dim, std::string_view unit) {
  switch (dim) {
    case Dimension::length: return lookup(kLength, unit);
    case Dimension::time: return lookup(kTime, unit);
    case Dimension::mass: return lookup(kMass, unit);
    case Dimension::area: return lookup(kArea, unit);
    case Dimension::temperature: return lookup(kTemperature, unit);
    case Dimension::heat_capacity: return lookup(kHeatCapacity, unit);
    case Dimension::velocity: return lookup(kVelocity, unit);
    case Dimension::dimensionless: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string describe(Dimension dim) {
  switch (dim) {
    case Dimension::length: return "length (number in m, or a string such as \"500 nm\")";
    case Dimension::time: return "time (number in s, or a string such as \"10 ms\")";
    case Dimension::mass: return "mass (number in kg, or a string such as \"720 amu\")";
    case Dimension::area: return "area (number in m^2, or a string such as \"5e-18 m2\")";
    case Dimension::temperature: return "temperature (number in K, or a string such as \"1000 K\")";
    case Dimension::heat_capacity:
      return "heat capacity (number in J/K, a string such as \"12000 kB\", or \"inf\")";
    case Dimension::velocity: return "velocity (number in m/s, or a string such as \"200 m/s\")";
    case Dimension::dimensionless: return "dimensionless number";
  }
  return "quantity";
}

double parse_quantity(std::string_view text, Dimension dim) {
  const std::string_view s = trim(text);
  if (s.empty()) throw UnitError("empty quantity; expected " + describe(dim));

  double value = 0.0;
  std::size_t consumed = 0;
  if (s.rfind("inf", 0) == 0) {
    value = std::numeric_limits<double>::infinity();
    consumed = s.rfind("infinity", 0) == 0 ? 8 : 3;
  } else {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc()) {
      throw UnitError("cannot read a number from \"" + std::string(s) + "\"; expected " +
                      describe(dim));
    }
    consumed = static_cast<std::size_t>(ptr - s.data());
  }

  const std::string_view unit = trim(s.substr(consumed));
  if (unit.empty()) return value;
  const auto factor = factor_for(dim, unit);
  if (!factor) {
    throw UnitError("unknown unit \"" + std::string(unit) + "\" for " + describe(dim));
  }
  return value * *factor;
}

}  // namespace thermodeco::io
