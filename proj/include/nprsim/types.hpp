#pragma once

#include <numbers>

namespace nprsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Inches to metres; tube diameters are sold in fractional inches.
constexpr double inches(double in) { return in * 0.0254; }

}  // namespace nprsim
