#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "photon_shaper/core_model.hpp"

namespace photon {

enum class PulseFamily { gaussian, sin2, double_gaussian, flattop, constant, oscillating };

inline std::string_view to_string(PulseFamily f) {
  switch (f) {
    case PulseFamily::gaussian: return "gaussian";
    case PulseFamily::sin2: return "sin2";
    case PulseFamily::double_gaussian: return "double_gaussian";
    case PulseFamily::flattop: return "flattop";
    case PulseFamily::constant: return "constant";
    case PulseFamily::oscillating: return "oscillating";
  }
  return "?";
}

inline std::optional<PulseFamily> parse_pulse_family(std::string_view name) {
  for (auto f : {PulseFamily::gaussian, PulseFamily::sin2, PulseFamily::double_gaussian,
                 PulseFamily::flattop, PulseFamily::constant, PulseFamily::oscillating}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

/// Parameters of a named envelope family. Which fields matter depends on the
/// family:
///   gaussian        amplitude, centers[0], widths[0] (standard deviation)
///   sin2            amplitude, centers[0], widths[0] (half support)
///   double_gaussian amplitude, centers[0..1], widths[0..1]
///   flattop         amplitude, centers[0], widths[0] (half plateau), ramp
///   constant        amplitude
///   oscillating     amplitude, depth, period
struct PulseSpec {
  PulseFamily family = PulseFamily::gaussian;
  double amplitude = 1.0;
  std::vector<double> centers = {0.0};
  std::vector<double> widths = {1.0};
  double ramp = 1.0;
  double depth = 0.0;
  double period = 1.0;

  std::string label() const {
    std::ostringstream s;
    s << to_string(family) << "(A=" << format_double(amplitude);
    switch (family) {
      case PulseFamily::constant: break;
      case PulseFamily::oscillating:
        s << ", m=" << format_double(depth) << ", P=" << format_double(period);
        break;
      default:
        for (std::size_t i = 0; i < centers.size(); ++i) s << ", c" << i << "=" << format_double(centers[i]);
        for (std::size_t i = 0; i < widths.size(); ++i) s << ", w" << i << "=" << format_double(widths[i]);
        if (family == PulseFamily::flattop) s << ", r=" << format_double(ramp);
    }
    s << ")";
    return s.str();
  }

  bool operator==(const PulseSpec&) const = default;
};

namespace detail {

inline void check_pulse(const PulseSpec& spec, const TimeGrid& grid) {
  auto bad = [&](const std::string& why) { fail(ErrorKind::parameter, std::string(to_string(spec.family)) + ": " + why); };
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude)) bad("amplitude must be >= 0");
  std::size_t peaks = 0;
  switch (spec.family) {
    case PulseFamily::gaussian:
    case PulseFamily::sin2:
    case PulseFamily::flattop: peaks = 1; break;
    case PulseFamily::double_gaussian: peaks = 2; break;
    case PulseFamily::constant: return;
    case PulseFamily::oscillating:
      if (!(spec.depth >= 0.0 && spec.depth < 1.0)) bad("modulation depth must lie in [0, 1)");
      if (!(spec.period > 0.0) || !std::isfinite(spec.period)) bad("modulation period must be > 0");
      return;
  }
  if (spec.centers.size() != peaks) bad("expected " + std::to_string(peaks) + " center(s)");
  if (spec.widths.size() != peaks) bad("expected " + std::to_string(peaks) + " width(s)");
  for (double c : spec.centers) {
    if (!(c >= 0.0 && c <= grid.t_end)) bad("center " + format_double(c) + " outside [0, t_end]");
  }
  for (double w : spec.widths) {
    if (!(w > 0.0) || !std::isfinite(w)) bad("widths must be > 0");
  }
  if (spec.family == PulseFamily::flattop && (!(spec.ramp > 0.0) || !std::isfinite(spec.ramp))) {
    bad("ramp must be > 0");
  }
}

inline double shape_value(const PulseSpec& s, double t) {
  using std::numbers::pi;
  switch (s.family) {
    case PulseFamily::gaussian: {
      const double x = (t - s.centers[0]) / s.widths[0];
      return std::exp(-0.5 * x * x);
    }
    case PulseFamily::sin2: {
      const double c = s.centers[0], w = s.widths[0];
      if (t <= c - w || t >= c + w) return 0.0;
      const double v = std::sin(pi * (t - c + w) / (2.0 * w));
      return v * v;
    }
    case PulseFamily::double_gaussian: {
      const double x0 = (t - s.centers[0]) / s.widths[0];
      const double x1 = (t - s.centers[1]) / s.widths[1];
      return std::exp(-0.5 * x0 * x0) + std::exp(-0.5 * x1 * x1);
    }
    case PulseFamily::flattop: {
      const double c = s.centers[0], w = s.widths[0], r = s.ramp;
      // (1 + tanh a)(1 - tanh b) / 4 without cancellation in the tails
      return 1.0 / ((1.0 + std::exp(-2.0 * (t - c + w) / r)) * (1.0 + std::exp(2.0 * (t - c - w) / r)));
    }
    case PulseFamily::constant: return 1.0;
    case PulseFamily::oscillating:
      return (1.0 + s.depth * std::sin(2.0 * pi * t / s.period)) / (1.0 + s.depth);
  }
  return 0.0;
}

}  // namespace detail

/// Samples the family formula on `grid`. Every family except `constant` is
/// rescaled so that its sampled maximum equals `amplitude` exactly.
inline Envelope render_pulse(const PulseSpec& spec, const TimeGrid& grid) {
  detail::check_pulse(spec, grid);
  std::vector<double> v(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) v[j] = detail::shape_value(spec, grid.time(j));
  if (spec.family == PulseFamily::constant) {
    for (auto& x : v) x = spec.amplitude;
  } else {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, x);
    if (!(peak > 0.0)) fail(ErrorKind::parameter, spec.label() + " vanishes on the grid");
    for (auto& x : v) x = spec.amplitude * (x / peak);
  }
  return Envelope(grid, std::move(v), spec.label());
}

}  // namespace photon
