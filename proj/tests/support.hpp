#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "photon_shaper/config.hpp"
#include "photon_shaper/forward_solver.hpp"
#include "photon_shaper/pulse_library.hpp"

namespace testing_support {

using photon::cplx;

inline photon::PulseSpec gaussian(double amplitude, double center, double width) {
  photon::PulseSpec s;
  s.family = photon::PulseFamily::gaussian;
  s.amplitude = amplitude;
  s.centers = {center};
  s.widths = {width};
  return s;
}

inline photon::PulseSpec double_gaussian(double amplitude, double c0, double c1, double w) {
  photon::PulseSpec s;
  s.family = photon::PulseFamily::double_gaussian;
  s.amplitude = amplitude;
  s.centers = {c0, c1};
  s.widths = {w, w};
  return s;
}

inline photon::PulseSpec flattop(double amplitude, double center, double half_width, double ramp) {
  photon::PulseSpec s;
  s.family = photon::PulseFamily::flattop;
  s.amplitude = amplitude;
  s.centers = {center};
  s.widths = {half_width};
  s.ramp = ramp;
  return s;
}

inline photon::PulseSpec constant(double amplitude) {
  photon::PulseSpec s;
  s.family = photon::PulseFamily::constant;
  s.amplitude = amplitude;
  return s;
}

inline photon::PulseSpec oscillating(double amplitude, double depth, double period) {
  photon::PulseSpec s;
  s.family = photon::PulseFamily::oscillating;
  s.amplitude = amplitude;
  s.depth = depth;
  s.period = period;
  return s;
}

// Two-level Rabi flopping |1> <-> |2> under a constant resonant pump.
inline double rabi_c2_abs(double omega0, double t) { return std::abs(std::sin(0.5 * omega0 * t)); }

// Pearson correlation after removing a least-squares line from both series.
inline double detrended_pearson(std::span<const double> t, std::vector<double> x, std::vector<double> y) {
  auto detrend = [&](std::vector<double>& v) {
    const double m = static_cast<double>(v.size());
    double st = 0, sv = 0, stt = 0, stv = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      st += t[i], sv += v[i], stt += t[i] * t[i], stv += t[i] * v[i];
    }
    const double b = (m * stv - st * sv) / (m * stt - st * st);
    const double a = (sv - b * st) / m;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= a + b * t[i];
  };
  detrend(x);
  detrend(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += x[i] * y[i], sxx += x[i] * x[i], syy += y[i] * y[i];
  return sxy / std::sqrt(sxx * syy);
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline std::filesystem::path preset(const std::string& id) {
  return std::filesystem::path(PHOTON_SHAPER_PRESET_DIR) / (id + ".ini");
}

// Expanded and resolved runs of a preset, in file order.
inline std::vector<photon::ExpandedRun> preset_runs(const std::string& id) {
  auto runs = photon::expand(photon::parse_config(preset(id)));
  for (auto& r : runs) photon::resolve_expanded(r);
  return runs;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("photon_shaper_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
