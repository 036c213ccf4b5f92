#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "photon_shaper/csv.hpp"
#include "photon_shaper/errors.hpp"

// Unit convention used throughout: rates and detunings are measured in units of
// the total cavity linewidth Gamma_k, times in 1/Gamma_k, c = 1, and all
// amplitudes live in the frame rotating with the emitter transitions.
namespace photon {

using cplx = std::complex<double>;

struct SystemParams {
  double rabi_R = 0.0;            // vacuum Rabi frequency R_k
  double delta_k = 0.0;           // cavity detuning omega_k - omega_23
  double delta_p = 0.0;           // pump detuning omega_p - omega_21
  double gamma_rad_ratio = 0.9;   // gamma_rad / Gamma_k
  double gamma_total = 1.0;       // Gamma_k, the unit of rate

  double gamma_rad() const { return gamma_rad_ratio * gamma_total; }
  double gamma_loss() const { return (1.0 - gamma_rad_ratio) * gamma_total; }

  // Complex cavity pole Delta_k - i Gamma_k / 2 in the rotating frame.
  cplx cavity_pole() const { return {delta_k, -0.5 * gamma_total}; }

  // Exponent a with C_c' = (R/2) g C_2 + a C_c, i.e. a = -(i Delta_k + Gamma_k / 2).
  cplx cavity_decay_exponent() const { return {-0.5 * gamma_total, -delta_k}; }

  bool operator==(const SystemParams&) const = default;
};

/// Returns `p` unchanged when every field is in range; otherwise throws a
/// parameter error naming the offending field.
inline SystemParams validate_params(const SystemParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.rabi_R) || p.rabi_R < 0.0) {
    fail(ErrorKind::parameter, "rabi_R must be finite and >= 0");
  }
  if (!finite(p.delta_k)) fail(ErrorKind::parameter, "delta_k must be finite");
  if (!finite(p.delta_p)) fail(ErrorKind::parameter, "delta_p must be finite");
  if (!finite(p.gamma_rad_ratio) || p.gamma_rad_ratio < 0.0 || p.gamma_rad_ratio > 1.0) {
    fail(ErrorKind::parameter, "gamma_rad_ratio must lie in [0, 1]");
  }
  if (p.gamma_total != 1.0) {
    fail(ErrorKind::parameter, "gamma_total must equal 1 (rates are expressed in units of Gamma_k)");
  }
  return p;
}

// Parameter set in laboratory units (angular rates in s^-1).
struct PhysicalParams {
  double rabi_R = 0.0;
  double delta_k = 0.0;
  double delta_p = 0.0;
  double gamma_rad = 0.0;
  double gamma_loss = 0.0;
};

struct NaturalUnits {
  SystemParams params;
  double gamma_k = 1.0;  // s^-1, the rate used as unit
};

inline NaturalUnits to_natural_units(const PhysicalParams& phys) {
  const double gamma_k = phys.gamma_rad + phys.gamma_loss;
  if (!(gamma_k > 0.0) || !std::isfinite(gamma_k)) {
    fail(ErrorKind::parameter, "gamma_rad + gamma_loss must be positive");
  }
  SystemParams p;
  p.rabi_R = phys.rabi_R / gamma_k;
  p.delta_k = phys.delta_k / gamma_k;
  p.delta_p = phys.delta_p / gamma_k;
  p.gamma_rad_ratio = phys.gamma_rad / gamma_k;
  p.gamma_total = 1.0;
  return {validate_params(p), gamma_k};
}

inline PhysicalParams to_physical_units(const SystemParams& p, double gamma_k) {
  if (!(gamma_k > 0.0)) fail(ErrorKind::parameter, "gamma_k must be positive");
  PhysicalParams phys;
  phys.rabi_R = p.rabi_R * gamma_k;
  phys.delta_k = p.delta_k * gamma_k;
  phys.delta_p = p.delta_p * gamma_k;
  phys.gamma_rad = p.gamma_rad_ratio * gamma_k;
  phys.gamma_loss = (1.0 - p.gamma_rad_ratio) * gamma_k;
  return phys;
}

// ---------------------------------------------------------------------------

inline constexpr double kRefinementLimit = 0.01;
inline constexpr double kMaxGridSamples = 1e8;

struct TimeGrid {
  double t_end = 0.0;
  double dt = 0.0;
  std::size_t n = 0;

  double time(std::size_t j) const { return static_cast<double>(j) * dt; }
  bool refined() const { return dt <= kRefinementLimit * (1.0 + 1e-12); }
  bool operator==(const TimeGrid&) const = default;
};

/// Uniform grid on [0, t_end]. The step is adjusted to t_end / (n - 1) so the
/// last sample lands on t_end.
inline TimeGrid make_grid(double t_end, double dt) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) fail(ErrorKind::parameter, "t_end must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::parameter, "dt must be > 0");
  const double steps = t_end / dt;
  if (steps > kMaxGridSamples) {
    fail(ErrorKind::capacity, "grid would need more than 1e8 samples");
  }
  const auto intervals = static_cast<std::size_t>(std::llround(steps));
  if (intervals == 0) fail(ErrorKind::parameter, "dt must not exceed t_end");
  return TimeGrid{t_end, t_end / static_cast<double>(intervals), intervals + 1};
}

inline void require_refined(const TimeGrid& grid, bool force_coarse) {
  if (!force_coarse && !grid.refined()) {
    std::ostringstream msg;
    msg << "dt = " << grid.dt << " is coarser than " << kRefinementLimit
        << "; pass force_coarse to accept it";
    fail(ErrorKind::refinement, msg.str());
  }
}

// ---------------------------------------------------------------------------

/// Non-negative real time profile sampled on a TimeGrid (pump Rabi frequency or
/// emitter-cavity coupling shape).
class Envelope {
 public:
  Envelope() = default;

  Envelope(TimeGrid grid, std::vector<double> samples, std::string label = {})
      : grid_(grid), samples_(std::move(samples)), label_(std::move(label)) {
    if (samples_.size() != grid_.n) {
      fail(ErrorKind::parameter, "envelope length does not match its grid");
    }
    for (double v : samples_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        fail(ErrorKind::parameter, "envelope samples must be finite and >= 0");
      }
    }
  }

  static Envelope constant(const TimeGrid& grid, double value, std::string label = {}) {
    return Envelope(grid, std::vector<double>(grid.n, value),
                    label.empty() ? "constant(" + format_double(value) + ")" : std::move(label));
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& samples() const { return samples_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t j) const { return samples_[j]; }

  double peak() const {
    return samples_.empty() ? 0.0 : *std::max_element(samples_.begin(), samples_.end());
  }

  /// Value at t_j + dt/2 from the cubic through the four surrounding samples.
  /// The RK4 stages of both solvers read midpoints through this rule; a
  /// linear midpoint would cap the integrators at second order.
  double midpoint(std::size_t j) const {
    const auto& s = samples_;
    const std::size_t n = s.size();
    if (j + 1 >= n) fail(ErrorKind::domain, "midpoint index out of range");
    double v;
    if (n < 4) {
      v = 0.5 * (s[j] + s[j + 1]);
    } else if (j == 0) {
      v = (5.0 * s[0] + 15.0 * s[1] - 5.0 * s[2] + s[3]) / 16.0;
    } else if (j + 2 == n) {
      v = (s[n - 4] - 5.0 * s[n - 3] + 15.0 * s[n - 2] + 5.0 * s[n - 1]) / 16.0;
    } else {
      v = (-s[j - 1] + 9.0 * s[j] + 9.0 * s[j + 1] - s[j + 2]) / 16.0;
    }
    return std::max(v, 0.0);
  }

 private:
  TimeGrid grid_;
  std::vector<double> samples_;
  std::string label_;
};

/// Linear interpolation, exact at grid nodes.
inline double eval_envelope(const Envelope& e, double t) {
  const auto& grid = e.grid();
  const double tol = 1e-12 * std::max(1.0, grid.t_end);
  if (!(t >= -tol) || !(t <= grid.t_end + tol)) {
    fail(ErrorKind::domain, "t = " + format_double(t) + " outside [0, " +
                                format_double(grid.t_end) + "]");
  }
  if (grid.n < 2) return e[0];
  const double x = std::clamp(t / grid.dt, 0.0, static_cast<double>(grid.n - 1));
  const auto j = std::min(static_cast<std::size_t>(x), grid.n - 2);
  const double frac = x - static_cast<double>(j);
  if (frac == 0.0) return e[j];
  return (1.0 - frac) * e[j] + frac * e[j + 1];
}

/// Two-column CSV with header "# t,value".
inline std::string envelope_to_csv(const Envelope& e) {
  CsvWriter w("# t,value");
  for (std::size_t j = 0; j < e.size(); ++j) w.row(e.grid().time(j), e[j]);
  return w.str();
}

inline Envelope envelope_from_csv(const std::string& text, std::string label = {}) {
  std::vector<double> ts, vs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line);
    if (fields.size() != 2) {
      fail(ErrorKind::parameter, "envelope CSV line " + std::to_string(lineno) + ": expected 2 columns");
    }
    try {
      ts.push_back(parse_double(fields[0]));
      vs.push_back(parse_double(fields[1]));
    } catch (const Error& err) {
      fail(ErrorKind::parameter, "envelope CSV line " + std::to_string(lineno) + ": " + err.what());
    }
  }
  if (ts.size() < 2) fail(ErrorKind::parameter, "envelope CSV needs at least two samples");
  if (ts.front() != 0.0) fail(ErrorKind::parameter, "envelope CSV must start at t = 0");
  const double dt = ts[1] - ts[0];
  if (!(dt > 0.0)) fail(ErrorKind::parameter, "envelope CSV times must increase");
  for (std::size_t j = 1; j < ts.size(); ++j) {
    if (std::abs(ts[j] - static_cast<double>(j) * dt) > 1e-9 * std::max(1.0, ts[j])) {
      fail(ErrorKind::parameter, "envelope CSV line with t = " + format_double(ts[j]) +
                                     " breaks the uniform grid");
    }
  }
  TimeGrid grid{ts.back(), dt, ts.size()};
  grid.dt = grid.t_end / static_cast<double>(grid.n - 1);
  return Envelope(grid, std::move(vs), std::move(label));
}

/// Resamples `e` onto `grid` (linear interpolation); used when a CSV envelope
/// was written on a different grid than the run uses.
inline Envelope resample(const Envelope& e, const TimeGrid& grid) {
  if (e.grid() == grid) return e;
  if (grid.t_end > e.grid().t_end * (1.0 + 1e-12)) {
    fail(ErrorKind::domain, "envelope '" + e.label() + "' does not cover the run window");
  }
  std::vector<double> out(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) out[j] = eval_envelope(e, std::min(grid.time(j), e.grid().t_end));
  return Envelope(grid, std::move(out), e.label());
}

}  // namespace photon
