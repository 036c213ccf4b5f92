#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "photon_shaper/forward_solver.hpp"
#include "photon_shaper/observables.hpp"
#include "photon_shaper/pulse_library.hpp"
#include "photon_shaper/quadrature.hpp"

// Inverse design: from a prescribed outgoing wave packet to the pump envelope
// that emits it, for a given emitter-cavity coupling shape.
//
// Conventions. The target phi(tau) is indexed by retarded time, and the part of
// the packet at tau is emitted at t = tau. With C_c = sqrt(eta/ratio) conj(phi)
// the cavity equation inverts to
//   C_2 = (2 / (R g)) sqrt(eta / ratio) conj(phi' - i conj(pole) phi).
// The pump amplitude f = (i/2) Omega_p e^{-i Delta_p t} then obeys
//   D = f (1 - int_0^t conj(f) C_2),   D = C_2' + (R/2) g C_c,
// i.e. D f' - |f|^2 f C_2 - D' f = 0, which is Bernoulli-type and solves to
//   f = D / S,  |S|^2 = 1 - 2 int Re(conj(D) C_2),  arg S = -int Im(conj(D) C_2) / |S|^2.
// |S|^2 is the population still in the ground state. In the gauge where f and
// C_2 are purely imaginary (Delta_p = 0) this is f = D / sqrt(1 + 2 int C_2 D).
namespace photon {

struct DesignTarget {
  TimeGrid grid;            // tau grid on [0, T]
  std::vector<cplx> shape;  // phi(tau), unit L2 norm
  double eta_target = 0.0;
  double t_snapshot = 0.0;
  std::string label;
};

/// Builds a target from a pulse-library shape, normalized to unit L2 norm.
inline DesignTarget make_target(const PulseSpec& shape, const TimeGrid& grid, double eta_target) {
  const Envelope e = render_pulse(shape, grid);
  std::vector<double> sq(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) sq[j] = e[j] * e[j];
  const double norm = std::sqrt(quad::integrate(sq, grid.dt));
  DesignTarget t{grid, std::vector<cplx>(grid.n), eta_target, grid.t_end, shape.label()};
  for (std::size_t j = 0; j < grid.n; ++j) t.shape[j] = e[j] / norm;
  return t;
}

inline void validate_target(const DesignTarget& t, const SystemParams& p) {
  if (t.shape.size() != t.grid.n) fail(ErrorKind::parameter, "target shape length does not match its grid");
  if (std::abs(t.t_snapshot - t.grid.t_end) > 1e-9 * std::max(1.0, t.grid.t_end)) {
    fail(ErrorKind::parameter, "target grid must end at the snapshot time");
  }
  if (!(t.eta_target > 0.0) || t.eta_target > p.gamma_rad_ratio + 1e-15) {
    fail(ErrorKind::parameter, "eta_target must lie in (0, gamma_rad_ratio]");
  }
  std::vector<double> sq(t.grid.n);
  for (std::size_t j = 0; j < sq.size(); ++j) sq[j] = std::norm(t.shape[j]);
  const double norm2 = quad::integrate(sq, t.grid.dt);
  if (std::abs(norm2 - 1.0) > 1e-6) {
    fail(ErrorKind::parameter, "target shape must have unit L2 norm (got " + format_double(norm2) + ")");
  }
  const auto d = quad::derivative(t.shape, t.grid.dt);
  if (std::abs(t.shape[0]) > 1e-6 || std::abs(d[0]) > 1e-6) {
    fail(ErrorKind::parameter, "target shape and its slope must vanish at tau = 0");
  }
}

/// Emitter amplitude required to radiate the target.
inline std::vector<cplx> c2_from_target(const DesignTarget& target, const SystemParams& p, const Envelope& g_in,
                                        double g_min = 1e-3) {
  validate_params(p);
  validate_target(target, p);
  const TimeGrid& grid = target.grid;
  const Envelope g = resample(g_in, grid);
  if (!(p.rabi_R > 0.0)) fail(ErrorKind::singular_coupling, "rabi_R = 0 cannot emit any target");
  const auto dphi = quad::derivative(target.shape, grid.dt);
  const cplx decay(0.5 * p.gamma_total, -p.delta_k);  // -i conj(pole)
  std::vector<cplx> drive(grid.n);
  double drive_max = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    drive[j] = std::conj(dphi[j] + decay * target.shape[j]);
    drive_max = std::max(drive_max, std::abs(drive[j]));
  }
  const double scale = 2.0 * std::sqrt(target.eta_target / p.gamma_rad_ratio) / p.rabi_R;
  std::vector<cplx> c2(grid.n);
  double c2_max = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const bool active = std::abs(drive[j]) > 1e-12 * drive_max;
    if (g[j] < g_min) {
      if (active) {
        fail(ErrorKind::singular_coupling, "coupling g = " + format_double(g[j]) + " below g_min at t = " +
                                               format_double(grid.time(j)) + " while the target is emitting");
      }
      c2[j] = 0.0;
      continue;
    }
    c2[j] = scale * drive[j] / g[j];
    c2_max = std::max(c2_max, std::abs(c2[j]));
  }
  if (c2_max > 1.0) {
    fail(ErrorKind::unphysical_target, "target needs |C_2| = " + format_double(c2_max) + " > 1");
  }
  return c2;
}

/// D(t) = C_2'(t) + (R^2/4) g(t) int_0^t g C_2 e^{-(i Dk + Gamma/2)(t - t')} dt',
/// with the convolution carried by the exponential-window recursion.
inline std::vector<cplx> big_d(const std::vector<cplx>& c2, const SystemParams& p, const Envelope& g_in,
                               const TimeGrid& grid) {
  validate_params(p);
  if (c2.size() != grid.n) fail(ErrorKind::parameter, "C_2 length does not match the grid");
  const Envelope g = resample(g_in, grid);
  auto d = quad::derivative(c2, grid.dt);
  if (p.rabi_R == 0.0) return d;
  std::vector<cplx> src(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) src[j] = g[j] * c2[j];
  const auto conv = quad::exp_window_convolve(src, p.cavity_decay_exponent(), grid.dt);
  const double r2 = 0.25 * p.rabi_R * p.rabi_R;
  for (std::size_t j = 0; j < grid.n; ++j) d[j] += r2 * g[j] * conv[j];
  return d;
}

struct DesignOptions {
  double g_min = 1e-3;
  // Once the target has emitted all but this fraction of its photon
  // probability the pump is switched off.
  double cutoff_fraction = 1e-6;
  double phase_tolerance = 1e-3;
};

struct PumpDesign {
  Envelope pump;                 // Omega_p(t) = 2 |f(t)|
  std::vector<cplx> f;           // (i/2) Omega_p e^{-i Delta_p t} as designed
  std::vector<cplx> c2;
  std::vector<cplx> d;
  std::vector<double> radicand;  // |S|^2, the remaining ground-state population
  std::size_t cutoff_index = 0;  // pump is zero from here on
  double phase_max = 0.0;        // spread of arg(-2 i f e^{i Delta_p t}) over the pulse
  bool non_real_pump = false;
};

inline PumpDesign pump_from_target(const DesignTarget& target, const SystemParams& p, const Envelope& g,
                                   const DesignOptions& opt = {}) {
  const TimeGrid& grid = target.grid;
  const std::size_t n = grid.n;
  const double h = grid.dt;
  PumpDesign out;
  out.c2 = c2_from_target(target, p, g, opt.g_min);
  out.d = big_d(out.c2, p, g, grid);

  std::vector<double> w_re(n), w_im(n), emitted(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx w = std::conj(out.d[j]) * out.c2[j];
    w_re[j] = w.real(), w_im[j] = w.imag();
    emitted[j] = std::norm(target.shape[j]);
  }
  const auto cum_re = quad::cumulative(w_re, h);
  const auto cum_emitted = quad::cumulative(emitted, h);
  const double total = cum_emitted.back();
  const double photon_fraction = target.eta_target / p.gamma_rad_ratio;

  out.radicand.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.radicand[j] = 1.0 - 2.0 * cum_re[j];
  out.cutoff_index = n;
  for (std::size_t j = 0; j < n; ++j) {
    if (photon_fraction * (total - cum_emitted[j]) < opt.cutoff_fraction) {
      out.cutoff_index = j;
      break;
    }
  }
  for (std::size_t j = 0; j < out.cutoff_index; ++j) {
    if (!(out.radicand[j] > 0.0)) {
      fail(ErrorKind::design_infeasible, "ground state exhausted at t = " + format_double(grid.time(j)) +
                                             " (radicand " + format_double(out.radicand[j]) + ")");
    }
  }

  // Phase of S from int Im(conj(D) C_2) / |S|^2.
  std::vector<double> dtheta(n, 0.0);
  for (std::size_t j = 0; j < out.cutoff_index; ++j) dtheta[j] = -w_im[j] / out.radicand[j];
  const auto theta = quad::cumulative(dtheta, h);

  out.f.assign(n, 0.0);
  std::vector<double> omega(n, 0.0);
  for (std::size_t j = 0; j < out.cutoff_index; ++j) {
    const cplx s = std::sqrt(out.radicand[j]) * std::exp(cplx(0.0, theta[j]));
    out.f[j] = out.d[j] / s;
    omega[j] = 2.0 * std::abs(out.f[j]);
  }

  std::size_t peak = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (omega[j] > omega[peak]) peak = j;
  }
  auto pump_phase = [&](std::size_t j) {
    return std::arg(cplx(0.0, -2.0) * out.f[j] * std::exp(cplx(0.0, p.delta_p * grid.time(j))));
  };
  const double ref = pump_phase(peak);
  for (std::size_t j = 0; j < n; ++j) {
    if (omega[j] <= 1e-3 * omega[peak]) continue;
    double dphase = std::remainder(pump_phase(j) - ref, 2.0 * std::numbers::pi);
    out.phase_max = std::max(out.phase_max, std::abs(dphase));
  }
  out.non_real_pump = out.phase_max > opt.phase_tolerance;
  out.pump = Envelope(grid, std::move(omega), "designed(" + target.label + ")");
  return out;
}

/// Independent route for f: RK4 on D f' = f (D' + |f|^2 C_2) with step 2h, so
/// every stage lands on a grid node. Values are returned on even nodes only
/// (odd entries are left at zero). Before the first even node where |D| > 1e-8
/// and D varies by under 1% per step, f = D (the ground state is still full);
/// RK4 takes over from there. With `literal_cubic` the
/// nonlinearity is written as -f^3 C_2, which coincides with |f|^2 f C_2 only in
/// the gauge where f is purely imaginary.
inline std::vector<cplx> integrate_pump_ode(const std::vector<cplx>& c2, const std::vector<cplx>& d,
                                            const TimeGrid& grid, std::size_t stop_index,
                                            bool literal_cubic = false) {
  const std::size_t n = grid.n;
  const double h = grid.dt;
  const auto dd = quad::derivative4(d, h);
  std::vector<cplx> f(n, 0.0);
  std::size_t start = 0;
  auto settled = [&](std::size_t j) {
    return j >= 16 && std::abs(d[j]) > 1e-8 && 2.0 * h * std::abs(dd[j]) <= 1e-2 * std::abs(d[j]);
  };
  while (start < n && !settled(start)) {
    f[start] = d[start];
    ++start;
  }
  if (start % 2) ++start;
  if (start >= n) return f;
  f[start] = d[start];
  auto rhs = [&](std::size_t k, cplx y) {
    const cplx nonlinear = literal_cubic ? -y * y * y * c2[k] : std::norm(y) * y * c2[k];
    return (dd[k] * y + nonlinear) / d[k];
  };
  const double step = 2.0 * h;
  for (std::size_t j = start; j + 2 < std::min(n, stop_index + 1); j += 2) {
    const cplx y = f[j];
    const cplx k1 = rhs(j, y);
    const cplx k2 = rhs(j + 1, y + 0.5 * step * k1);
    const cplx k3 = rhs(j + 1, y + 0.5 * step * k2);
    const cplx k4 = rhs(j + 2, y + step * k3);
    f[j + 2] = y + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return f;
}

struct RoundTripReport {
  PumpDesign design;
  WavePacket achieved;
  double achieved_eta = 0.0;
  double eta_error = 0.0;
  double l2_error = 0.0;
};

/// Designs the pump, runs it through the forward solver and compares the
/// emitted packet with the target.
inline RoundTripReport round_trip(const DesignTarget& target, const SystemParams& p, const Envelope& g,
                                  const DesignOptions& opt = {}, const SolverOptions& solver = {}) {
  RoundTripReport rep;
  rep.design = pump_from_target(target, p, g, opt);
  const auto traj = solve_ode(p, rep.design.pump, g, target.grid, solver);
  rep.achieved = wavepacket(traj, p, target.t_snapshot);
  rep.achieved_eta = rep.achieved.eta_T;
  rep.eta_error = std::abs(rep.achieved_eta - target.eta_target);
  const auto achieved_abs = abs_values(rep.achieved.phi);
  const auto target_abs = abs_values(target.shape);
  rep.l2_error = normalized_l2_distance(achieved_abs, target_abs, target.grid.dt);
  return rep;
}

}  // namespace photon
