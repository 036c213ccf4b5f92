#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "photon_shaper/core_model.hpp"
#include "photon_shaper/quadrature.hpp"

namespace photon {

/// Emitter and effective cavity amplitudes on a grid. c_cav carries the cavity
/// memory, leaked the probability that has left through the cavity (both the
/// wanted outcoupling and the unwanted losses).
struct AmplitudeTrajectory {
  TimeGrid grid;
  std::vector<cplx> c1;
  std::vector<cplx> c2;
  std::vector<cplx> c_cav;
  std::vector<double> leaked;
  Envelope pump;
  Envelope coupling;
  std::string method;

  double norm(std::size_t j) const {
    return std::norm(c1[j]) + std::norm(c2[j]) + std::norm(c_cav[j]) + leaked[j];
  }
};

struct SolverOptions {
  bool force_coarse = false;
  // Upper bound on n^2 for the quadratic-cost Volterra path.
  double volterra_pair_budget = 4.0e9;
};

/// Memory kernel K(t, t') of the reduced emitter equation; envelopes are read
/// through eval_envelope.
inline cplx kernel(const SystemParams& p, const Envelope& pump, const Envelope& g, double t,
                   double t_prime) {
  if (t_prime > t) fail(ErrorKind::domain, "kernel needs t' <= t");
  if (t_prime < 0.0) fail(ErrorKind::domain, "kernel needs t' >= 0");
  const double s = t - t_prime;
  const double drive = eval_envelope(pump, t) * eval_envelope(pump, t_prime);
  const double cav = p.rabi_R * p.rabi_R * eval_envelope(g, t) * eval_envelope(g, t_prime);
  return -0.25 * drive * std::exp(cplx(0.0, -p.delta_p * s)) -
         0.25 * cav * std::exp(p.cavity_decay_exponent() * s);
}

namespace detail {

inline void check_solver_inputs(const SystemParams& p, const TimeGrid& grid, const SolverOptions& opt) {
  validate_params(p);
  if (grid.n < 2) fail(ErrorKind::parameter, "grid needs at least two samples");
  require_refined(grid, opt.force_coarse);
}

}  // namespace detail

/// Production path. The kernel is a sum of two separable exponentials, so the
/// memory integral is carried exactly by the ground-state and cavity
/// amplitudes; the local system is integrated by classical RK4 with the leaked
/// probability as a fourth state component.
inline AmplitudeTrajectory solve_ode(const SystemParams& p, const Envelope& pump_in,
                                     const Envelope& g_in, const TimeGrid& grid,
                                     const SolverOptions& opt = {}) {
  detail::check_solver_inputs(p, grid, opt);
  const Envelope pump = resample(pump_in, grid);
  const Envelope g = resample(g_in, grid);
  const std::size_t n = grid.n;
  const double h = grid.dt;
  const double half_r = 0.5 * p.rabi_R;
  const cplx a = p.cavity_decay_exponent();
  const double gamma = p.gamma_total;

  struct State {
    cplx c1, c2, cc;
    double leaked;
  };
  auto rhs = [&](double t, double omega, double gt, const State& y) {
    const cplx phase = std::exp(cplx(0.0, p.delta_p * t));
    const cplx half_i_omega(0.0, 0.5 * omega);
    return State{half_i_omega * phase * y.c2,
                 half_i_omega * std::conj(phase) * y.c1 - half_r * gt * y.cc,
                 half_r * gt * y.c2 + a * y.cc, gamma * std::norm(y.cc)};
  };
  auto axpy = [](const State& y, double s, const State& k) {
    return State{y.c1 + s * k.c1, y.c2 + s * k.c2, y.cc + s * k.cc, y.leaked + s * k.leaked};
  };

  AmplitudeTrajectory traj{grid, std::vector<cplx>(n), std::vector<cplx>(n), std::vector<cplx>(n),
                           std::vector<double>(n), pump, g, "ode"};
  State y{1.0, 0.0, 0.0, 0.0};
  auto store = [&](std::size_t j) {
    traj.c1[j] = y.c1;
    traj.c2[j] = y.c2;
    traj.c_cav[j] = y.cc;
    traj.leaked[j] = y.leaked;
  };
  store(0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double t = grid.time(j);
    const double om_mid = pump.midpoint(j), g_mid = g.midpoint(j);
    const State k1 = rhs(t, pump[j], g[j], y);
    const State k2 = rhs(t + 0.5 * h, om_mid, g_mid, axpy(y, 0.5 * h, k1));
    const State k3 = rhs(t + 0.5 * h, om_mid, g_mid, axpy(y, 0.5 * h, k2));
    const State k4 = rhs(t + h, pump[j + 1], g[j + 1], axpy(y, h, k3));
    y.c1 += h / 6.0 * (k1.c1 + 2.0 * k2.c1 + 2.0 * k3.c1 + k4.c1);
    y.c2 += h / 6.0 * (k1.c2 + 2.0 * k2.c2 + 2.0 * k3.c2 + k4.c2);
    y.cc += h / 6.0 * (k1.cc + 2.0 * k2.cc + 2.0 * k3.cc + k4.cc);
    y.leaked += h / 6.0 * (k1.leaked + 2.0 * k2.leaked + 2.0 * k3.leaked + k4.leaked);
    store(j + 1);
  }
  return traj;
}

/// Reference path: integrates the integro-differential equation for C_2
/// directly. Each RK4 stage evaluates the memory integral over the whole
/// history with a fourth-order closed rule (O(n^2) total). C_1, C_c and the
/// leaked probability are then recovered by quadrature of their defining
/// integrals.
inline AmplitudeTrajectory solve_volterra(const SystemParams& p, const Envelope& pump_in,
                                          const Envelope& g_in, const TimeGrid& grid,
                                          const SolverOptions& opt = {}) {
  detail::check_solver_inputs(p, grid, opt);
  const double pairs = static_cast<double>(grid.n) * static_cast<double>(grid.n);
  if (pairs > opt.volterra_pair_budget) {
    fail(ErrorKind::capacity, "Volterra path needs n^2 = " + format_double(pairs) +
                                  " kernel pairs, above the budget of " +
                                  format_double(opt.volterra_pair_budget));
  }
  const Envelope pump = resample(pump_in, grid);
  const Envelope g = resample(g_in, grid);
  const std::size_t n = grid.n;
  const double h = grid.dt;
  const cplx a = p.cavity_decay_exponent();
  const double r2 = p.rabi_R * p.rabi_R;

  // Kernel phase tables on integer and half-integer lags.
  std::vector<double> p_re(n + 1), p_im(n + 1), q_re(n + 1), q_im(n + 1);
  std::vector<double> ph_re(n + 1), ph_im(n + 1), qh_re(n + 1), qh_im(n + 1);
  for (std::size_t m = 0; m <= n; ++m) {
    const double lag = static_cast<double>(m) * h;
    const cplx pe = std::exp(cplx(0.0, -p.delta_p * lag)), qe = std::exp(a * lag);
    const cplx phe = std::exp(cplx(0.0, -p.delta_p * (lag + 0.5 * h))), qhe = std::exp(a * (lag + 0.5 * h));
    p_re[m] = pe.real(), p_im[m] = pe.imag(), q_re[m] = qe.real(), q_im[m] = qe.imag();
    ph_re[m] = phe.real(), ph_im[m] = phe.imag(), qh_re[m] = qhe.real(), qh_im[m] = qhe.imag();
  }
  auto tab = [](const std::vector<double>& re, const std::vector<double>& im, std::size_t m) {
    return cplx(re[m], im[m]);
  };

  std::vector<cplx> c2(n, 0.0);
  // u1 = Omega * C2 and u2 = g * C2 in split storage for the history sums.
  std::vector<double> u1_re(n, 0.0), u1_im(n, 0.0), u2_re(n, 0.0), u2_im(n, 0.0);
  auto u1 = [&](std::size_t k) { return cplx(u1_re[k], u1_im[k]); };
  auto u2 = [&](std::size_t k) { return cplx(u2_re[k], u2_im[k]); };
  const bool drive_on = pump.peak() > 0.0;
  const bool cavity_on = r2 > 0.0 && g.peak() > 0.0;

  // raw_cav[j] = sum_{k<=j} Q[j-k] u2_k with final values; reused for C_c.
  std::vector<cplx> raw_cav(n, 0.0);
  cplx raw_drive_j = 0.0, raw_cav_j = 0.0;  // stage-1 sums at the current node

  auto drive_term = [&](double t, double omega) {
    return cplx(0.0, 0.5 * omega) * std::exp(cplx(0.0, -p.delta_p * t));
  };

  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double t = grid.time(j);
    const double om_j = pump[j], g_j = g[j];
    const double om_m = pump.midpoint(j), g_m = g.midpoint(j);
    const double om_n = pump[j + 1], g_n = g[j + 1];
    raw_cav[j] = raw_cav_j;

    // History sums for stage 4 (lag j+1-k) and the half stages (lag j-k+1/2).
    double hd_re = 0, hd_im = 0, hc_re = 0, hc_im = 0;
    double ad_re = 0, ad_im = 0, ac_re = 0, ac_im = 0;
    if (drive_on) {
      for (std::size_t k = 0; k <= j; ++k) {
        const std::size_t m = j + 1 - k, mh = j - k;
        const double ur = u1_re[k], ui = u1_im[k];
        hd_re += p_re[m] * ur - p_im[m] * ui;
        hd_im += p_re[m] * ui + p_im[m] * ur;
        ad_re += ph_re[mh] * ur - ph_im[mh] * ui;
        ad_im += ph_re[mh] * ui + ph_im[mh] * ur;
      }
    }
    if (cavity_on) {
      for (std::size_t k = 0; k <= j; ++k) {
        const std::size_t m = j + 1 - k, mh = j - k;
        const double ur = u2_re[k], ui = u2_im[k];
        hc_re += q_re[m] * ur - q_im[m] * ui;
        hc_im += q_re[m] * ui + q_im[m] * ur;
        ac_re += qh_re[mh] * ur - qh_im[mh] * ui;
        ac_im += qh_re[mh] * ui + qh_im[mh] * ur;
      }
    }
    const cplx hist_drive(hd_re, hd_im), hist_cav(hc_re, hc_im);
    const cplx half_drive(ad_re, ad_im), half_cav(ac_re, ac_im);

    // Stage 1: memory at t_j over final nodes 0..j.
    cplx mem1 = 0.0;
    {
      cplx sd = raw_drive_j, sc = raw_cav_j;
      quad::end_corrections(j + 1, [&](std::size_t k, double dw) {
        sd += dw * tab(p_re, p_im, j - k) * u1(k);
        sc += dw * tab(q_re, q_im, j - k) * u2(k);
      });
      mem1 = -0.25 * h * (om_j * sd + r2 * g_j * sc);
    }
    const cplx k1 = drive_term(t, om_j) + mem1;

    // Stages 2 and 3: history to t_j plus the half interval with the
    // provisional midpoint value.
    cplx hist_half_d = half_drive, hist_half_c = half_cav;
    quad::end_corrections(j + 1, [&](std::size_t k, double dw) {
      hist_half_d += dw * tab(ph_re, ph_im, j - k) * u1(k);
      hist_half_c += dw * tab(qh_re, qh_im, j - k) * u2(k);
    });
    auto half_stage = [&](cplx y) {
      cplx loc_d, loc_c;
      const cplx fd_s = om_m * y, fc_s = g_m * y;
      if (j >= 1) {
        loc_d = (-1.0 / 72.0) * tab(ph_re, ph_im, 1) * u1(j - 1) + (7.0 / 24.0) * tab(ph_re, ph_im, 0) * u1(j) +
                (2.0 / 9.0) * fd_s;
        loc_c = (-1.0 / 72.0) * tab(qh_re, qh_im, 1) * u2(j - 1) + (7.0 / 24.0) * tab(qh_re, qh_im, 0) * u2(j) +
                (2.0 / 9.0) * fc_s;
      } else {
        loc_d = 0.25 * (tab(ph_re, ph_im, 0) * u1(j) + fd_s);
        loc_c = 0.25 * (tab(qh_re, qh_im, 0) * u2(j) + fc_s);
      }
      const cplx mem = -0.25 * h * (om_m * (hist_half_d + loc_d) + r2 * g_m * (hist_half_c + loc_c));
      return drive_term(t + 0.5 * h, om_m) + mem;
    };
    const cplx k2 = half_stage(c2[j] + 0.5 * h * k1);
    const cplx k3 = half_stage(c2[j] + 0.5 * h * k2);

    // Stage 4: nodes 0..j+1 with the provisional end value.
    const cplx y4 = c2[j] + h * k3;
    auto stage4_sums = [&](cplx u1_end, cplx u2_end) {
      cplx sd = hist_drive + u1_end, sc = hist_cav + u2_end;
      quad::end_corrections(j + 2, [&](std::size_t k, double dw) {
        const cplx v1 = k == j + 1 ? u1_end : u1(k);
        const cplx v2 = k == j + 1 ? u2_end : u2(k);
        sd += dw * tab(p_re, p_im, j + 1 - k) * v1;
        sc += dw * tab(q_re, q_im, j + 1 - k) * v2;
      });
      return std::pair{sd, sc};
    };
    const auto [s4d, s4c] = stage4_sums(om_n * y4, g_n * y4);
    const cplx k4 = drive_term(t + h, om_n) - 0.25 * h * (om_n * s4d + r2 * g_n * s4c);

    c2[j + 1] = c2[j] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const cplx v1 = om_n * c2[j + 1], v2 = g_n * c2[j + 1];
    u1_re[j + 1] = v1.real(), u1_im[j + 1] = v1.imag();
    u2_re[j + 1] = v2.real(), u2_im[j + 1] = v2.imag();
    raw_drive_j = hist_drive + v1;
    raw_cav_j = hist_cav + v2;
  }
  raw_cav[n - 1] = raw_cav_j;

  AmplitudeTrajectory traj{grid, std::vector<cplx>(n), c2, std::vector<cplx>(n),
                           std::vector<double>(n), pump, g, "volterra"};

  // C_1 = 1 + int (i/2) Omega e^{i Delta_p t'} C_2 dt'
  std::vector<cplx> dc1(n);
  for (std::size_t k = 0; k < n; ++k) {
    dc1[k] = cplx(0.0, 0.5 * pump[k]) * std::exp(cplx(0.0, p.delta_p * grid.time(k))) * c2[k];
  }
  const auto c1_int = quad::cumulative(dc1, h);
  for (std::size_t j = 0; j < n; ++j) traj.c1[j] = 1.0 + c1_int[j];

  // C_c(t_j) = (R/2) int_0^{t_j} g C_2 e^{a (t_j - t')} dt'
  for (std::size_t j = 0; j < n; ++j) {
    cplx s = raw_cav[j];
    quad::end_corrections(j + 1, [&](std::size_t k, double dw) { s += dw * tab(q_re, q_im, j - k) * u2(k); });
    traj.c_cav[j] = 0.5 * p.rabi_R * h * s;
  }
  std::vector<double> flux(n);
  for (std::size_t j = 0; j < n; ++j) flux[j] = p.gamma_total * std::norm(traj.c_cav[j]);
  traj.leaked = quad::cumulative(flux, h);
  return traj;
}

/// Trajectory CSV: t, Re C1, Im C1, Re C2, Im C2, Re Cc, Im Cc, leaked. With
/// stride > 1 only every stride-th row (and the last one) is written.
inline std::string trajectory_to_csv(const AmplitudeTrajectory& traj, std::size_t stride = 1) {
  CsvWriter w("t,re_c1,im_c1,re_c2,im_c2,re_cc,im_cc,leaked");
  const std::size_t n = traj.grid.n;
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t j = 0; j < n; j = (j + stride < n || j + 1 == n) ? j + stride : n - 1) {
    w.row(traj.grid.time(j), traj.c1[j].real(), traj.c1[j].imag(), traj.c2[j].real(), traj.c2[j].imag(),
          traj.c_cav[j].real(), traj.c_cav[j].imag(), traj.leaked[j]);
  }
  return w.str();
}

}  // namespace photon
