#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "photon_shaper/forward_solver.hpp"
#include "photon_shaper/quadrature.hpp"

namespace photon {

/// Outgoing single-photon wave packet at snapshot time T, indexed by retarded
/// time tau = T - z/c. The part emitted at time t sits at tau = t.
struct WavePacket {
  std::vector<double> tau;
  std::vector<cplx> phi;
  double eta_T = 0.0;
  double t_snapshot = 0.0;
  // max_tau | |phi| sqrt(eta_T / ratio) - |C_c| |, filled in by wavepacket().
  double identity_residual = 0.0;

  double dtau() const { return tau.size() > 1 ? tau[1] - tau[0] : 0.0; }
};

struct SpectralDensity {
  std::vector<double> delta;
  std::vector<double> s;
};

enum class EfficiencyMethod { identity, double_integral };

namespace detail {

inline std::size_t snapshot_index(const TimeGrid& grid, double T) {
  if (!(T >= 0.0) || T > grid.t_end * (1.0 + 1e-12)) {
    fail(ErrorKind::domain, "snapshot T = " + format_double(T) + " outside the trajectory");
  }
  return std::min(static_cast<std::size_t>(std::llround(T / grid.dt)), grid.n - 1);
}

// Efficiency as the literal double integral over the emission history
//   eta(t) = (R^2/4) ratio [ int_0^t g C2(t') int_0^t' g C2*(t'') e^{i(Dk + i/2)(t'-t'')} + c.c. ].
// O(n^2); used as the oracle for the local identity.
inline std::vector<double> efficiency_double_integral(const AmplitudeTrajectory& traj, const SystemParams& p) {
  const std::size_t n = traj.grid.n;
  const double h = traj.grid.dt;
  const cplx b(-0.5 * p.gamma_total, p.delta_k);  // i (Delta_k + i Gamma/2)
  std::vector<double> e_re(n), e_im(n);
  for (std::size_t m = 0; m < n; ++m) {
    const cplx e = std::exp(b * (static_cast<double>(m) * h));
    e_re[m] = e.real(), e_im[m] = e.imag();
  }
  std::vector<double> v_re(n), v_im(n);  // g C2*
  for (std::size_t k = 0; k < n; ++k) {
    const cplx v = traj.coupling[k] * std::conj(traj.c2[k]);
    v_re[k] = v.real(), v_im[k] = v.imag();
  }
  std::vector<cplx> outer(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sr = 0, si = 0;
    for (std::size_t k = 0; k <= j; ++k) {
      const std::size_t m = j - k;
      sr += e_re[m] * v_re[k] - e_im[m] * v_im[k];
      si += e_re[m] * v_im[k] + e_im[m] * v_re[k];
    }
    cplx inner(sr, si);
    quad::end_corrections(j + 1, [&](std::size_t k, double dw) {
      inner += dw * cplx(e_re[j - k], e_im[j - k]) * cplx(v_re[k], v_im[k]);
    });
    inner *= h;
    outer[j] = traj.coupling[j] * traj.c2[j] * inner;
  }
  const auto cum = quad::cumulative(outer, h);
  const double pref = 0.25 * p.rabi_R * p.rabi_R * p.gamma_rad_ratio;
  std::vector<double> eta(n);
  for (std::size_t j = 0; j < n; ++j) eta[j] = pref * 2.0 * cum[j].real();
  return eta;
}

}  // namespace detail

/// eta(t_j) for every grid node. The identity form eta = ratio (|C_c|^2 +
/// leaked) is the exact resummation of the double integral; the double
/// integral itself is available as a check.
inline std::vector<double> efficiency_curve(const AmplitudeTrajectory& traj, const SystemParams& p,
                                            EfficiencyMethod method = EfficiencyMethod::identity) {
  validate_params(p);
  if (method == EfficiencyMethod::double_integral) return detail::efficiency_double_integral(traj, p);
  std::vector<double> eta(traj.grid.n);
  for (std::size_t j = 0; j < eta.size(); ++j) {
    eta[j] = p.gamma_rad_ratio * (std::norm(traj.c_cav[j]) + traj.leaked[j]);
  }
  return eta;
}

inline double efficiency_at(const AmplitudeTrajectory& traj, const SystemParams& p, double T) {
  const std::size_t j = detail::snapshot_index(traj.grid, T);
  return p.gamma_rad_ratio * (std::norm(traj.c_cav[j]) + traj.leaked[j]);
}

/// Spatiotemporal shape of the outgoing packet:
///   phi(tau) = (R/2) sqrt(ratio / eta(T)) int_0^tau g C2*(t') e^{(i Dk - Gamma/2)(tau - t')} dt',
/// evaluated by an exponential-window quadrature of the emission history.
inline WavePacket wavepacket(const AmplitudeTrajectory& traj, const SystemParams& p, double T) {
  validate_params(p);
  const std::size_t jT = detail::snapshot_index(traj.grid, T);
  const double eta = efficiency_at(traj, p, T);
  if (!(eta > 0.0)) fail(ErrorKind::undefined_shape, "nothing was emitted (eta(T) = 0)");
  const std::size_t m = jT + 1;
  std::vector<cplx> src(m);
  for (std::size_t k = 0; k < m; ++k) src[k] = traj.coupling[k] * std::conj(traj.c2[k]);
  const cplx a(-0.5 * p.gamma_total, p.delta_k);
  const auto conv = quad::exp_window_convolve(std::span<const cplx>(src), a, traj.grid.dt);
  const double scale = 0.5 * p.rabi_R * std::sqrt(p.gamma_rad_ratio / eta);

  WavePacket wp;
  wp.tau.resize(m);
  wp.phi.resize(m);
  wp.eta_T = eta;
  wp.t_snapshot = traj.grid.time(jT);
  const double back = std::sqrt(eta / p.gamma_rad_ratio);
  for (std::size_t k = 0; k < m; ++k) {
    wp.tau[k] = traj.grid.time(k);
    wp.phi[k] = scale * conv[k];
    wp.identity_residual =
        std::max(wp.identity_residual, std::abs(std::abs(wp.phi[k]) * back - std::abs(traj.c_cav[k])));
  }
  return wp;
}

inline std::vector<double> intensity(const WavePacket& wp) {
  std::vector<double> out(wp.phi.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = wp.eta_T * std::norm(wp.phi[k]);
  return out;
}

/// Spectral density of the outgoing mode,
///   s(delta) = (ratio Gamma R^2 / 8 pi) |int_0^T g C2 e^{i delta t'} dt'|^2 / ((delta - Dk)^2 + Gamma^2/4),
/// whose integral over delta equals eta(T).
inline SpectralDensity spectrum(const AmplitudeTrajectory& traj, const SystemParams& p, double T,
                                const std::vector<double>& delta_grid) {
  validate_params(p);
  if (delta_grid.size() < 2) fail(ErrorKind::coverage, "delta grid needs at least two points");
  const auto [lo, hi] = std::minmax_element(delta_grid.begin(), delta_grid.end());
  const double span = 20.0 * p.gamma_total;
  if (*lo > p.delta_k - span + 1e-12 || *hi < p.delta_k + span - 1e-12) {
    fail(ErrorKind::coverage, "delta grid must span [delta_k - 20, delta_k + 20]");
  }
  const std::size_t m = detail::snapshot_index(traj.grid, T) + 1;
  const double h = traj.grid.dt;
  std::vector<double> src_re(m), src_im(m);
  for (std::size_t k = 0; k < m; ++k) {
    const cplx v = quad::node_weight(k, m) * h * traj.coupling[k] * traj.c2[k];
    src_re[k] = v.real(), src_im[k] = v.imag();
  }
  const double gamma = p.gamma_total;
  const double pref = p.gamma_rad_ratio * gamma * p.rabi_R * p.rabi_R / (8.0 * std::numbers::pi);
  SpectralDensity out{delta_grid, std::vector<double>(delta_grid.size())};

  // Blocks of detunings advance together so the rotor recurrences are
  // independent; rotors are re-anchored every 1024 steps.
  constexpr std::size_t B = 8;
  for (std::size_t i0 = 0; i0 < delta_grid.size(); i0 += B) {
    const std::size_t nb = std::min(B, delta_grid.size() - i0);
    double step_re[B] = {}, step_im[B] = {}, rot_re[B], rot_im[B], acc_re[B] = {}, acc_im[B] = {};
    for (std::size_t b = 0; b < B; ++b) {
      const double d = b < nb ? delta_grid[i0 + b] : 0.0;
      step_re[b] = std::cos(d * h), step_im[b] = std::sin(d * h);
      rot_re[b] = 1.0, rot_im[b] = 0.0;
    }
    for (std::size_t k0 = 0; k0 < m; k0 += 1024) {
      const std::size_t k1 = std::min(m, k0 + 1024);
      for (std::size_t b = 0; b < B; ++b) {
        const double d = b < nb ? delta_grid[i0 + b] : 0.0;
        rot_re[b] = std::cos(d * h * static_cast<double>(k0));
        rot_im[b] = std::sin(d * h * static_cast<double>(k0));
      }
      for (std::size_t k = k0; k < k1; ++k) {
        const double sr = src_re[k], si = src_im[k];
        for (std::size_t b = 0; b < B; ++b) {
          acc_re[b] += sr * rot_re[b] - si * rot_im[b];
          acc_im[b] += sr * rot_im[b] + si * rot_re[b];
          const double r = rot_re[b] * step_re[b] - rot_im[b] * step_im[b];
          rot_im[b] = rot_re[b] * step_im[b] + rot_im[b] * step_re[b];
          rot_re[b] = r;
        }
      }
    }
    for (std::size_t b = 0; b < nb; ++b) {
      const double x = delta_grid[i0 + b] - p.delta_k;
      out.s[i0 + b] = pref * (acc_re[b] * acc_re[b] + acc_im[b] * acc_im[b]) / (x * x + 0.25 * gamma * gamma);
    }
  }
  return out;
}

inline std::vector<double> uniform_delta_grid(double center, double half_span, std::size_t points) {
  std::vector<double> d(points);
  for (std::size_t i = 0; i < points; ++i) {
    d[i] = center - half_span + 2.0 * half_span * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return d;
}

/// Single-mode Wigner function of the excited outgoing mode: a mixture of the
/// vacuum and the one-photon Fock state with weights 1 - eta and eta.
inline double wigner_mode1(double eta, double alpha_re, double alpha_im) {
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorKind::parameter, "eta must lie in [0, 1]");
  const double r2 = alpha_re * alpha_re + alpha_im * alpha_im;
  const double gauss = 2.0 / std::numbers::pi * std::exp(-2.0 * r2);
  return (1.0 - eta) * gauss + eta * (4.0 * r2 - 1.0) * gauss;
}

/// Columns: tau, z_over_c (= T - tau), Re phi, Im phi, |phi|, intensity.
inline std::string wavepacket_to_csv(const WavePacket& wp, std::size_t stride = 1) {
  CsvWriter w("tau,z_over_c,re_phi,im_phi,abs_phi,intensity");
  const std::size_t n = wp.tau.size();
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t k = 0; k < n; k = (k + stride < n || k + 1 == n) ? k + stride : n - 1) {
    w.row(wp.tau[k], wp.t_snapshot - wp.tau[k], wp.phi[k].real(), wp.phi[k].imag(), std::abs(wp.phi[k]),
          wp.eta_T * std::norm(wp.phi[k]));
  }
  return w.str();
}

inline std::string spectrum_to_csv(const SpectralDensity& sd) {
  CsvWriter w("delta,s");
  for (std::size_t i = 0; i < sd.delta.size(); ++i) w.row(sd.delta[i], sd.s[i]);
  return w.str();
}

/// Normalized L2 distance between two non-negative profiles on a common
/// uniform grid: both are scaled to unit L2 norm first.
inline double normalized_l2_distance(std::span<const double> a, std::span<const double> b, double h) {
  if (a.size() != b.size()) fail(ErrorKind::parameter, "profiles differ in length");
  std::vector<double> a2(a.size()), b2(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) a2[i] = a[i] * a[i], b2[i] = b[i] * b[i];
  const double na = std::sqrt(quad::integrate(std::span<const double>(a2), h));
  const double nb = std::sqrt(quad::integrate(std::span<const double>(b2), h));
  if (!(na > 0.0) || !(nb > 0.0)) fail(ErrorKind::parameter, "cannot normalize a vanishing profile");
  std::vector<double> d2(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] / na - b[i] / nb;
    d2[i] = d * d;
  }
  return std::sqrt(std::max(0.0, quad::integrate(std::span<const double>(d2), h)));
}

inline std::vector<double> abs_values(std::span<const cplx> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
  return out;
}

}  // namespace photon
