#include <gtest/gtest.h>

#include "photon_shaper/inverse_designer.hpp"
#include "support.hpp"

using namespace photon;
namespace ts = testing_support;

namespace {

SystemParams params(double R, double delta = 0.0) {
  SystemParams p;
  p.rabi_R = R, p.delta_k = delta, p.delta_p = delta;
  return p;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::io;
}

// Largest |closed form - RK4| over even nodes where the ground state holds at least `floor`.
double ode_gap(const PumpDesign& d, const TimeGrid& grid, double floor) {
  const auto f = integrate_pump_ode(d.c2, d.d, grid, d.cutoff_index);
  double gap = 0.0;
  for (std::size_t j = 0; j < d.cutoff_index; j += 2) {
    if (d.radicand[j] >= floor) gap = std::max(gap, std::abs(f[j] - d.f[j]));
  }
  return gap;
}

}  // namespace

TEST(InverseDesign, DoublePeakRoundTrip) {
  const auto grid = make_grid(200, 1e-3);
  const auto p = params(8);
  const auto g = Envelope::constant(grid, 1.0);
  const auto rep = round_trip(make_target(ts::double_gaussian(1, 70, 130, 12), grid, 0.9), p, g);
  EXPECT_LE(rep.l2_error, 0.01);
  EXPECT_LE(rep.eta_error, 0.01);
  const auto& om = rep.design.pump.samples();
  const auto mid = static_cast<std::size_t>(100.0 / grid.dt);
  const double first = *std::max_element(om.begin(), om.begin() + mid);
  const double second = *std::max_element(om.begin() + mid, om.end());
  EXPECT_GT(second, first);
  EXPECT_FALSE(rep.design.non_real_pump);
}

TEST(InverseDesign, ClosedFormAgreesWithDirectIntegration) {
  const auto grid = make_grid(200, 1e-3);
  const auto g = Envelope::constant(grid, 1.0);
  for (const auto& shape : {ts::double_gaussian(1, 70, 130, 12), ts::flattop(1, 100, 50, 8)}) {
    for (double eta : {0.2, 0.9}) {
      const auto d = pump_from_target(make_target(shape, grid, eta), params(8), g);
      EXPECT_LE(ode_gap(d, grid, 0.1), 1e-6) << shape.label() << " eta " << eta;
    }
  }
}

TEST(InverseDesign, ClosedFormWithDetuning) {
  const auto grid = make_grid(200, 1e-3);
  const auto p = params(5, 1.0);
  const auto g = render_pulse(ts::gaussian(1, 100, 80), grid);
  const auto d = pump_from_target(make_target(ts::gaussian(1, 100, 20), grid, 0.5), p, g);
  EXPECT_LE(ode_gap(d, grid, 0.1), 1e-6);
  // A real target off two-photon resonance asks for a chirped pump.
  EXPECT_TRUE(d.non_real_pump);
}

TEST(InverseDesign, LiteralCubicMatchesInImaginaryGauge) {
  const auto grid = make_grid(200, 1e-3);
  const auto d = pump_from_target(make_target(ts::gaussian(1, 100, 20), grid, 0.6), params(4),
                                  Envelope::constant(grid, 1.0));
  const cplx i(0.0, 1.0);
  std::vector<cplx> c2i(d.c2.size()), di(d.d.size());
  for (std::size_t j = 0; j < c2i.size(); ++j) c2i[j] = i * d.c2[j], di[j] = i * d.d[j];
  const auto ours = integrate_pump_ode(d.c2, d.d, grid, d.cutoff_index);
  const auto literal = integrate_pump_ode(c2i, di, grid, d.cutoff_index, true);
  double gap = 0.0;
  for (std::size_t j = 0; j < d.cutoff_index; j += 2) gap = std::max(gap, std::abs(literal[j] - i * ours[j]));
  EXPECT_LT(gap, 1e-12);
}

TEST(InverseDesign, WeakTargetsScaleWithSqrtEta) {
  const auto grid = make_grid(200, 1e-3);
  const auto g = Envelope::constant(grid, 1.0);
  const auto shape = ts::gaussian(1, 100, 20);
  const auto a = pump_from_target(make_target(shape, grid, 1e-4), params(8), g);
  const auto b = pump_from_target(make_target(shape, grid, 4e-4), params(8), g);
  EXPECT_NEAR(b.pump.peak() / a.pump.peak(), 2.0, 2e-3);
  for (std::size_t j = 0; j < grid.n; ++j) {
    if (a.radicand[j] < 1.0 - 1e-3) FAIL() << "weak design drained the ground state";
  }
}

TEST(InverseDesign, LowEfficiencyPumpTracksShape) {
  const auto grid = make_grid(200, 1e-3);
  const auto target = make_target(ts::flattop(1, 100, 50, 8), grid, 0.2);
  const auto rep = round_trip(target, params(8), Envelope::constant(grid, 1.0));
  const auto shape = abs_values(rep.achieved.phi);
  EXPECT_LE(normalized_l2_distance(rep.design.pump.samples(), shape, grid.dt), 0.1);
}

TEST(InverseDesign, HarderTargetsDrainMoreGroundState) {
  const auto grid = make_grid(200, 1e-3);
  const auto g = Envelope::constant(grid, 1.0);
  double prev = 2.0;
  for (double eta : {0.1, 0.3, 0.5, 0.7, 0.85}) {
    const auto d = pump_from_target(make_target(ts::gaussian(1, 100, 20), grid, eta), params(6), g);
    const double lowest = *std::min_element(d.radicand.begin(), d.radicand.begin() + d.cutoff_index);
    EXPECT_LT(lowest, prev);
    prev = lowest;
  }
}

TEST(InverseDesign, EmitterAmplitudeFromForwardRun) {
  const auto grid = make_grid(40, 1e-3);
  const auto p = params(2, 1.0);
  const auto g = Envelope::constant(grid, 1.0);
  const auto traj = solve_ode(p, render_pulse(ts::gaussian(1, 10, 3), grid), g, grid);
  const auto wp = wavepacket(traj, p, 40);
  DesignTarget t{grid, wp.phi, wp.eta_T, 40.0, "forward"};
  const auto c2 = c2_from_target(t, p, g);
  EXPECT_LE(ts::max_abs_diff(c2, traj.c2), 1e-3);
}

TEST(InverseDesign, EmitterAmplitudeScalesWithSqrtEta) {
  const auto grid = make_grid(200, 1e-2);
  const auto g = Envelope::constant(grid, 1.0);
  const auto shape = ts::gaussian(1, 100, 20);
  const auto a = c2_from_target(make_target(shape, grid, 0.1), params(3), g);
  const auto b = c2_from_target(make_target(shape, grid, 0.4), params(3), g);
  for (std::size_t j = 0; j < a.size(); ++j) ASSERT_NEAR(std::abs(b[j] - 2.0 * a[j]), 0.0, 1e-14);
}

TEST(InverseDesign, BigDRecursionAgainstDirectQuadrature) {
  const auto grid = make_grid(5, 1e-3);
  const auto p = params(3, 0.7);
  const auto g = render_pulse(ts::gaussian(1, 2.5, 2), grid);
  std::vector<cplx> c2(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double t = grid.time(j);
    c2[j] = 0.3 * std::sin(0.7 * t) * std::exp(cplx(0.0, 0.2 * t)) + cplx(0.0, 0.1 * t * t / 25.0);
  }
  const auto d = big_d(c2, p, g, grid);
  const auto dc2 = quad::derivative(c2, grid.dt);
  double err = 0.0;
  std::vector<cplx> integrand;
  for (std::size_t j = 0; j < grid.n; j += 7) {
    integrand.resize(j + 1);
    for (std::size_t k = 0; k <= j; ++k) {
      integrand[k] = g[k] * c2[k] * std::exp(p.cavity_decay_exponent() * (grid.time(j) - grid.time(k)));
    }
    const cplx conv = j == 0 ? cplx(0.0) : quad::integrate(std::span<const cplx>(integrand), grid.dt);
    err = std::max(err, std::abs(d[j] - (dc2[j] + 2.25 * g[j] * conv)));
  }
  EXPECT_LE(err, 1e-8);

  const auto bare = big_d(c2, params(0), g, grid);
  for (std::size_t j = 0; j < grid.n; ++j) ASSERT_EQ(bare[j], dc2[j]);
  const auto zero = big_d(std::vector<cplx>(grid.n, 0.0), p, g, grid);
  for (const auto& v : zero) ASSERT_EQ(v, cplx(0.0));
}

TEST(InverseDesign, SingularCoupling) {
  const auto grid = make_grid(200, 1e-2);
  const auto target = make_target(ts::gaussian(1, 100, 20), grid, 0.5);
  const auto weak_g = render_pulse(ts::gaussian(1, 20, 5), grid);
  EXPECT_EQ(kind_of([&] { c2_from_target(target, params(5), weak_g); }), ErrorKind::singular_coupling);
  EXPECT_EQ(kind_of([&] { c2_from_target(target, params(0), Envelope::constant(grid, 1.0)); }),
            ErrorKind::singular_coupling);
}

TEST(InverseDesign, UnphysicalTarget) {
  const auto grid = make_grid(20, 1e-3);
  const auto target = make_target(ts::gaussian(1, 10, 0.3), grid, 0.9);
  EXPECT_EQ(kind_of([&] { c2_from_target(target, params(0.5), Envelope::constant(grid, 1.0)); }),
            ErrorKind::unphysical_target);
}

TEST(InverseDesign, TargetValidation) {
  const auto grid = make_grid(200, 1e-2);
  const auto p = params(5);
  auto target = make_target(ts::gaussian(1, 100, 20), grid, 0.5);
  EXPECT_NO_THROW(validate_target(target, p));

  auto bad = target;
  bad.eta_target = 0.95;
  EXPECT_EQ(kind_of([&] { validate_target(bad, p); }), ErrorKind::parameter);
  bad.eta_target = 0.0;
  EXPECT_EQ(kind_of([&] { validate_target(bad, p); }), ErrorKind::parameter);

  bad = target;
  for (auto& v : bad.shape) v *= 1.1;
  EXPECT_EQ(kind_of([&] { validate_target(bad, p); }), ErrorKind::parameter);

  // Packet already emitting at tau = 0.
  EXPECT_EQ(kind_of([&] { validate_target(make_target(ts::gaussian(1, 5, 20), grid, 0.5), p); }),
            ErrorKind::parameter);
}

TEST(InverseDesign, PumpIsRealForResonantTargets) {
  const auto grid = make_grid(200, 1e-3);
  const auto d = pump_from_target(make_target(ts::flattop(1, 100, 50, 8), grid, 0.9), params(8),
                                  Envelope::constant(grid, 1.0));
  EXPECT_LE(d.phase_max, 1e-3);
  EXPECT_FALSE(d.non_real_pump);
  for (std::size_t j = d.cutoff_index; j < grid.n; ++j) ASSERT_EQ(d.pump[j], 0.0);
}
