#include <gtest/gtest.h>

#include "photon_shaper/pulse_library.hpp"
#include "support.hpp"

using namespace photon;
namespace ts = testing_support;

TEST(Pulses, PeakEqualsAmplitude) {
  const auto grid = make_grid(200.0, 1e-2);
  for (const auto& spec : {ts::gaussian(0.7, 100, 21), ts::double_gaussian(1.5, 70, 130, 15),
                           ts::flattop(5, 100, 50, 8), ts::oscillating(2, 0.1, 25)}) {
    EXPECT_DOUBLE_EQ(render_pulse(spec, grid).peak(), spec.amplitude) << spec.label();
  }
  PulseSpec s2;
  s2.family = PulseFamily::sin2;
  s2.amplitude = 5;
  s2.centers = {100};
  s2.widths = {50};
  const auto e = render_pulse(s2, grid);
  EXPECT_DOUBLE_EQ(e.peak(), 5.0);
  EXPECT_EQ(e[0], 0.0);
  EXPECT_EQ(e[static_cast<std::size_t>(40.0 / grid.dt)], 0.0);
}

TEST(Pulses, ConstantIsFlat) {
  const auto e = render_pulse(ts::constant(0.3), make_grid(10, 0.01));
  for (std::size_t j = 0; j < e.size(); ++j) ASSERT_EQ(e[j], 0.3);
}

TEST(Pulses, OscillatingDepth) {
  const auto e = render_pulse(ts::oscillating(1.0, 0.1, 25), make_grid(100, 1e-3));
  double lo = 1e9;
  for (std::size_t j = 0; j < e.size(); ++j) lo = std::min(lo, e[j]);
  EXPECT_NEAR(lo, 0.9 / 1.1, 1e-9);
}

TEST(Pulses, FlattopTailIsRelativelyAccurate) {
  // Far tail keeps full relative precision (no 1 + tanh cancellation).
  const auto spec = ts::flattop(1, 100, 50, 8);
  const double t = 2.0, x = (t - 50.0) / 8.0;
  const double expected = 0.25 * (2.0 / (1.0 + std::exp(-2.0 * x))) * (1.0 - std::tanh((t - 150.0) / 8.0));
  EXPECT_NEAR(detail::shape_value(spec, t) / expected, 1.0, 1e-14);
}

TEST(Pulses, ParameterErrors) {
  const auto grid = make_grid(200, 0.01);
  auto expect_param = [&](PulseSpec s) {
    try {
      render_pulse(s, grid);
      FAIL() << s.label();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::parameter);
    }
  };
  expect_param(ts::gaussian(-1, 100, 10));
  expect_param(ts::gaussian(1, 100, 0));
  expect_param(ts::gaussian(1, 300, 10));
  expect_param(ts::oscillating(1, 1.0, 25));
  expect_param(ts::oscillating(1, 0.1, 0));
  expect_param(ts::flattop(1, 100, 50, 0));
  auto dg = ts::double_gaussian(1, 70, 130, 10);
  dg.widths = {10};
  expect_param(dg);
}

TEST(Pulses, FamilyNamesRoundTrip) {
  for (auto f : {PulseFamily::gaussian, PulseFamily::sin2, PulseFamily::double_gaussian, PulseFamily::flattop,
                 PulseFamily::constant, PulseFamily::oscillating}) {
    EXPECT_EQ(parse_pulse_family(to_string(f)), f);
  }
  EXPECT_FALSE(parse_pulse_family("lorentzian"));
}
