#include <gtest/gtest.h>

#include "photon_shaper/core_model.hpp"
#include "support.hpp"

using namespace photon;

TEST(SystemParams, DefaultsAndPole) {
  SystemParams p;
  EXPECT_DOUBLE_EQ(p.gamma_rad_ratio, 0.9);
  p.delta_k = 1.5;
  EXPECT_EQ(p.cavity_pole(), cplx(1.5, -0.5));
  EXPECT_EQ(p.cavity_decay_exponent(), cplx(-0.5, -1.5));
  EXPECT_NEAR(p.gamma_rad() + p.gamma_loss(), 1.0, 1e-15);
}

TEST(SystemParams, ValidationNamesTheField) {
  SystemParams p;
  p.rabi_R = 5, p.delta_k = 1, p.delta_p = 1;
  EXPECT_NO_THROW(validate_params(p));
  p.gamma_rad_ratio = 1.2;
  try {
    validate_params(p);
    FAIL() << "expected a parameter error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parameter);
    EXPECT_NE(std::string(e.what()).find("gamma_rad_ratio"), std::string::npos);
  }
  p.gamma_rad_ratio = 0.9;
  p.rabi_R = -1;
  EXPECT_THROW(validate_params(p), Error);
  p.rabi_R = std::nan("");
  EXPECT_THROW(validate_params(p), Error);
}

TEST(SystemParams, UnitRoundTrip) {
  PhysicalParams phys{2.0e8, 4.0e7, -1.0e7, 3.6e7, 0.4e7};
  const auto nat = to_natural_units(phys);
  EXPECT_DOUBLE_EQ(nat.gamma_k, 4.0e7);
  EXPECT_DOUBLE_EQ(nat.params.rabi_R, 5.0);
  EXPECT_DOUBLE_EQ(nat.params.gamma_rad_ratio, 0.9);
  const auto back = to_physical_units(nat.params, nat.gamma_k);
  EXPECT_NEAR(back.rabi_R, phys.rabi_R, 1e-6);
  EXPECT_NEAR(back.gamma_loss, phys.gamma_loss, 1e-6);
  EXPECT_THROW(to_natural_units(PhysicalParams{}), Error);
}

TEST(TimeGrid, EndsExactlyAtTEnd) {
  const auto g = make_grid(350.0, 1e-3);
  EXPECT_EQ(g.n, 350001u);
  EXPECT_DOUBLE_EQ(g.time(g.n - 1), 350.0);
  EXPECT_TRUE(g.refined());
  EXPECT_FALSE(make_grid(10.0, 0.05).refined());
}

TEST(TimeGrid, RejectsBadInput) {
  EXPECT_THROW(make_grid(-1.0, 1e-3), Error);
  EXPECT_THROW(make_grid(1.0, 0.0), Error);
  try {
    make_grid(1e6, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::capacity);
  }
  try {
    require_refined(make_grid(10.0, 0.05), false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::refinement);
  }
  EXPECT_NO_THROW(require_refined(make_grid(10.0, 0.05), true));
}

TEST(Envelope, RejectsNegativeAndMismatchedSamples) {
  const auto g = make_grid(1.0, 0.25);
  EXPECT_THROW(Envelope(g, {0, 1, -1, 0, 0}), Error);
  EXPECT_THROW(Envelope(g, {0, 1}), Error);
}

TEST(Envelope, LinearInterpolation) {
  const auto g = make_grid(1.0, 0.25);
  Envelope e(g, {0, 1, 3, 2, 0});
  EXPECT_DOUBLE_EQ(eval_envelope(e, 0.25), 1.0);
  EXPECT_DOUBLE_EQ(eval_envelope(e, 0.375), 2.0);
  EXPECT_DOUBLE_EQ(eval_envelope(e, 1.0), 0.0);
  try {
    eval_envelope(e, 1.5);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::domain);
  }
}

TEST(Envelope, CubicMidpointIsExactForCubics) {
  const auto g = make_grid(2.0, 0.1);
  std::vector<double> v(g.n);
  auto f = [](double t) { return 1.0 + t + 0.5 * t * t + 0.25 * t * t * t; };
  for (std::size_t j = 0; j < g.n; ++j) v[j] = f(g.time(j));
  Envelope e(g, v);
  for (std::size_t j = 0; j + 1 < g.n; ++j) EXPECT_NEAR(e.midpoint(j), f(g.time(j) + 0.05), 1e-13);
}

TEST(Envelope, CsvRoundTripIsExact) {
  const auto g = make_grid(3.0, 0.01);
  const auto e = render_pulse(testing_support::gaussian(0.7, 1.3, 0.4), g);
  const auto text = envelope_to_csv(e);
  EXPECT_EQ(text.rfind("# t,value\n", 0), 0u);
  const auto back = envelope_from_csv(text);
  ASSERT_EQ(back.size(), e.size());
  for (std::size_t j = 0; j < e.size(); ++j) EXPECT_EQ(back[j], e[j]);
}

TEST(Envelope, CsvErrorsCarryLineNumbers) {
  try {
    envelope_from_csv("# t,value\n0,1\n0.5,x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(envelope_from_csv("0,1\n0.5,1\n0.75,1\n"), Error);
}

TEST(Envelope, ResampleRequiresCoverage) {
  const auto fine = make_grid(2.0, 0.01);
  const auto e = render_pulse(testing_support::gaussian(1.0, 1.0, 0.3), fine);
  const auto coarse = resample(e, make_grid(2.0, 0.02));
  EXPECT_DOUBLE_EQ(coarse[50], e[100]);
  EXPECT_THROW(resample(e, make_grid(3.0, 0.01)), Error);
}
