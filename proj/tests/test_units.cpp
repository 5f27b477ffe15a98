#include <gtest/gtest.h>

#include <cmath>

#include "gifsim/units.hpp"

using namespace gifsim::units;

TEST(Units, ThinFilmNonlinearLength) {
  const PhysicalParams p = PhysicalParams::from_lab_units(456.5, 330.0, 1.0, 0.18, 1.0);
  const NonlinearLength l = nonlinear_length(p);
  EXPECT_NEAR(l.l_eff, 0.014, 0.05 * 0.014);
  EXPECT_NEAR(l.loss_over_l_eff, 0.01, 0.002);
  EXPECT_NEAR(l.l_eff, 0.18 * l.l_chi2, 1e-15);
  EXPECT_NEAR(1.0 - std::pow(2.0, -l.l_eff / p.l_loss), l.loss_over_l_eff, 1e-15);
}

TEST(Units, FormulaByHand) {
  PhysicalParams p;
  p.lambda_sh = 500e-9;
  p.eta = 1e6;
  p.k2_fh = 2e-27;
  const double omega = 2 * 3.141592653589793 * kSpeedOfLight / 500e-9;
  const double expected = std::cbrt(2e-27 / std::pow(kHbar * omega * 1e6, 2));
  EXPECT_NEAR(nonlinear_length(p).l_chi2 / expected, 1.0, 1e-12);
}

TEST(Units, TimeDistanceRoundTrip) {
  const NonlinearLength l = nonlinear_length(PhysicalParams{});
  EXPECT_NEAR(normalized_time(physical_distance(0.8, l), l), 0.8, 1e-15);
}

TEST(Units, WavelengthScaling) {
  const WavelengthScaling s = wavelength_scaling(2.0);
  EXPECT_NEAR(s.eta_scale, 1.0 / 16.0, 1e-15);
  EXPECT_NEAR(s.length_scale, std::pow(2.0, 10.0 / 3.0), 1e-12);
  // consistency with the length formula: eta ~ λ^-4 and ω ~ 1/λ
  PhysicalParams p;
  PhysicalParams q = p;
  q.lambda_sh *= 2.0;
  q.eta *= s.eta_scale;
  EXPECT_NEAR(nonlinear_length(q).l_chi2 / nonlinear_length(p).l_chi2, s.length_scale, 1e-10);
}

TEST(Units, Validation) {
  PhysicalParams p;
  p.eta = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(nonlinear_length(p), std::invalid_argument);
  EXPECT_DOUBLE_EQ(si_to_fs2_per_mm(fs2_per_mm_to_si(3.0)), 3.0);
  EXPECT_DOUBLE_EQ(m_to_nm(nm_to_m(456.5)), 456.5);
}
