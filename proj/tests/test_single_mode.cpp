#include <gtest/gtest.h>

#include <cmath>

#include "gifsim/single_mode.hpp"

using namespace gifsim;

namespace {

SingleModeParams fig2_params(std::vector<double> times) {
  SingleModeParams p;
  p.delta = -0.5;
  p.beta0 = 1.0;
  p.sample_times = std::move(times);
  return p;
}

}  // namespace

TEST(SingleGif, ShortTimeDepletionScaling) {
  const auto traj = integrate_gif_single(fig2_params({0.0, 0.05}), PumpModel::depleted);
  const LabMoments m = gaussian_lab_moments(traj[1]);
  const double ratio = depletion_ratio(m.pump_number, 1.0) / asymptotic_R_single(0.05);
  EXPECT_GE(ratio, 0.95);
  EXPECT_LE(ratio, 1.05);
}

TEST(SingleGif, ManleyRoweConserved) {
  std::vector<double> times;
  for (int k = 0; k <= 30; ++k) times.push_back(0.05 * k);
  const auto traj = integrate_gif_single(fig2_params(times), PumpModel::depleted);
  for (const auto& s : traj) EXPECT_LE(std::abs(manley_rowe_single(s) / 2.0 - 1.0), 1e-8) << "t=" << s.time;
}

TEST(SingleGif, BogoliubovConstraint) {
  const auto traj = integrate_gif_single(fig2_params({0.5, 1.0, 1.5}), PumpModel::depleted);
  for (const auto& s : traj) EXPECT_NEAR(std::norm(s.c) - std::norm(s.s), 1.0, 1e-9);
}

TEST(SingleGif, UndepletedSignalGrowsMonotonically) {
  std::vector<double> times;
  for (int k = 0; k <= 30; ++k) times.push_back(0.05 * k);
  const auto traj = integrate_gif_single(fig2_params(times), PumpModel::undepleted);
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GT(std::norm(traj[i].s), std::norm(traj[i - 1].s));
  // the pump is pinned to its free rotation
  EXPECT_NEAR(std::abs(traj.back().beta - std::polar(1.0, 0.5 * 1.5)), 0.0, 1e-9);
}

TEST(SingleGif, ZeroPumpStaysVacuum) {
  SingleModeParams p = fig2_params({1.0});
  p.beta0 = 0.0;
  const auto traj = integrate_gif_single(p, PumpModel::depleted);
  EXPECT_EQ(std::abs(traj[0].s), 0.0);
}

TEST(SingleLab, FrozenReferenceAtFinalTime) {
  SchrodingerOptions opt;
  opt.ode.rtol = 1e-11;
  opt.ode.atol = 1e-13;
  const auto lab = evolve_lab_full(fig2_params({1.5}), 40, 20, opt);
  const LabMoments m = lab_moments(lab[0]);
  EXPECT_NEAR(m.pump_number, 0.29032734, 2e-8);
  EXPECT_NEAR(m.signal_number, 1.41934532, 2e-8);
  EXPECT_NEAR(m.signal_number + 2 * m.pump_number, 1.0 * 2, 1e-9);
}

TEST(SingleFrame, MatchesLabFrameEvolution) {
  std::vector<double> times;
  for (int k = 1; k <= 15; ++k) times.push_back(0.1 * k);
  SchrodingerOptions opt;
  opt.ode.rtol = 1e-11;
  opt.ode.atol = 1e-13;
  const auto lab = evolve_lab_full(fig2_params(times), 40, 20, opt);
  const auto frame = evolve_gif_frame_single(fig2_params(times), 150, 16, opt);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const LabMoments l = lab_moments(lab[i]);
    const LabMoments f = reconstruct_lab_moments(frame[i].gif, -0.5, frame[i].state);
    EXPECT_LE(std::abs(f.signal_number / l.signal_number - 1.0), 1e-5) << "t=" << times[i];
    EXPECT_LE(std::abs(f.pump_number / l.pump_number - 1.0), 1e-5) << "t=" << times[i];
    EXPECT_NEAR(f.signal_x_var, l.signal_x_var, 1e-5 * l.signal_x_var);
    EXPECT_NEAR(f.signal_p_var, l.signal_p_var, 1e-5 * l.signal_p_var);
  }
}

TEST(SingleFrame, VacuumFrameStateReproducesGaussianMoments) {
  const auto traj = integrate_gif_single(fig2_params({0.7}), PumpModel::depleted);
  const LayoutPtr layout = single_mode_layout(4, 3);
  const LabMoments g = gaussian_lab_moments(traj[0]);
  const LabMoments r = reconstruct_lab_moments(traj[0], -0.5, vacuum_state(layout, 0.7));
  EXPECT_NEAR(g.signal_number, r.signal_number, 1e-12);
  EXPECT_NEAR(g.pump_number, r.pump_number, 1e-12);
  EXPECT_NEAR(g.signal_p_var, r.signal_p_var, 1e-12);
}

TEST(SingleFrame, ResidualHamiltonianIsHermitian) {
  const auto traj = integrate_gif_single(fig2_params({0.4}), PumpModel::depleted);
  const LayoutPtr layout = single_mode_layout(8, 5);
  const MatrixXc h = to_dense(build_h_gif_single(traj[0], -0.5, *layout));
  EXPECT_LT((h - h.adjoint()).norm(), 1e-12);
}

TEST(SingleModeParams, RejectsUnorderedTimes) {
  EXPECT_THROW(integrate_gif_single(fig2_params({0.2, 0.1}), PumpModel::depleted), std::invalid_argument);
}
