#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gifsim/observables.hpp"

using namespace gifsim;

TEST(Quadratures, VacuumAndSqueezedVacuum) {
  const ModeMoments vac{};
  const QuadratureVariances v = quadrature_variances(vac);
  EXPECT_DOUBLE_EQ(v.x, 0.5);
  EXPECT_DOUBLE_EQ(v.p, 0.5);
  const QuadratureVariances s = quadrature_variances(squeeze_moments(vac, 0.7));
  EXPECT_NEAR(s.x, 0.5 * std::exp(1.4), 1e-14);
  EXPECT_NEAR(s.p, 0.5 * std::exp(-1.4), 1e-14);
  EXPECT_NEAR(to_db(s.p), -10.0 * 1.4 / std::log(10.0), 1e-12);
}

TEST(Quadratures, MomentsFromFockState) {
  auto layout = make_layout({30});
  const FockState s = product_state(layout, {coherent_amplitudes({0.6, 0.2}, 30)});
  const ModeMoments m = mode_moments(s, 0);
  EXPECT_NEAR(std::abs(m.mean - cplx(0.6, 0.2)), 0.0, 1e-12);
  const QuadratureVariances q = quadrature_variances(m);
  EXPECT_NEAR(q.x, 0.5, 1e-12);
  EXPECT_NEAR(q.p, 0.5, 1e-12);
}

TEST(Loss, BeamSplitterMixesInVacuum) {
  EXPECT_DOUBLE_EQ(apply_discrete_loss(0.5, 0.3), 0.5);
  EXPECT_NEAR(apply_discrete_loss(0.01, 0.96), 0.96 * 0.01 + 0.02, 1e-15);
  EXPECT_THROW(apply_discrete_loss(0.1, 1.2), std::invalid_argument);
  EXPECT_THROW(apply_discrete_loss(-0.1, 0.9), std::invalid_argument);
}

TEST(FrameTransform, VacuumMapsToSqueezedGaussian) {
  auto layout = make_layout({1});
  const std::size_t keep[] = {0};
  const WignerGrid gif = wigner_single_mode(partial_trace(vacuum_state(layout), keep), {});
  const double lambda = 1.0;
  const WignerGrid lab = wigner_frame_transform(gif, lambda);
  EXPECT_EQ(lab.frame, Frame::lab);
  double worst = 0.0;
  for (std::size_t i = 0; i < lab.x.size(); ++i)
    for (std::size_t j = 0; j < lab.p.size(); ++j) {
      const double x = lab.x[i], p = lab.p[j];
      const double exact = std::exp(-x * x * std::exp(-2 * lambda) - p * p * std::exp(2 * lambda)) / std::numbers::pi;
      worst = std::max(worst, std::abs(lab.values(Eigen::Index(i), Eigen::Index(j)) - exact));
    }
  EXPECT_LT(worst, 1e-4);
}

TEST(Resample, BilinearIsExactForPlanes) {
  WignerGrid g;
  for (int i = 0; i < 5; ++i) g.x.push_back(-1.0 + 0.5 * i);
  for (int i = 0; i < 3; ++i) g.p.push_back(-1.0 + 1.0 * i);
  g.values.resize(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) g.values(i, j) = 2.0 * g.x[i] - g.p[j] + 0.25;
  const WignerGrid r = resample(g, {.x_min = -2.0, .x_max = 0.8, .p_min = -0.9, .p_max = 0.9, .nx = 15, .np = 7});
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 7; ++j) {
      const double expected = r.x[i] < -1.0 ? 0.0 : 2.0 * r.x[i] - r.p[j] + 0.25;
      EXPECT_NEAR(r.values(i, j), expected, 1e-12);
    }
}

TEST(HybridMode, LimitsAndInterference) {
  auto layout = make_layout({2, 2});
  FockState one_a = vacuum_state(layout);
  one_a.amplitudes.setZero();
  const int occ10[] = {1, 0}, occ01[] = {0, 1};
  one_a.amplitudes[Eigen::Index(*layout->index_of(occ10))] = 1.0;
  // φ = 0 returns mode a, φ = π/2 returns mode b
  DensityMatrix h = hybrid_supermode_state(one_a, 0, 1, 0.0, 0.0);
  EXPECT_NEAR(h.rho(1, 1).real(), 1.0, 1e-12);
  h = hybrid_supermode_state(one_a, 0, 1, std::numbers::pi / 2, 0.3);
  EXPECT_NEAR(h.rho(0, 0).real(), 1.0, 1e-12);

  FockState sym = vacuum_state(layout);
  sym.amplitudes.setZero();
  sym.amplitudes[Eigen::Index(*layout->index_of(occ10))] = 1.0 / std::sqrt(2.0);
  sym.amplitudes[Eigen::Index(*layout->index_of(occ01))] = 1.0 / std::sqrt(2.0);
  const auto number = [](const DensityMatrix& d) {
    double n = 0;
    for (Eigen::Index i = 0; i < d.rho.rows(); ++i) n += double(i) * d.rho(i, i).real();
    return n;
  };
  const double phi = std::numbers::pi / 4;
  EXPECT_NEAR(number(hybrid_supermode_state(sym, 0, 1, phi, 0.0)), 1.0, 1e-12);
  EXPECT_NEAR(number(hybrid_supermode_state(sym, 0, 1, phi, std::numbers::pi)), 0.0, 1e-12);
  EXPECT_NEAR(number(hybrid_supermode_state(sym, 0, 1, 0.3, 0.8)), 0.5 + std::cos(0.3) * std::sin(0.3) * std::cos(0.8),
              1e-12);
  EXPECT_NEAR(hybrid_supermode_state(sym, 0, 1, 0.3, 0.8).trace(), 1.0, 1e-12);
}

TEST(HybridMode, CoherentPairStaysCoherent) {
  // uneven cutoffs, so levels beyond either input mode are populated
  const cplx alpha{1.2, 0.3}, beta{-0.4, 0.9};
  auto layout = make_layout({30, 20});
  const FockState s = product_state(layout, {coherent_amplitudes(alpha, 30), coherent_amplitudes(beta, 20)});
  const double phi = 0.6, theta = 0.4;
  const DensityMatrix h = hybrid_supermode_state(s, 0, 1, phi, theta);
  ASSERT_EQ(h.rho.rows(), 49);
  cplx mean{};
  for (Eigen::Index n = 1; n < h.rho.rows(); ++n) mean += std::sqrt(double(n)) * h.rho(n, n - 1);
  const cplx expected = std::cos(phi) * alpha + std::polar(std::sin(phi), theta) * beta;
  EXPECT_NEAR(std::abs(mean - expected), 0.0, 1e-9);
  EXPECT_NEAR(h.trace(), 1.0, 1e-9);
}

TEST(Pearson, KnownSeries) {
  const std::vector<double> x{1, 2, 3, 4}, y{8, 6, 4, 2}, z{1, 3, 2, 4};
  EXPECT_NEAR(pearson_correlation(x, y), -1.0, 1e-15);
  EXPECT_NEAR(pearson_correlation(x, z), 0.8, 1e-12);
  EXPECT_THROW(pearson_correlation(std::span<const double>(x).first(1), std::span<const double>(y).first(1)),
               std::invalid_argument);
}

TEST(SqueezingReport, VacuumFrameGivesGaussianValues) {
  const WavegridConfig g = WavegridConfig::from_range(16, -4, 4, 0, 0, 0.3);
  const std::vector<double> t{0.4};
  const auto s = integrate_gif_multimode(g, make_gaussian_pump(g, 10.0), PumpModel::depleted, t)[0];
  const SupermodeBasis b = decompose_supermodes(s, g, {});
  const FockState vac = vacuum_state(make_layout({3, 3, 2, 2, 2}));
  const SqueezingReport r = squeezing_report(b, vac);
  ASSERT_EQ(r.lab.size(), 2u);
  EXPECT_NEAR(r.lab[0].p, 0.5 * std::exp(-2 * b.lambdas[0]), 1e-12);
  EXPECT_NEAR(r.lab[1].x, 0.5 * std::exp(2 * b.lambdas[1]), 1e-12);
  EXPECT_NEAR(r.purity_f0, 1.0, 1e-12);
  EXPECT_NEAR(r.entropy, 0.0, 1e-8);
}
