#include <gtest/gtest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "gifsim/supermodes.hpp"

using namespace gifsim;

namespace {

WavegridConfig grid(int m) { return WavegridConfig::from_range(m, -4.0, 4.0, 0.0, 0.0, 0.3); }

MultimodeGifState frame_at(const WavegridConfig& g, double t, double n_sh = 10.0) {
  const std::vector<double> times{t};
  return integrate_gif_multimode(g, make_gaussian_pump(g, n_sh), PumpModel::depleted, times)[0];
}

}  // namespace

TEST(Supermodes, DecompositionReconstructsGreensFunctions) {
  const WavegridConfig g = grid(32);
  const MultimodeGifState s = frame_at(g, 0.5);
  const SupermodeBasis b = decompose_supermodes(s, g, {});
  const Eigen::VectorXd sh = b.lambdas.array().sinh(), ch = b.lambdas.array().cosh();
  const MatrixXc s_rec = b.w.adjoint() * sh.asDiagonal() * b.v.conjugate();
  const MatrixXc c_rec = b.w.adjoint() * ch.asDiagonal() * b.v;
  EXPECT_LT((s_rec - s.s).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((c_rec - s.c).cwiseAbs().maxCoeff(), 1e-7);
  for (int m = 1; m < g.m; ++m) EXPECT_GE(b.lambdas[m - 1], b.lambdas[m]);
}

TEST(Supermodes, WaveformsAreOrthonormal) {
  const WavegridConfig g = grid(32);
  const SupermodeBasis b = decompose_supermodes(frame_at(g, 0.4), g, {.m_fh = 3});
  EXPECT_EQ(b.m_fh(), 3);
  EXPECT_EQ(b.m_sh(), 5);
  EXPECT_LT((b.signal * b.signal.adjoint() - MatrixXc::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT((b.pump * b.pump.adjoint() - MatrixXc::Identity(5, 5)).norm(), 1e-12);
  EXPECT_EQ(b.pump_pairs.size(), 5u);
  EXPECT_EQ(b.pump_pairs.front(), std::make_pair(0, 0));
}

TEST(Supermodes, SeedMatchesShortTimeLimit) {
  const WavegridConfig g = grid(32);
  const PumpProfile p = make_gaussian_pump(g, 10.0);
  const SupermodeBasis seed = seed_supermodes(g, p, {});
  const SupermodeBasis early = decompose_supermodes(frame_at(g, 1e-4), g, {});
  for (int m = 0; m < 2; ++m) EXPECT_GT(std::abs(seed.signal.row(m).dot(early.signal.row(m))), 0.999);
}

TEST(Supermodes, PreviousBasisFixesSigns) {
  const WavegridConfig g = grid(32);
  const SupermodeBasis a = decompose_supermodes(frame_at(g, 0.30), g, {});
  const SupermodeBasis b = decompose_supermodes(frame_at(g, 0.31), g, {}, &a);
  for (int m = 0; m < 2; ++m) EXPECT_GT(a.signal.row(m).dot(b.signal.row(m)).real(), 0.99);
  for (int l = 0; l < b.m_sh(); ++l) EXPECT_GT(a.pump.row(l).dot(b.pump.row(l)).real(), 0.99);
}

TEST(RotationGenerator, RecoversKnownGenerator) {
  MatrixXc gen(3, 3);
  gen << cplx(0, 0.3), cplx(0.2, 0.1), cplx(-0.4, 0.0), cplx(-0.2, 0.1), cplx(0, -0.1), cplx(0.05, 0.2),
      cplx(0.4, 0.0), cplx(-0.05, 0.2), cplx(0, 0.2);
  MatrixXc from = MatrixXc::Zero(3, 8);
  for (int i = 0; i < 3; ++i) from(i, 2 * i) = 1.0;
  const double dt = 0.05;
  const MatrixXc rot = (dt * gen).exp();
  const MatrixXc to = rot * from;
  EXPECT_LT((rotation_generator(from, to, dt) - gen).norm(), 1e-10);
  EXPECT_EQ(rotation_generator(from, from, dt).norm(), 0.0);
}

TEST(RotationGenerator, MisalignedBasisAborts) {
  MatrixXc from = MatrixXc::Zero(1, 4), to = MatrixXc::Zero(1, 4);
  from(0, 0) = 1.0;
  to(0, 1) = 1.0;
  EXPECT_THROW(rotation_generator(from, to, 0.01), NumericalError);
}

TEST(SupermodeHamiltonian, AssembledOperatorIsHermitian) {
  const WavegridConfig g = grid(16);
  const MultimodeGifState s = frame_at(g, 0.6);
  const SupermodeBasis prev = decompose_supermodes(frame_at(g, 0.59), g, {});
  const SupermodeBasis b = decompose_supermodes(s, g, {}, &prev);
  const GifTensors t = build_gif_tensors(s, g, b, &prev, 0.01);
  auto layout = make_layout({6, 5, 4, 3, 3});
  const SupermodeHamiltonian h(layout, 2, 3);
  const MatrixXc dense = to_dense(h.assemble(t));
  EXPECT_LT((dense - dense.adjoint()).norm(), 1e-10 * dense.norm());
  std::vector<cplx> coef;
  h.coefficients(t, coef);
  const VectorXc psi = VectorXc::Random(dense.rows());
  VectorXc out;
  h.apply(coef, psi, out);
  EXPECT_LT((dense * psi - out).norm(), 1e-10 * out.norm());
}

TEST(Nongaussian, SinglePointGridReproducesFrameModel) {
  WavegridConfig g;
  g.m = 1;
  g.ds = 1.0;
  g.d0 = -0.5;
  g.d2 = 0.0;
  const PumpProfile p{VectorXc::Constant(1, 1.0)};
  const std::vector<double> times{0.0, 0.5, 1.0, 1.5};
  NongaussianOptions opt;
  opt.decompose.m_fh = 1;
  opt.signal_cutoffs = {30};
  opt.pump_cutoffs = {12};
  opt.fock.ode.rtol = opt.fock.ode.atol = 1e-11;
  const auto ng = evolve_nongaussian(g, p, times, opt);

  SingleModeParams sp;
  sp.delta = -0.5;
  sp.beta0 = 1.0;
  sp.sample_times = times;
  SchrodingerOptions so;
  so.ode.rtol = 1e-11;
  so.ode.atol = 1e-13;
  const auto frame = evolve_gif_frame_single(sp, 30, 12, so);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const LabMoments ref = reconstruct_lab_moments(frame[i].gif, -0.5, frame[i].state);
    EXPECT_NEAR(pump_photon_number(ng[i], g), ref.pump_number, 1e-6) << "t=" << times[i];
    EXPECT_NEAR(signal_photon_number(ng[i], g), ref.signal_number, 1e-6) << "t=" << times[i];
  }
}

TEST(Nongaussian, NormAndShortTimeAgreement) {
  const WavegridConfig g = grid(24);
  const PumpProfile p = make_gaussian_pump(g, 10.0);
  const std::vector<double> times{0.0, 0.1, 0.2};
  NongaussianOptions opt;
  opt.signal_cutoffs = {8, 5};
  opt.pump_cutoffs = {4, 3, 3};
  NongaussianDiagnostics diag;
  const auto ng = evolve_nongaussian(g, p, times, opt, &diag);
  ASSERT_EQ(ng.size(), times.size());
  EXPECT_LT(diag.max_norm_drift, 1e-7);
  EXPECT_LT(diag.max_drift.max(), 1e-8);
  for (const auto& s : ng) {
    const double r_ng = 1.0 - pump_photon_number(s, g) / 10.0;
    const double r_g = 1.0 - gifsim::pump_photon_number(s.gif) / 10.0;
    EXPECT_NEAR(r_ng, r_g, 0.01 * r_g + 1e-12) << "t=" << s.gif.time;
  }
  // vacuum frame state at t = 0
  EXPECT_NEAR(std::abs(ng[0].state.amplitudes[0]), 1.0, 1e-15);
}

TEST(Nongaussian, GaussianSampleMatchesFrameObservables) {
  const WavegridConfig g = grid(24);
  const MultimodeGifState s = frame_at(g, 0.3);
  const SupermodeBasis b = decompose_supermodes(s, g, {});
  const NongaussianSample sample = gaussian_sample(s, b);
  EXPECT_NEAR(pump_photon_number(sample, g), gifsim::pump_photon_number(s), 1e-10);
  EXPECT_NEAR(signal_photon_number(sample, g), gifsim::signal_photon_number(s), 1e-10);
  EXPECT_LT((signal_spectral_density(sample, g) - gaussian_spectral_density(s, g)).norm(), 1e-10);
}

TEST(Nongaussian, RejectsBadSchedule) {
  const WavegridConfig g = grid(8);
  const PumpProfile p = make_gaussian_pump(g, 1.0);
  const std::vector<double> times{0.2, 0.1};
  EXPECT_THROW(evolve_nongaussian(g, p, times), std::invalid_argument);
}
