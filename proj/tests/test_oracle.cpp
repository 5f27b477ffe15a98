#include <gtest/gtest.h>

#include <cmath>

#include "gifsim/oracle.hpp"

using namespace gifsim;

namespace {

WavegridConfig tiny(int m) { return WavegridConfig::from_range(m, -0.5, 0.5, 0.0, 0.0, 0.3); }

}  // namespace

TEST(Oracle, HamiltonianHermitianAndNumberConserving) {
  const TinyGridSystem sys = build_tiny_hamiltonian(tiny(2), {.max_excitation = 8});
  const MatrixXc h = to_dense(sys.hamiltonian);
  const MatrixXc n = to_dense(generalized_number_operator(sys));
  EXPECT_LT((h - h.adjoint()).norm(), 1e-12);
  EXPECT_LT((h * n - n * h).norm(), 1e-10 * h.norm());
  EXPECT_EQ(sys.signal_modes(), 2);
  EXPECT_EQ(sys.pump_modes(), 3);
}

TEST(Oracle, RejectsLargeGrids) {
  EXPECT_THROW(build_tiny_hamiltonian(tiny(4)), std::invalid_argument);
}

TEST(Oracle, SinglePointReproducesTwoModeLabModel) {
  WavegridConfig g;
  g.m = 1;
  g.ds = 1.0;
  g.d0 = -0.5;
  g.d2 = 0.0;
  OracleOptions opt{.max_excitation = 40};
  opt.schrodinger.ode.rtol = 1e-11;
  opt.schrodinger.ode.atol = 1e-13;
  const TinyGridSystem sys = build_tiny_hamiltonian(g, opt);
  const std::vector<double> t{1.5};
  const auto s = oracle_evolve(sys, PumpProfile{VectorXc::Constant(1, 1.0)}, t, opt);
  EXPECT_NEAR(s[0].pump_number, 0.29032734, 2e-8);
  EXPECT_NEAR(s[0].signal_number, 1.41934532, 2e-8);
}

TEST(Oracle, FrozenTwoPointDepletion) {
  const WavegridConfig g = tiny(2);
  const PumpProfile pump = make_gaussian_pump(g, 2.0, 1e-2);
  const OracleOptions opt{.max_excitation = 20};
  const TinyGridSystem sys = build_tiny_hamiltonian(g, opt);
  const std::vector<double> t{0.0, 0.5};
  OracleDiagnostics diag;
  const auto s = oracle_evolve(sys, pump, t, opt, &diag);
  EXPECT_LT(diag.truncation_loss, 1e-4);
  const double r = 1.0 - s[1].pump_number / s[0].pump_number;
  EXPECT_NEAR(r, 1.858555e-2, 2e-8);
  EXPECT_NEAR(s[1].generalized_number, s[0].generalized_number, 1e-8);
  EXPECT_NEAR(s[1].spectral_density.sum() * g.ds, s[1].signal_number, 1e-12);
}

TEST(Oracle, VacuumWaveformQuadratures) {
  const TinyGridSystem sys = build_tiny_hamiltonian(tiny(3), {.max_excitation = 4});
  const FockState vac = vacuum_state(sys.layout);
  VectorXc w(3);
  w << 1.0, cplx(0, 1), 0.5;
  const QuadratureVariances q = waveform_quadratures(sys, vac, w);
  EXPECT_NEAR(q.x, 0.5, 1e-15);
  EXPECT_NEAR(q.p, 0.5, 1e-15);
}
