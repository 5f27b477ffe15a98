#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gifsim/fock.hpp"

using namespace gifsim;

TEST(ModeLayout, FullProductEnumeration) {
  ModeLayout layout({3, 4});
  EXPECT_EQ(layout.dimension(), 12u);
  // mode 0 is the most significant index
  EXPECT_EQ(layout.occupation(4, 0), 1);
  EXPECT_EQ(layout.occupation(4, 1), 0);
  const int occ[] = {2, 3};
  EXPECT_EQ(layout.index_of(occ).value(), 11u);
  const int outside[] = {3, 0};
  EXPECT_FALSE(layout.index_of(outside).has_value());
}

TEST(ModeLayout, BudgetKeepsWeightedShell) {
  ModeLayout layout({5, 5, 3}, {1, 1, 2}, 4);
  std::size_t count = 0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 3; ++c)
        if (a + b + 2 * c <= 4) ++count;
  EXPECT_EQ(layout.dimension(), count);
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    const auto o = layout.occupations(i);
    EXPECT_LE(o[0] + o[1] + 2 * o[2], 4);
  }
  const int over[] = {2, 2, 1};
  EXPECT_FALSE(layout.index_of(over).has_value());
}

TEST(ModeLayout, DimensionCapThrows) {
  EXPECT_THROW(ModeLayout({100, 100, 100}, 1000), std::exception);
}

TEST(FockOperators, LadderMatrixElements) {
  ModeLayout layout({4, 3});
  const MatrixXc a = to_dense(annihilation(layout, 0));
  const MatrixXc b = to_dense(annihilation(layout, 1));
  // a|2,1> = sqrt2 |1,1>
  const int from[] = {2, 1}, to[] = {1, 1};
  EXPECT_NEAR(std::abs(a(*layout.index_of(to), *layout.index_of(from))), std::sqrt(2.0), 1e-14);
  EXPECT_LT((a * b - b * a).norm(), 1e-14);
  const MatrixXc n = to_dense(number_operator(layout, 0));
  EXPECT_LT((n - a.adjoint() * a).norm(), 1e-13);
}

TEST(FockOperators, BudgetLadderStaysInside) {
  auto layout = std::make_shared<const ModeLayout>(std::vector<int>{6, 4}, std::vector<int>{1, 2}, 5);
  const MatrixXc a = to_dense(annihilation(*layout, 0));
  const MatrixXc b = to_dense(annihilation(*layout, 1));
  // a†a† b maps the shell into itself, so the pair term is exactly Hermitian-compatible.
  const MatrixXc pair = a.adjoint() * a.adjoint() * b;
  for (Eigen::Index i = 0; i < pair.rows(); ++i)
    for (Eigen::Index j = 0; j < pair.cols(); ++j)
      if (std::abs(pair(i, j)) > 0) {
        const auto oi = layout->occupations(std::size_t(i));
        const auto oj = layout->occupations(std::size_t(j));
        EXPECT_EQ(oi[0] + 2 * oi[1], oj[0] + 2 * oj[1]);
      }
}

TEST(OperatorSum, FrozenMatchesAssembled) {
  ModeLayout layout({5, 4});
  OperatorSum sum;
  const SparseOp a = annihilation(layout, 0), b = annihilation(layout, 1);
  sum.add(SparseOp(adjoint(a) * adjoint(a) * b));
  sum.add(number_operator(layout, 1));
  sum.add(SparseOp(adjoint(a) * b));
  const std::vector<cplx> coef{{0.3, -0.7}, {0.25, 0.0}, {-0.1, 0.4}};
  VectorXc psi = VectorXc::Random(Eigen::Index(layout.dimension()));
  VectorXc before, after;
  sum.apply(coef, psi, before);
  const SparseOp full = sum.assemble(coef);
  sum.freeze();
  sum.apply(coef, psi, after);
  EXPECT_LT((before - after).norm(), 1e-13);
  EXPECT_LT((VectorXc(full * psi) - after).norm(), 1e-13);
  EXPECT_LT((to_dense(full) - to_dense(full).adjoint()).norm(), 1e-14);
  EXPECT_THROW(sum.add(number_operator(layout, 0)), std::logic_error);
}

TEST(States, CoherentAmplitudesAndProductState) {
  const cplx alpha{0.8, -0.3};
  const VectorXc c = coherent_amplitudes(alpha, 30);
  EXPECT_NEAR(c.squaredNorm(), 1.0, 1e-14);
  auto layout = make_layout({30});
  FockState s = product_state(layout, {c});
  EXPECT_NEAR(std::abs(expectation(annihilation(*layout, 0), s) - alpha), 0.0, 1e-12);
  EXPECT_NEAR(expectation(number_operator(*layout, 0), s).real(), std::norm(alpha), 1e-12);

  double loss = 0.0;
  FockState cut = product_state(make_layout({2}), {coherent_amplitudes(1.0, 30)}, &loss);
  EXPECT_NEAR(cut.norm(), 1.0, 1e-14);
  EXPECT_NEAR(loss, 1.0 - 2.0 * std::exp(-1.0), 1e-14);
}

TEST(States, LeakageReport) {
  auto layout = make_layout({3, 2});
  FockState s = vacuum_state(layout);
  EXPECT_EQ(fock_leakage(s).max(), 0.0);
  s.amplitudes.setZero();
  const int occ[] = {2, 0};
  s.amplitudes[Eigen::Index(*layout->index_of(occ))] = 1.0;
  EXPECT_NEAR(fock_leakage(s).top_level, 1.0, 1e-15);
}

TEST(Schrodinger, NumberOperatorIsPhaseRotation) {
  auto layout = make_layout({12});
  const FockState s0 = product_state(layout, {coherent_amplitudes(1.2, 12)});
  const SparseOp n = number_operator(*layout, 0);
  const double omega = 1.7;
  const HamiltonianApply h = [&](double, const VectorXc& psi, VectorXc& out) { out = omega * (n * psi); };
  const std::vector<double> times{0.5, 2.0};
  const auto states = evolve_schrodinger(s0, h, times, {});
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int i = 0; i < 12; ++i) {
      const cplx expected = s0.amplitudes[i] * std::polar(1.0, -omega * i * times[k]);
      EXPECT_NEAR(std::abs(states[k].amplitudes[i] - expected), 0.0, 1e-9);
    }
}

TEST(Schrodinger, FixedStepIsReproducible) {
  auto layout = make_layout({6, 6});
  const SparseOp a = annihilation(*layout, 0), b = annihilation(*layout, 1);
  const SparseOp h = SparseOp(adjoint(a) * b) + SparseOp(adjoint(b) * a);
  const FockState s0 = product_state(layout, {coherent_amplitudes(0.7, 6), coherent_amplitudes(0.0, 6)});
  SchrodingerOptions opt;
  opt.ode.fixed_step = 1e-2;
  const std::vector<double> times{1.0};
  const auto first = evolve_schrodinger(s0, std::function<SparseOp(double)>([&](double) { return h; }), times, opt);
  const auto second = evolve_schrodinger(s0, std::function<SparseOp(double)>([&](double) { return h; }), times, opt);
  EXPECT_EQ(first[0].amplitudes, second[0].amplitudes);
}

TEST(ReducedStates, ProductStateIsPure) {
  auto layout = make_layout({8, 8});
  const FockState s = product_state(layout, {coherent_amplitudes(0.5, 8), coherent_amplitudes({0, 0.4}, 8)});
  const std::size_t keep[] = {1};
  const DensityMatrix rho = partial_trace(s, keep);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
  EXPECT_NEAR(purity(rho), 1.0, 1e-10);
  EXPECT_NEAR(von_neumann_entropy(rho), 0.0, 1e-8);
}

TEST(ReducedStates, BellPairEntropy) {
  auto layout = make_layout({2, 2});
  FockState s = vacuum_state(layout);
  s.amplitudes.setZero();
  s.amplitudes[0] = s.amplitudes[3] = 1.0 / std::sqrt(2.0);  // (|00> + |11>)/sqrt2
  const std::size_t side[] = {0};
  EXPECT_NEAR(entanglement_entropy(s, side), std::log(2.0), 1e-12);
  EXPECT_NEAR(purity(partial_trace(s, side)), 0.5, 1e-12);
}

TEST(Wigner, VacuumAndSinglePhoton) {
  auto layout = make_layout({4});
  const std::size_t keep[] = {0};
  const DensityMatrix vac = partial_trace(vacuum_state(layout), keep);
  EXPECT_NEAR(wigner_at(vac, 0.0, 0.0), 1.0 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(wigner_at(vac, 1.0, 0.5), std::exp(-1.25) / std::numbers::pi, 1e-12);

  FockState one = vacuum_state(layout);
  one.amplitudes.setZero();
  one.amplitudes[1] = 1.0;
  const DensityMatrix rho1 = partial_trace(one, keep);
  EXPECT_NEAR(wigner_at(rho1, 0.0, 0.0), -1.0 / std::numbers::pi, 1e-12);
  const WignerGrid g = wigner_single_mode(rho1, {});
  EXPECT_NEAR(g.riemann_sum(), 1.0, 1e-4);
  EXPECT_NEAR(g.min(), -1.0 / std::numbers::pi, 1e-12);
}

TEST(Wigner, NormalizationWarning) {
  auto layout = make_layout({2});
  const std::size_t keep[] = {0};
  const DensityMatrix vac = partial_trace(vacuum_state(layout), keep);
  std::string warning;
  wigner_single_mode(vac, {.x_min = -0.5, .x_max = 0.5, .p_min = -0.5, .p_max = 0.5, .nx = 11, .np = 11}, &warning);
  EXPECT_FALSE(warning.empty());
}
