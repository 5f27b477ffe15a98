#include "gifsim/single_mode.hpp"

#include <cmath>
#include <numbers>

namespace gifsim {

void SingleModeParams::validate() const {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0) throw std::invalid_argument("sample times must be >= 0");
    if (i > 0 && !(sample_times[i] > sample_times[i - 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  }
}

std::vector<SingleGifState> integrate_gif_single(const SingleModeParams& params, PumpModel model,
                                                 const OdeOptions& options) {
  params.validate();
  const double delta = params.delta;
  const cplx beta0 = params.beta0;
  const bool depleted = model == PumpModel::depleted;
  OdeRhs rhs = [=](double t, const VectorXc& y, VectorXc& dy) {
    const cplx beta = depleted ? y[0] : std::exp(-kI * delta * t) * beta0;
    const cplx c = y[1], s = y[2];
    dy.resize(3);
    dy[0] = depleted ? -kI * delta * y[0] - 0.5 * kI * c * s : cplx{};
    dy[1] = -kI * beta * std::conj(s);
    dy[2] = -kI * beta * std::conj(c);
  };
  VectorXc y0(3);
  y0 << beta0, 1.0, 0.0;
  OdeSolver solver(rhs, 0.0, y0, options);
  std::vector<SingleGifState> out;
  out.reserve(params.sample_times.size());
  for (double t : params.sample_times) {
    solver.advance_to(t);
    const auto& y = solver.state();
    const cplx beta = depleted ? y[0] : std::exp(-kI * delta * t) * beta0;
    out.push_back({t, beta, y[1], y[2]});
  }
  return out;
}

LayoutPtr single_mode_layout(int signal_cutoff, int pump_cutoff) {
  return make_layout({signal_cutoff, pump_cutoff});
}

SparseOp single_mode_lab_hamiltonian(const ModeLayout& layout, double delta) {
  const SparseOp a = annihilation(layout, 0);
  const SparseOp b = annihilation(layout, 1);
  const SparseOp bd = adjoint(b);
  const SparseOp coupling = SparseOp(bd * a) * a;
  SparseOp h = 0.5 * (coupling + adjoint(coupling)) + delta * SparseOp(bd * b);
  h.makeCompressed();
  return h;
}

std::vector<FockState> evolve_lab_full(const SingleModeParams& params, int signal_cutoff,
                                       int pump_cutoff, const SchrodingerOptions& options,
                                       SchrodingerDiagnostics* diagnostics) {
  params.validate();
  auto layout = single_mode_layout(signal_cutoff, pump_cutoff);
  VectorXc signal = VectorXc::Zero(signal_cutoff);
  signal[0] = 1.0;
  const FockState psi0 =
      product_state(layout, {signal, coherent_amplitudes(params.beta0, pump_cutoff)});
  const SparseOp h = single_mode_lab_hamiltonian(*layout, params.delta);
  HamiltonianApply apply = [&h](double, const VectorXc& psi, VectorXc& out) { out.noalias() = h * psi; };
  return evolve_schrodinger(psi0, apply, params.sample_times, options, diagnostics);
}

namespace {

struct GifTerms {
  OperatorSum sum;  // b†a†², b†a†a, b†a²
};

GifTerms gif_terms(const ModeLayout& layout) {
  const SparseOp a = annihilation(layout, 0);
  const SparseOp ad = adjoint(a);
  const SparseOp bd = adjoint(annihilation(layout, 1));
  GifTerms t;
  t.sum.add(SparseOp(bd * ad) * ad);
  t.sum.add(SparseOp(bd * ad) * a);
  t.sum.add(SparseOp(bd * a) * a);
  return t;
}

std::array<cplx, 3> gif_coefficients(double t, double delta, cplx c, cplx s) {
  const cplx ph = std::exp(kI * delta * t);
  return {0.5 * ph * s * s, ph * c * s, 0.5 * ph * c * c};
}

}  // namespace

SparseOp build_h_gif_single(const SingleGifState& gif, double delta, const ModeLayout& layout) {
  const auto terms = gif_terms(layout);
  const auto coeffs = gif_coefficients(gif.time, delta, gif.c, gif.s);
  return terms.sum.assemble(coeffs);
}

std::vector<GifFrameSample> evolve_gif_frame_single(const SingleModeParams& params, int signal_cutoff,
                                                    int pump_cutoff, const SchrodingerOptions& options,
                                                    SchrodingerDiagnostics* diagnostics) {
  params.validate();
  auto layout = single_mode_layout(signal_cutoff, pump_cutoff);
  const auto terms = gif_terms(*layout);
  const auto dim = static_cast<Eigen::Index>(layout->dimension());
  const double delta = params.delta;

  // y = [β, C, S, ψ...]
  VectorXc y0 = VectorXc::Zero(3 + dim);
  y0[0] = params.beta0;
  y0[1] = 1.0;
  y0[3] = 1.0;
  VectorXc hpsi(dim), psi(dim);
  OdeRhs rhs = [&](double t, const VectorXc& y, VectorXc& dy) {
    const cplx beta = y[0], c = y[1], s = y[2];
    dy.resize(y.size());
    dy[0] = -kI * delta * beta - 0.5 * kI * c * s;
    dy[1] = -kI * beta * std::conj(s);
    dy[2] = -kI * beta * std::conj(c);
    const auto coeffs = gif_coefficients(t, delta, c, s);
    psi = y.tail(dim);
    terms.sum.apply(coeffs, psi, hpsi);
    dy.tail(dim) = -kI * hpsi;
  };
  OdeSolver solver(rhs, 0.0, y0, options.ode);
  SchrodingerDiagnostics diag;
  std::vector<GifFrameSample> out;
  for (double t : params.sample_times) {
    solver.advance_to(t);
    const auto& y = solver.state();
    GifFrameSample smp{{t, y[0], y[1], y[2]}, {layout, y.tail(dim), t}};
    const double drift = std::abs(smp.state.norm() - 1.0);
    diag.max_norm_drift = std::max(diag.max_norm_drift, drift);
    if (drift > 10.0 * options.norm_tol)
      throw NumericalError("norm-preservation",
                           "interaction-frame norm drift " + std::to_string(drift));
    diag.max_leakage = std::max(diag.max_leakage, fock_leakage(smp.state).max());
    out.push_back(std::move(smp));
  }
  diag.stats = solver.stats();
  if (diagnostics) *diagnostics = diag;
  return out;
}

namespace {

struct FrameMoments {
  double n_a = 0.0;
  cplx kappa_a;  // <a a>
  cplx mean_a;
  double n_b = 0.0;
  cplx mean_b;
};

FrameMoments frame_moments(const FockState& state) {
  const ModeLayout& layout = *state.layout;
  if (layout.mode_count() != 2) throw std::invalid_argument("single-mode moments need a two-mode layout");
  const SparseOp a = annihilation(layout, 0);
  const SparseOp b = annihilation(layout, 1);
  const VectorXc& psi = state.amplitudes;
  const VectorXc apsi = a * psi;
  const VectorXc bpsi = b * psi;
  FrameMoments m;
  m.n_a = apsi.squaredNorm();
  m.mean_a = psi.dot(apsi);
  m.kappa_a = psi.dot(a * apsi);
  m.n_b = bpsi.squaredNorm();
  m.mean_b = psi.dot(bpsi);
  return m;
}

LabMoments substitute(const FrameMoments& m, cplx c, cplx s, cplx pump_phase, cplx beta) {
  LabMoments out;
  const double n = m.n_a;
  out.signal_amplitude = c * m.mean_a + s * std::conj(m.mean_a);
  out.signal_number = std::norm(c) * n + 2.0 * (std::conj(c) * s * std::conj(m.kappa_a)).real() +
                      std::norm(s) * (n + 1.0);
  const cplx u = c + std::conj(s);
  const cplx v = c - std::conj(s);
  const double x2 = 0.5 * (2.0 * (u * u * m.kappa_a).real() + std::norm(u) * (1.0 + 2.0 * n));
  const double p2 = 0.5 * (std::norm(v) * (1.0 + 2.0 * n) - 2.0 * (v * v * m.kappa_a).real());
  const double xm = std::numbers::sqrt2 * (u * m.mean_a).real();
  const double pm = std::numbers::sqrt2 * (v * m.mean_a).imag();
  out.signal_x_var = x2 - xm * xm;
  out.signal_p_var = p2 - pm * pm;
  out.pump_amplitude = pump_phase * m.mean_b + beta;
  out.pump_number = m.n_b + 2.0 * (std::conj(beta) * pump_phase * m.mean_b).real() + std::norm(beta);
  return out;
}

}  // namespace

LabMoments reconstruct_lab_moments(const SingleGifState& gif, double delta, const FockState& state_i) {
  return substitute(frame_moments(state_i), gif.c, gif.s, std::exp(-kI * delta * gif.time), gif.beta);
}

LabMoments lab_moments(const FockState& lab_state) {
  return substitute(frame_moments(lab_state), 1.0, 0.0, 1.0, 0.0);
}

LabMoments gaussian_lab_moments(const SingleGifState& gif) {
  return substitute(FrameMoments{}, gif.c, gif.s, 1.0, gif.beta);
}

double manley_rowe_single(const SingleGifState& gif) {
  return std::norm(gif.s) + 2.0 * std::norm(gif.beta);
}

double asymptotic_R_single(double t) {
  if (t < 0.0) throw std::invalid_argument("asymptotic_R_single: t must be >= 0");
  return 0.5 * t * t;
}

double depletion_ratio(double n_sh_t, double n_sh_0) {
  if (!(n_sh_0 > 0.0)) throw std::invalid_argument("depletion_ratio: initial pump photon number must be > 0");
  return 1.0 - n_sh_t / n_sh_0;
}

}  // namespace gifsim
