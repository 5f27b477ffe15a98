#pragma once

#include <vector>

#include "gifsim/fock.hpp"

namespace gifsim {

/// Single-mode χ(2) problem: signal a, pump b, H = (a^2 b† + a†^2 b)/2 + δ b†b.
struct SingleModeParams {
  double delta = -0.5;
  cplx beta0 = 1.0;
  std::vector<double> sample_times;  // strictly increasing, >= 0

  void validate() const;
};

/// Gaussian-frame parameters: pump displacement β and signal Green's functions
/// C, S with U† a U = C a + S a†.
struct SingleGifState {
  double time = 0.0;
  cplx beta;
  cplx c{1.0, 0.0};
  cplx s{0.0, 0.0};
};

enum class PumpModel { undepleted, depleted };

/// Integrates dC/dt = -iβS*, dS/dt = -iβC*, with β either co-integrated
/// (depleted: dβ/dt = -iδβ - (i/2)CS) or pinned to e^{-iδt}β(0). Both modes
/// go through the same ODE path.
std::vector<SingleGifState> integrate_gif_single(const SingleModeParams& params, PumpModel model,
                                                 const OdeOptions& options = {});

/// Two-mode layout used throughout: mode 0 = signal, mode 1 = pump.
LayoutPtr single_mode_layout(int signal_cutoff, int pump_cutoff);

SparseOp single_mode_lab_hamiltonian(const ModeLayout& layout, double delta);

/// Direct lab-frame evolution from vacuum (x) coherent(β(0)).
std::vector<FockState> evolve_lab_full(const SingleModeParams& params, int signal_cutoff,
                                       int pump_cutoff, const SchrodingerOptions& options = {},
                                       SchrodingerDiagnostics* diagnostics = nullptr);

/// Normally ordered residual Hamiltonian of the Gaussian interaction frame at
/// the time carried by `gif`:
///   H = (e^{iδt}/2) b† (S² a†² + 2CS a†a + C² a²) + H.c.
SparseOp build_h_gif_single(const SingleGifState& gif, double delta, const ModeLayout& layout);

struct GifFrameSample {
  SingleGifState gif;
  FockState state;  // interaction-frame state |φ_I(t)>
};

/// Co-integrates the depleted Gaussian frame and |φ_I> (starting in vacuum)
/// under build_h_gif_single.
std::vector<GifFrameSample> evolve_gif_frame_single(const SingleModeParams& params, int signal_cutoff,
                                                    int pump_cutoff,
                                                    const SchrodingerOptions& options = {},
                                                    SchrodingerDiagnostics* diagnostics = nullptr);

struct LabMoments {
  double signal_number = 0.0;  // <a†a>
  double pump_number = 0.0;    // <b†b>
  cplx signal_amplitude;       // <a>
  cplx pump_amplitude;         // <b>
  double signal_x_var = 0.5;   // Var X, X = (a + a†)/√2
  double signal_p_var = 0.5;   // Var P, P = (a - a†)/(√2 i)
};

/// Lab-frame moments of U(t)|φ_I> via operator substitution.
LabMoments reconstruct_lab_moments(const SingleGifState& gif, double delta, const FockState& state_i);

/// Moments evaluated directly on a lab-frame state.
LabMoments lab_moments(const FockState& lab_state);

/// Gaussian-frame moments alone (|φ_I> = vacuum).
LabMoments gaussian_lab_moments(const SingleGifState& gif);

/// Generalized particle number |S|² + 2|β|² for a vacuum interaction-frame state.
double manley_rowe_single(const SingleGifState& gif);

/// Small-time depletion of the single-mode Gaussian model, t²/2.
double asymptotic_R_single(double t);

/// R = 1 - N_SH(t)/N_SH(0).
double depletion_ratio(double n_sh_t, double n_sh_0);

}  // namespace gifsim
