#pragma once

#include <span>
#include <vector>

#include "gifsim/observables.hpp"

namespace gifsim {

/// Brute-force lab-frame model on a tiny wavegrid: every signal and pump grid
/// point is its own Fock mode. Mode order [a_0 .. a_{M-1}, b_0 .. b_{2M-2}].
///
/// The basis is capped by the generalized particle number
/// sum n_a + 2 sum n_b <= max_excitation, which the Hamiltonian conserves, so
/// each retained sector is represented exactly.
struct OracleOptions {
  int max_excitation = 20;
  std::size_t dimension_cap = ModeLayout::kDefaultDimensionCap;
  SchrodingerOptions schrodinger{.ode = {.rtol = 1e-10, .atol = 1e-12}};
};

struct TinyGridSystem {
  WavegridConfig config;
  LayoutPtr layout;
  SparseOp hamiltonian;

  int signal_modes() const { return config.m; }
  int pump_modes() const { return config.pump_size(); }
};

inline constexpr int kMaxTinySignalPoints = 3;

TinyGridSystem build_tiny_hamiltonian(const WavegridConfig& config, const OracleOptions& options = {});

/// sum n_a + 2 sum n_b on the system's layout.
SparseOp generalized_number_operator(const TinyGridSystem& system);

/// Signal vacuum times coherent pump; components outside the budget are
/// dropped and the state renormalized (`truncation_loss` receives 1 - kept).
FockState oracle_initial_state(const TinyGridSystem& system, const PumpProfile& pump,
                               double* truncation_loss = nullptr);

struct OracleSample {
  FockState state;
  double pump_number = 0.0;
  double signal_number = 0.0;
  double generalized_number = 0.0;
  Eigen::VectorXd spectral_density;  // <a_j† a_j> / ds
  double leakage = 0.0;              // population on the budget boundary
};

struct OracleDiagnostics {
  double truncation_loss = 0.0;
  SchrodingerDiagnostics schrodinger;
};

std::vector<OracleSample> oracle_evolve(const TinyGridSystem& system, const PumpProfile& pump,
                                        std::span<const double> sample_times,
                                        const OracleOptions& options = {},
                                        OracleDiagnostics* diagnostics = nullptr);

/// Variances of X, P of the lab-frame mode f = sum_j w_j a_j (w normalized).
QuadratureVariances waveform_quadratures(const TinyGridSystem& system, const FockState& state,
                                         const VectorXc& waveform);

}  // namespace gifsim
