#pragma once

#include <span>
#include <vector>

#include "gifsim/single_mode.hpp"

namespace gifsim {

/// Uniform wavenumber grid with its sum-frequency closure.
///
/// Signal points s_j = (j - (M-1)/2) ds, j = 0..M-1; pump points
/// s_k = (k - (M-1)) ds, k = 0..2M-2, so pump index k = j + l couples signal
/// pairs (j, l). Dispersion: γ_s = (2πs)²/2 (signal), δ_s = d0 + d1(2πs) +
/// d2(2πs)²/2 (pump). Modes are rescaled to unit commutators, a_j = √ds φ_{s_j},
/// which leaves a cubic coupling of √ds.
struct WavegridConfig {
  int m = 64;
  double ds = 8.0 / 63.0;
  double d0 = 0.0, d1 = 0.0, d2 = 0.3;

  static WavegridConfig from_range(int m, double s_min, double s_max, double d0, double d1, double d2);

  void validate() const;
  int pump_size() const { return 2 * m - 1; }
  double signal_s(int j) const { return (j - 0.5 * (m - 1)) * ds; }
  double pump_s(int k) const { return (k - (m - 1)) * ds; }
  double gamma(int j) const;
  double delta(int k) const;
  double coupling() const;
};

struct PumpProfile {
  VectorXc amplitudes;  // rescaled β̄_k over the pump grid, units √photons
  double photon_number() const { return amplitudes.squaredNorm(); }
};

/// β_s(0) = N^{1/2} π^{1/4} e^{-(πs)²/2}, sampled on the pump grid and scaled so
/// that sum_k |β̄_k|² = n_sh0 exactly. Throws if the pump grid truncates more
/// than `width_tolerance` of the continuum norm.
PumpProfile make_gaussian_pump(const WavegridConfig& config, double n_sh0,
                               double width_tolerance = 1e-6);

/// Gaussian frame at one time, lab-phase variables: U† ψ_k U = e^{-iδ_k t} ψ_k + β_k,
/// U† a_j U = sum_p C_jp a_p + S_jp a_p†.
struct MultimodeGifState {
  double time = 0.0;
  VectorXc beta;
  MatrixXc c;
  MatrixXc s;
};

MultimodeGifState initial_gif_state(const WavegridConfig& config, const PumpProfile& pump);

/// Right-hand side of the multimode Green's-function / pump equations, written
/// in rotating variables β̄ e^{iδt}, C̄ = e^{iγt}C, S̄ = e^{iγt}S so that only
/// bounded phase factors, evaluated at solver time, remain. Packs into a flat
/// vector [β̄ (2M-1), C̄ (M², column-major), S̄ (M²)].
class MultimodeGifSystem {
 public:
  MultimodeGifSystem(const WavegridConfig& config, PumpModel model);

  Eigen::Index packed_size() const { return packed_size_; }
  VectorXc pack(const MultimodeGifState& state) const;
  MultimodeGifState unpack(double t, const VectorXc& y) const;
  /// dy for the leading packed_size() entries of y.
  void rhs(double t, const VectorXc& y, VectorXc& dy) const;

  const WavegridConfig& config() const { return config_; }

 private:
  WavegridConfig config_;
  PumpModel model_;
  Eigen::Index packed_size_;
  Eigen::VectorXd gamma_, delta_;
  Eigen::MatrixXd mismatch_;  // γ_j + γ_l - δ_{j+l}
  mutable MatrixXc phase_, hankel_, work_;
};

struct GifOptions {
  OdeOptions ode{.rtol = 1e-10, .atol = 1e-10};
  /// Relative Bogoliubov-constraint tolerance; drift beyond 10x aborts.
  double constraint_tol = 1e-7;
};

struct ConstraintDrift {
  double bogoliubov = 0.0;  // ||C C† - S S† - I||_max
  double symmetry = 0.0;    // ||C Sᵀ - (C Sᵀ)ᵀ||_max
  double max() const { return std::max(bogoliubov, symmetry); }
};
ConstraintDrift constraint_drift(const MultimodeGifState& state);

struct GifDiagnostics {
  ConstraintDrift max_drift;
  OdeStats stats;
};

std::vector<MultimodeGifState> integrate_gif_multimode(const WavegridConfig& config,
                                                       const PumpProfile& pump, PumpModel model,
                                                       std::span<const double> sample_times,
                                                       const GifOptions& options = {},
                                                       GifDiagnostics* diagnostics = nullptr);

/// Throws NumericalError("symplectic-constraint") if drift exceeds
/// 10 * tol * max(1, ||C||²_max).
void check_constraints(const MultimodeGifState& state, double tol, ConstraintDrift* drift = nullptr);

/// Pump photons sum_k |β̄_k|² of the Gaussian frame (vacuum |φ_I>).
double pump_photon_number(const MultimodeGifState& state);
/// Signal photons Tr(S S†) of the Gaussian frame.
double signal_photon_number(const MultimodeGifState& state);
/// N_FH + 2 N_SH for vacuum |φ_I>.
double manley_rowe(const MultimodeGifState& state);
/// Gaussian signal spectral density (S S†)_jj / ds.
Eigen::VectorXd gaussian_spectral_density(const MultimodeGifState& state, const WavegridConfig& config);

/// Small-time multimode depletion, 2 t^{3/2} / (3 √(2π)).
double asymptotic_R_multimode(double t);

}  // namespace gifsim
