#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gifsim/multimode.hpp"

namespace gifsim {

/// Time-dependent supermode basis of a Gaussian frame.
///
/// S = W† diag(sinh λ) V*, C = W† diag(cosh λ) V with rows of W, V the
/// waveforms. Signal supermodes are the leading rows of V; pump supermodes are
/// orthonormalized pair products of the leading rows of W.
struct SupermodeBasis {
  double time = 0.0;
  Eigen::VectorXd lambdas;  // all M values; descending except where tracking reorders
  MatrixXc w, v;            // M x M, rows are waveforms
  MatrixXc signal;          // M_FH x M   (A)
  MatrixXc pump;            // M_SH x (2M-1)   (B)
  std::vector<std::pair<int, int>> pump_pairs;  // signal pair behind each pump row
  std::vector<std::string> warnings;

  int m_fh() const { return int(signal.rows()); }
  int m_sh() const { return int(pump.rows()); }
};

struct DecomposeOptions {
  int m_fh = 2;
  /// 0 selects 2*m_fh - 1.
  int m_sh = 0;
  double degeneracy_gap = 1e-6;
  double rank_tol = 1e-8;
};

/// SVD of S with gauge fixing (C fixes each vector pair up to a sign; the sign
/// and pump phases follow `previous`). With `previous`, the tracked signal
/// supermodes are matched by overlap rather than singular-value rank, and a
/// warning is recorded when one falls outside the leading m_fh. When all singular values vanish the
/// decomposition is taken from the seed -i*P, P_jl = β_{j+l}, built from
/// the state's pump amplitudes.
SupermodeBasis decompose_supermodes(const MultimodeGifState& state, const WavegridConfig& config,
                                    const DecomposeOptions& options,
                                    const SupermodeBasis* previous = nullptr);

/// Basis built from the t -> 0 limit of the Green's functions for `pump`.
SupermodeBasis seed_supermodes(const WavegridConfig& config, const PumpProfile& pump,
                               const DecomposeOptions& options);

/// Coefficients of the projected residual Hamiltonian,
///   (1/2) sum b_l† (μ a_m† a_n† + 2ν a_m† a_n + ξ a_m a_n) + H.c.
///   + sum I^A_mn a_m† a_n + sum I^B_mn b_m† b_n.
/// mu[l], nu[l], xi[l] are M_FH x M_FH.
struct GifTensors {
  double time = 0.0;
  std::vector<MatrixXc> mu, nu, xi;
  MatrixXc inertial_signal;  // M_FH x M_FH
  MatrixXc inertial_pump;    // M_SH x M_SH
};

/// Cubic-coupling tensors for the given frame and (frozen) supermode waveforms.
void cubic_tensors(const MultimodeGifState& state, const WavegridConfig& config, const MatrixXc& signal,
                   const MatrixXc& pump, GifTensors& out);

/// Generator G of the in-subspace rotation between two consecutive waveform
/// sets, rows(t) ≈ exp((t - t0) G) rows(t0); the inertial matrix is i G.
/// Throws NumericalError("gauge-alignment") if some waveform keeps less than
/// `min_overlap` of its norm inside the previous span.
MatrixXc rotation_generator(const MatrixXc& from, const MatrixXc& to, double dt, double min_overlap = 0.9);

/// Tensors plus inertial terms estimated from `previous` (finite difference
/// over dt_basis). With previous == nullptr or dt_basis == 0 inertia is zero.
GifTensors build_gif_tensors(const MultimodeGifState& state, const WavegridConfig& config,
                             const SupermodeBasis& basis, const SupermodeBasis* previous, double dt_basis);

/// Fock-space operator set for M_FH signal + M_SH pump modes. Mode order:
/// [a_0 .. a_{M_FH-1}, b_0 .. b_{M_SH-1}].
class SupermodeHamiltonian {
 public:
  SupermodeHamiltonian(LayoutPtr layout, int m_fh, int m_sh);

  const LayoutPtr& layout() const { return layout_; }
  int m_fh() const { return m_fh_; }
  int m_sh() const { return m_sh_; }
  /// Flattened coefficient list for OperatorSum::apply.
  void coefficients(const GifTensors& tensors, std::vector<cplx>& out) const;
  void apply(std::span<const cplx> coefficients, const VectorXc& psi, VectorXc& out) const {
    terms_.apply(coefficients, psi, out);
  }
  SparseOp assemble(const GifTensors& tensors) const;

 private:
  LayoutPtr layout_;
  int m_fh_, m_sh_;
  OperatorSum terms_;
};

struct NongaussianOptions {
  DecomposeOptions decompose;
  std::vector<int> signal_cutoffs;  // one per signal supermode (default 12)
  std::vector<int> pump_cutoffs;    // one per pump supermode (default 6)
  /// Optional budget on sum n_a + 2 sum n_b.
  std::optional<int> max_excitation;
  double basis_cadence = 1e-3;
  double min_overlap = 0.9;
  double leakage_threshold = 1e-4;
  GifOptions gif;
  SchrodingerOptions fock;
};

struct NongaussianSample {
  MultimodeGifState gif;
  SupermodeBasis basis;
  FockState state;  // |φ_S> over [a_0.., b_0..]
};

inline constexpr std::size_t kMaxRecordedWarnings = 32;

struct NongaussianDiagnostics {
  double max_leakage = 0.0;
  bool leakage_flagged = false;
  double max_norm_drift = 0.0;
  double min_basis_overlap = 1.0;
  ConstraintDrift max_drift;
  std::vector<std::string> warnings;  // first kMaxRecordedWarnings only
  long suppressed_warnings = 0;
  long refreshes = 0;
  OdeStats stats;
};

/// Co-integrates the depleted Gaussian frame and the projected non-Gaussian
/// state. The supermode basis is refreshed every basis_cadence (and at every
/// sample time); between refreshes the waveforms rotate inside the subspace
/// at the constant rate that carries one refreshed basis onto the next, which
/// also fixes the inertial terms.
std::vector<NongaussianSample> evolve_nongaussian(const WavegridConfig& config, const PumpProfile& pump,
                                                  std::span<const double> sample_times,
                                                  const NongaussianOptions& options = {},
                                                  NongaussianDiagnostics* diagnostics = nullptr);

// ---------------------------------------------------------------------------
// Lab-frame reconstruction of a projected state

/// Pump photons: sum |β|² + sum <b_l† b_l> + 2 Re sum_l conj(sum_k β_k e^{iδ_k t} B_lk) <b_l>.
double pump_photon_number(const NongaussianSample& sample, const WavegridConfig& config);
/// Signal photons, Gaussian part plus corrections.
double signal_photon_number(const NongaussianSample& sample, const WavegridConfig& config);
double manley_rowe(const NongaussianSample& sample, const WavegridConfig& config);
/// <φ_s† φ_s> over the signal grid (per unit s).
Eigen::VectorXd signal_spectral_density(const NongaussianSample& sample, const WavegridConfig& config);

/// Embeds the vacuum interaction-frame result into the same sample type.
NongaussianSample gaussian_sample(const MultimodeGifState& gif, const SupermodeBasis& basis);

}  // namespace gifsim
