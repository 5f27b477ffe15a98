#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "gifsim/ode.hpp"

namespace gifsim {

using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Truncated multi-mode number basis.
///
/// Every mode k keeps occupations 0..cutoffs[k]-1. An optional excitation
/// budget further restricts the basis to sum_k weights[k]*n_k <= max_total;
/// with weights (1 for signal, 2 for pump) this is a Manley–Rowe shell cap,
/// exact for number-conserving Hamiltonians. Mode 0 is the most significant
/// index, so for two full modes a_0 = a (x) I.
class ModeLayout {
 public:
  static constexpr std::size_t kDefaultDimensionCap = 2'000'000;

  explicit ModeLayout(std::vector<int> cutoffs, std::size_t dimension_cap = kDefaultDimensionCap);
  ModeLayout(std::vector<int> cutoffs, std::vector<int> weights, int max_total,
             std::size_t dimension_cap = kDefaultDimensionCap);

  std::size_t mode_count() const { return cutoffs_.size(); }
  std::span<const int> cutoffs() const { return cutoffs_; }
  std::size_t dimension() const { return dimension_; }
  bool has_budget() const { return budget_.has_value(); }
  std::span<const int> weights() const { return weights_; }
  std::optional<int> max_total() const { return budget_; }

  /// Occupation of mode k in basis state i.
  int occupation(std::size_t i, std::size_t k) const {
    return occupations_[i * cutoffs_.size() + k];
  }
  std::span<const std::int16_t> occupations(std::size_t i) const {
    return {occupations_.data() + i * cutoffs_.size(), cutoffs_.size()};
  }
  /// Index of a basis state, or nullopt when outside the truncation.
  std::optional<std::size_t> index_of(std::span<const int> occ) const;

  bool operator==(const ModeLayout& other) const {
    return cutoffs_ == other.cutoffs_ && weights_ == other.weights_ && budget_ == other.budget_;
  }

 private:
  void enumerate(std::size_t dimension_cap);

  std::vector<int> cutoffs_;
  std::vector<int> weights_;
  std::optional<int> budget_;
  std::vector<std::uint64_t> strides_;
  std::vector<std::uint64_t> keys_;  // sorted mixed-radix keys (budget layouts only)
  std::vector<std::int16_t> occupations_;
  std::size_t dimension_ = 0;
};

using LayoutPtr = std::shared_ptr<const ModeLayout>;

inline LayoutPtr make_layout(std::vector<int> cutoffs) {
  return std::make_shared<const ModeLayout>(std::move(cutoffs));
}

struct FockState {
  LayoutPtr layout;
  VectorXc amplitudes;
  double time = 0.0;

  double norm() const { return amplitudes.norm(); }
};

enum class OperatorKind { annihilation, creation, number, composite };

struct ModeOperator {
  SparseOp matrix;
  OperatorKind kind = OperatorKind::composite;
  std::string label;
};

/// Annihilation operators for every mode, as matrices on the truncated space.
std::vector<ModeOperator> build_mode_operators(const ModeLayout& layout);
SparseOp annihilation(const ModeLayout& layout, std::size_t mode);
SparseOp number_operator(const ModeLayout& layout, std::size_t mode);
SparseOp adjoint(const SparseOp& op);
/// Dense copy, for small spaces and tests.
MatrixXc to_dense(const SparseOp& op);

/// Hermitian operator of the form sum_i (c_i O_i + conj(c_i) O_i^dagger) with
/// fixed operators and coefficients supplied per application.
class OperatorSum {
 public:
  std::size_t add(SparseOp op);
  std::size_t size() const { return ops_.size(); }
  std::size_t dimension() const { return ops_.empty() ? 0 : ops_.front().rows(); }
  /// out = sum_i c_i T_i psi + conj(c_i) T_i† psi.
  void apply(std::span<const cplx> coefficients, const VectorXc& psi, VectorXc& out) const;
  SparseOp assemble(std::span<const cplx> coefficients) const;
  /// Merges all terms into one sparsity pattern for apply(). Terms with complex
  /// matrix elements keep the per-term path. No add() after this.
  void freeze();

 private:
  std::vector<SparseOp> ops_;
  std::vector<SparseOp> adjoints_;
  // Merged rows: entry k multiplies psi[col_[k]] by base_[k] * coef(term_[k]),
  // where even terms are c_i and odd ones conj(c_i).
  bool frozen_ = false;
  std::vector<Eigen::Index> row_start_;
  std::vector<std::int32_t> col_, term_;
  std::vector<double> base_;
  mutable std::vector<cplx> coef_;
};

FockState vacuum_state(LayoutPtr layout, double time = 0.0);

/// Product state from per-mode amplitude vectors (index n -> amplitude of |n>).
/// Components outside the truncation are dropped; the result is renormalized
/// and `truncation_loss` (if given) receives 1 - retained norm^2.
FockState product_state(LayoutPtr layout, const std::vector<VectorXc>& mode_amplitudes,
                        double* truncation_loss = nullptr);

/// Fock amplitudes of a coherent state |alpha>, truncated to `cutoff` levels
/// (not renormalized).
VectorXc coherent_amplitudes(cplx alpha, int cutoff);

cplx expectation(const SparseOp& op, const FockState& state);

struct LeakageReport {
  double top_level = 0.0;   // max over modes of population in the top Fock level
  double budget_shell = 0.0;  // population on the excitation-budget boundary
  double max() const { return std::max(top_level, budget_shell); }
};
LeakageReport fock_leakage(const FockState& state);

// ---------------------------------------------------------------------------
// Schrödinger evolution

/// Matrix-free Hamiltonian: out = H(t) psi.
using HamiltonianApply = std::function<void(double t, const VectorXc& psi, VectorXc& out)>;

struct SchrodingerOptions {
  OdeOptions ode{.rtol = 1e-10, .atol = 1e-12};
  /// Maximum permitted |norm - 1|; drift beyond 10x this aborts.
  double norm_tol = 1e-7;
};

struct SchrodingerDiagnostics {
  double max_norm_drift = 0.0;
  double max_leakage = 0.0;
  OdeStats stats;
};

/// Solves i d/dt |psi> = H(t)|psi> and returns the state at each sample time
/// (sample times must be non-decreasing and >= state.time).
std::vector<FockState> evolve_schrodinger(const FockState& state, const HamiltonianApply& hamiltonian,
                                          std::span<const double> sample_times,
                                          const SchrodingerOptions& options,
                                          SchrodingerDiagnostics* diagnostics = nullptr);

/// Convenience overload for a Hamiltonian given as a matrix-valued function.
std::vector<FockState> evolve_schrodinger(const FockState& state,
                                          const std::function<SparseOp(double)>& hamiltonian,
                                          std::span<const double> sample_times,
                                          const SchrodingerOptions& options,
                                          SchrodingerDiagnostics* diagnostics = nullptr);

// ---------------------------------------------------------------------------
// Reduced states

struct DensityMatrix {
  MatrixXc rho;
  std::vector<int> cutoffs;  // of the kept modes, in kept order

  double trace() const { return rho.trace().real(); }
};

/// Reduced density matrix on `keep` (mode indices, in the order given). The
/// kept space is the full tensor product of the kept cutoffs.
DensityMatrix partial_trace(const FockState& state, std::span<const std::size_t> keep);

double purity(const DensityMatrix& rho);
/// Von Neumann entropy in nats.
double von_neumann_entropy(const DensityMatrix& rho);
/// Entropy of the reduced state of `side` for a pure state.
double entanglement_entropy(const FockState& state, std::span<const std::size_t> side);

// ---------------------------------------------------------------------------
// Phase-space portraits

struct WignerSpec {
  double x_min = -5.0, x_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  int nx = 101, np = 101;
};

enum class Frame { lab, gif };

/// Wigner function on a rectangular grid, X = (c + c^dagger)/sqrt 2, vacuum
/// variance 1/2. values(ix, ip).
struct WignerGrid {
  std::vector<double> x, p;
  Eigen::MatrixXd values;
  Frame frame = Frame::gif;

  double riemann_sum() const;
  double min() const { return values.minCoeff(); }
};

/// Computes W for a single-mode density matrix. If the Riemann sum misses unit
/// normalization by more than 1e-3, `normalization_warning` receives the deficit.
WignerGrid wigner_single_mode(const DensityMatrix& rho, const WignerSpec& spec,
                              std::string* normalization_warning = nullptr);
/// Pointwise W(x, p).
double wigner_at(const DensityMatrix& rho, double x, double p);

}  // namespace gifsim
