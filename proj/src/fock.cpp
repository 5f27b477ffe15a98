#include "gifsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace gifsim {

// ---------------------------------------------------------------------------
// ModeLayout

namespace {

std::vector<std::uint64_t> mixed_radix_strides(const std::vector<int>& cutoffs) {
  std::vector<std::uint64_t> strides(cutoffs.size());
  std::uint64_t s = 1;
  for (std::size_t k = cutoffs.size(); k-- > 0;) {
    strides[k] = s;
    const auto c = static_cast<std::uint64_t>(cutoffs[k]);
    if (s > std::numeric_limits<std::uint64_t>::max() / c)
      throw std::invalid_argument("ModeLayout: cutoff product overflows 64-bit index space");
    s *= c;
  }
  return strides;
}

void validate_cutoffs(const std::vector<int>& cutoffs) {
  if (cutoffs.empty()) throw std::invalid_argument("ModeLayout: at least one mode required");
  for (int c : cutoffs) {
    if (c < 1) throw std::invalid_argument("ModeLayout: cutoffs must be >= 1");
    if (c > std::numeric_limits<std::int16_t>::max())
      throw std::invalid_argument("ModeLayout: cutoff too large");
  }
}

}  // namespace

ModeLayout::ModeLayout(std::vector<int> cutoffs, std::size_t dimension_cap)
    : cutoffs_(std::move(cutoffs)) {
  validate_cutoffs(cutoffs_);
  weights_.assign(cutoffs_.size(), 1);
  strides_ = mixed_radix_strides(cutoffs_);
  enumerate(dimension_cap);
}

ModeLayout::ModeLayout(std::vector<int> cutoffs, std::vector<int> weights, int max_total,
                       std::size_t dimension_cap)
    : cutoffs_(std::move(cutoffs)), weights_(std::move(weights)), budget_(max_total) {
  validate_cutoffs(cutoffs_);
  if (weights_.size() != cutoffs_.size())
    throw std::invalid_argument("ModeLayout: weights and cutoffs differ in length");
  for (int w : weights_)
    if (w < 1) throw std::invalid_argument("ModeLayout: weights must be >= 1");
  if (max_total < 0) throw std::invalid_argument("ModeLayout: excitation budget must be >= 0");
  strides_ = mixed_radix_strides(cutoffs_);
  enumerate(dimension_cap);
}

void ModeLayout::enumerate(std::size_t dimension_cap) {
  const std::size_t n_modes = cutoffs_.size();
  if (!budget_) {
    std::uint64_t total = strides_[0] * static_cast<std::uint64_t>(cutoffs_[0]);
    if (total > dimension_cap) {
      std::ostringstream os;
      os << "ModeLayout: dimension " << total << " exceeds cap " << dimension_cap;
      throw std::length_error(os.str());
    }
    dimension_ = static_cast<std::size_t>(total);
    occupations_.resize(dimension_ * n_modes);
    for (std::size_t i = 0; i < dimension_; ++i)
      for (std::size_t k = 0; k < n_modes; ++k)
        occupations_[i * n_modes + k] =
            static_cast<std::int16_t>((i / strides_[k]) % static_cast<std::uint64_t>(cutoffs_[k]));
    return;
  }

  std::vector<int> occ(n_modes, 0);
  const int cap = *budget_;
  // Depth-first lexicographic enumeration keeps keys sorted.
  auto recurse = [&](auto&& self, std::size_t k, int used) -> void {
    if (k == n_modes) {
      if (keys_.size() >= dimension_cap) {
        std::ostringstream os;
        os << "ModeLayout: dimension exceeds cap " << dimension_cap;
        throw std::length_error(os.str());
      }
      std::uint64_t key = 0;
      for (std::size_t j = 0; j < n_modes; ++j) {
        key += static_cast<std::uint64_t>(occ[j]) * strides_[j];
        occupations_.push_back(static_cast<std::int16_t>(occ[j]));
      }
      keys_.push_back(key);
      return;
    }
    for (int n = 0; n < cutoffs_[k] && used + n * weights_[k] <= cap; ++n) {
      occ[k] = n;
      self(self, k + 1, used + n * weights_[k]);
    }
    occ[k] = 0;
  };
  recurse(recurse, 0, 0);
  dimension_ = keys_.size();
}

std::optional<std::size_t> ModeLayout::index_of(std::span<const int> occ) const {
  if (occ.size() != cutoffs_.size()) return std::nullopt;
  std::uint64_t key = 0;
  int used = 0;
  for (std::size_t k = 0; k < occ.size(); ++k) {
    if (occ[k] < 0 || occ[k] >= cutoffs_[k]) return std::nullopt;
    key += static_cast<std::uint64_t>(occ[k]) * strides_[k];
    used += occ[k] * weights_[k];
  }
  if (!budget_) return static_cast<std::size_t>(key);
  if (used > *budget_) return std::nullopt;
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin());
}

// ---------------------------------------------------------------------------
// Operators

SparseOp annihilation(const ModeLayout& layout, std::size_t mode) {
  if (mode >= layout.mode_count()) throw std::out_of_range("annihilation: mode index");
  const std::size_t dim = layout.dimension();
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(dim);
  std::vector<int> occ(layout.mode_count());
  for (std::size_t i = 0; i < dim; ++i) {
    const int n = layout.occupation(i, mode);
    if (n == 0) continue;
    auto o = layout.occupations(i);
    std::copy(o.begin(), o.end(), occ.begin());
    occ[mode] = n - 1;
    const auto j = layout.index_of(occ);
    if (j) trips.emplace_back(static_cast<int>(*j), static_cast<int>(i), std::sqrt(double(n)));
  }
  SparseOp a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

SparseOp number_operator(const ModeLayout& layout, std::size_t mode) {
  const std::size_t dim = layout.dimension();
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t i = 0; i < dim; ++i) {
    const int n = layout.occupation(i, mode);
    if (n) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), double(n));
  }
  SparseOp op(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

SparseOp adjoint(const SparseOp& op) { return SparseOp(op.adjoint()); }

MatrixXc to_dense(const SparseOp& op) { return MatrixXc(op); }

std::vector<ModeOperator> build_mode_operators(const ModeLayout& layout) {
  std::vector<ModeOperator> ops;
  ops.reserve(layout.mode_count());
  for (std::size_t k = 0; k < layout.mode_count(); ++k)
    ops.push_back({annihilation(layout, k), OperatorKind::annihilation, "a" + std::to_string(k)});
  return ops;
}

std::size_t OperatorSum::add(SparseOp op) {
  if (frozen_) throw std::logic_error("OperatorSum: add after freeze");
  if (!ops_.empty() && (op.rows() != ops_.front().rows() || op.cols() != ops_.front().cols()))
    throw std::invalid_argument("OperatorSum: dimension mismatch");
  op.makeCompressed();
  adjoints_.push_back(adjoint(op));
  adjoints_.back().makeCompressed();
  ops_.push_back(std::move(op));
  return ops_.size() - 1;
}

void OperatorSum::apply(std::span<const cplx> coefficients, const VectorXc& psi,
                        VectorXc& out) const {
  if (coefficients.size() != ops_.size())
    throw std::invalid_argument("OperatorSum: coefficient count mismatch");
  if (frozen_) {
    coef_.resize(2 * ops_.size());
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      coef_[2 * i] = coefficients[i];
      coef_[2 * i + 1] = std::conj(coefficients[i]);
    }
    out.resize(psi.size());
    const cplx* in = psi.data();
    for (Eigen::Index r = 0; r < psi.size(); ++r) {
      cplx acc{};
      for (Eigen::Index k = row_start_[r]; k < row_start_[r + 1]; ++k)
        acc += coef_[term_[k]] * (base_[k] * in[col_[k]]);
      out[r] = acc;
    }
    return;
  }
  out.setZero(psi.size());
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const cplx c = coefficients[i];
    if (c == cplx{}) continue;
    out.noalias() += c * (ops_[i] * psi);
    out.noalias() += std::conj(c) * (adjoints_[i] * psi);
  }
}

void OperatorSum::freeze() {
  if (frozen_ || ops_.empty()) return;
  for (std::size_t i = 0; i < ops_.size(); ++i)
    for (Eigen::Index k = 0; k < ops_[i].nonZeros(); ++k)
      if (ops_[i].valuePtr()[k].imag() != 0.0) return;
  const Eigen::Index dim = ops_.front().rows();
  row_start_.assign(std::size_t(dim) + 1, 0);
  col_.clear();
  term_.clear();
  base_.clear();
  for (Eigen::Index r = 0; r < dim; ++r) {
    row_start_[r] = Eigen::Index(col_.size());
    for (std::size_t i = 0; i < ops_.size(); ++i)
      for (int side = 0; side < 2; ++side) {
        const SparseOp& op = side == 0 ? ops_[i] : adjoints_[i];
        for (SparseOp::InnerIterator it(op, r); it; ++it) {
          col_.push_back(std::int32_t(it.col()));
          term_.push_back(std::int32_t(2 * i + side));
          base_.push_back(it.value().real());
        }
      }
  }
  row_start_[dim] = Eigen::Index(col_.size());
  frozen_ = true;
}

SparseOp OperatorSum::assemble(std::span<const cplx> coefficients) const {
  if (coefficients.size() != ops_.size())
    throw std::invalid_argument("OperatorSum: coefficient count mismatch");
  const auto dim = static_cast<Eigen::Index>(dimension());
  SparseOp h(dim, dim);
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    h += coefficients[i] * ops_[i];
    h += std::conj(coefficients[i]) * adjoints_[i];
  }
  h.makeCompressed();
  return h;
}

// ---------------------------------------------------------------------------
// States

FockState vacuum_state(LayoutPtr layout, double time) {
  FockState s{std::move(layout), {}, time};
  s.amplitudes = VectorXc::Zero(static_cast<Eigen::Index>(s.layout->dimension()));
  s.amplitudes[0] = 1.0;  // all-zero occupation is always index 0
  return s;
}

VectorXc coherent_amplitudes(cplx alpha, int cutoff) {
  VectorXc c(cutoff);
  const double pref = std::exp(-0.5 * std::norm(alpha));
  cplx term = pref;
  for (int n = 0; n < cutoff; ++n) {
    c[n] = term;
    term *= alpha / std::sqrt(double(n + 1));
  }
  return c;
}

FockState product_state(LayoutPtr layout, const std::vector<VectorXc>& mode_amplitudes,
                        double* truncation_loss) {
  if (mode_amplitudes.size() != layout->mode_count())
    throw std::invalid_argument("product_state: one amplitude vector per mode required");
  double full_norm2 = 1.0;
  for (const auto& v : mode_amplitudes) full_norm2 *= v.squaredNorm();
  FockState s{layout, VectorXc::Zero(static_cast<Eigen::Index>(layout->dimension())), 0.0};
  for (std::size_t i = 0; i < layout->dimension(); ++i) {
    cplx amp = 1.0;
    for (std::size_t k = 0; k < layout->mode_count(); ++k) {
      const int n = layout->occupation(i, k);
      const auto& v = mode_amplitudes[k];
      amp *= n < v.size() ? v[n] : cplx{};
      if (amp == cplx{}) break;
    }
    s.amplitudes[static_cast<Eigen::Index>(i)] = amp;
  }
  const double kept = s.amplitudes.squaredNorm();
  if (kept == 0.0) throw std::invalid_argument("product_state: state vanishes in truncation");
  if (truncation_loss) *truncation_loss = 1.0 - kept / full_norm2;
  s.amplitudes /= std::sqrt(kept);
  return s;
}

cplx expectation(const SparseOp& op, const FockState& state) {
  return state.amplitudes.dot(op * state.amplitudes);
}

LeakageReport fock_leakage(const FockState& state) {
  const ModeLayout& layout = *state.layout;
  LeakageReport rep;
  std::vector<double> top(layout.mode_count(), 0.0);
  const auto cut = layout.cutoffs();
  const auto w = layout.weights();
  const int budget = layout.max_total().value_or(-1);
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    const double p = std::norm(state.amplitudes[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    int used = 0;
    for (std::size_t k = 0; k < layout.mode_count(); ++k) {
      const int n = layout.occupation(i, k);
      used += n * w[k];
      if (n == cut[k] - 1 && cut[k] > 1) top[k] += p;
    }
    // Only the outermost shells can be coupled out of the budget.
    if (budget >= 0 && used > budget - 2) rep.budget_shell += p;
  }
  for (double t : top) rep.top_level = std::max(rep.top_level, t);
  return rep;
}

// ---------------------------------------------------------------------------
// Schrödinger evolution

std::vector<FockState> evolve_schrodinger(const FockState& state, const HamiltonianApply& hamiltonian,
                                          std::span<const double> sample_times,
                                          const SchrodingerOptions& options,
                                          SchrodingerDiagnostics* diagnostics) {
  const double n0 = state.norm();
  if (std::abs(n0 - 1.0) > options.norm_tol)
    throw std::invalid_argument("evolve_schrodinger: initial state not normalized");
  VectorXc hpsi(state.amplitudes.size());
  OdeRhs rhs = [&](double t, const VectorXc& y, VectorXc& dy) {
    hamiltonian(t, y, hpsi);
    dy = -kI * hpsi;
  };
  OdeSolver solver(rhs, state.time, state.amplitudes, options.ode);
  SchrodingerDiagnostics diag;
  std::vector<FockState> out;
  out.reserve(sample_times.size());
  for (double t : sample_times) {
    solver.advance_to(t);
    FockState s{state.layout, solver.state(), t};
    const double drift = std::abs(s.norm() - 1.0);
    diag.max_norm_drift = std::max(diag.max_norm_drift, drift);
    if (drift > 10.0 * options.norm_tol) {
      std::ostringstream os;
      os << "norm drift " << drift << " at t=" << t << " exceeds 10*norm_tol";
      throw NumericalError("norm-preservation", os.str());
    }
    diag.max_leakage = std::max(diag.max_leakage, fock_leakage(s).max());
    out.push_back(std::move(s));
  }
  diag.stats = solver.stats();
  if (diagnostics) *diagnostics = diag;
  return out;
}

std::vector<FockState> evolve_schrodinger(const FockState& state,
                                          const std::function<SparseOp(double)>& hamiltonian,
                                          std::span<const double> sample_times,
                                          const SchrodingerOptions& options,
                                          SchrodingerDiagnostics* diagnostics) {
  HamiltonianApply apply = [&](double t, const VectorXc& psi, VectorXc& out) {
    out = hamiltonian(t) * psi;
  };
  return evolve_schrodinger(state, apply, sample_times, options, diagnostics);
}

// ---------------------------------------------------------------------------
// Reduced states

DensityMatrix partial_trace(const FockState& state, std::span<const std::size_t> keep) {
  const ModeLayout& layout = *state.layout;
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep must be nonempty");
  std::vector<bool> kept(layout.mode_count(), false);
  for (auto k : keep) {
    if (k >= layout.mode_count()) throw std::out_of_range("partial_trace: mode index");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate mode");
    kept[k] = true;
  }
  DensityMatrix out;
  std::size_t kept_dim = 1;
  for (auto k : keep) {
    out.cutoffs.push_back(layout.cutoffs()[k]);
    kept_dim *= static_cast<std::size_t>(layout.cutoffs()[k]);
  }
  if (kept_dim > 20000) throw std::length_error("partial_trace: kept space too large");

  std::unordered_map<std::uint64_t, Eigen::Index> env_index;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> coords(layout.dimension());
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    std::size_t kidx = 0;
    for (auto k : keep) kidx = kidx * layout.cutoffs()[k] + layout.occupation(i, k);
    std::uint64_t ekey = 0;
    for (std::size_t k = 0; k < layout.mode_count(); ++k)
      if (!kept[k]) ekey = ekey * static_cast<std::uint64_t>(layout.cutoffs()[k]) +
                           static_cast<std::uint64_t>(layout.occupation(i, k));
    auto [it, fresh] = env_index.try_emplace(ekey, static_cast<Eigen::Index>(env_index.size()));
    coords[i] = {static_cast<Eigen::Index>(kidx), it->second};
  }
  MatrixXc psi = MatrixXc::Zero(static_cast<Eigen::Index>(kept_dim),
                                static_cast<Eigen::Index>(env_index.size()));
  for (std::size_t i = 0; i < layout.dimension(); ++i)
    psi(coords[i].first, coords[i].second) = state.amplitudes[static_cast<Eigen::Index>(i)];
  out.rho = psi * psi.adjoint();
  return out;
}

double purity(const DensityMatrix& rho) { return rho.rho.cwiseAbs2().sum(); }

double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho.rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()[i];
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

double entanglement_entropy(const FockState& state, std::span<const std::size_t> side) {
  return von_neumann_entropy(partial_trace(state, side));
}

// ---------------------------------------------------------------------------
// Wigner function

double WignerGrid::riemann_sum() const {
  if (x.size() < 2 || p.size() < 2) return 0.0;
  const double dx = (x.back() - x.front()) / double(x.size() - 1);
  const double dp = (p.back() - p.front()) / double(p.size() - 1);
  return values.sum() * dx * dp;
}

namespace {

// Laguerre-free recurrence over the |m><n| Wigner kernels.
double wigner_point(const MatrixXc& rho, double x, double p, std::vector<cplx>& wl) {
  const auto dim = rho.rows();
  const cplx alpha{x / std::numbers::sqrt2, p / std::numbers::sqrt2};
  wl.assign(static_cast<std::size_t>(dim), cplx{});
  wl[0] = std::exp(-2.0 * std::norm(alpha)) / std::numbers::pi;
  double w = rho(0, 0).real() * wl[0].real();
  for (Eigen::Index n = 1; n < dim; ++n) {
    wl[n] = 2.0 * alpha * wl[n - 1] / std::sqrt(double(n));
    w += 2.0 * (rho(0, n) * wl[n]).real();
  }
  for (Eigen::Index m = 1; m < dim; ++m) {
    cplx temp = wl[m];
    wl[m] = (2.0 * std::conj(alpha) * temp - std::sqrt(double(m)) * wl[m - 1]) / std::sqrt(double(m));
    w += (rho(m, m) * wl[m]).real();
    for (Eigen::Index n = m + 1; n < dim; ++n) {
      const cplx temp2 = (2.0 * alpha * wl[n - 1] - std::sqrt(double(m)) * temp) / std::sqrt(double(n));
      temp = wl[n];
      wl[n] = temp2;
      w += 2.0 * (rho(m, n) * wl[n]).real();
    }
  }
  return w;
}

}  // namespace

double wigner_at(const DensityMatrix& rho, double x, double p) {
  if (rho.cutoffs.size() != 1) throw std::invalid_argument("wigner: single-mode state required");
  std::vector<cplx> wl;
  return wigner_point(rho.rho, x, p, wl);
}

WignerGrid wigner_single_mode(const DensityMatrix& rho, const WignerSpec& spec,
                              std::string* normalization_warning) {
  if (rho.cutoffs.size() != 1) throw std::invalid_argument("wigner: single-mode state required");
  if (spec.nx < 2 || spec.np < 2) throw std::invalid_argument("wigner: grid needs >= 2 points per axis");
  WignerGrid g;
  g.x.resize(static_cast<std::size_t>(spec.nx));
  g.p.resize(static_cast<std::size_t>(spec.np));
  for (int i = 0; i < spec.nx; ++i) g.x[i] = spec.x_min + (spec.x_max - spec.x_min) * i / (spec.nx - 1);
  for (int i = 0; i < spec.np; ++i) g.p[i] = spec.p_min + (spec.p_max - spec.p_min) * i / (spec.np - 1);
  g.values.resize(spec.nx, spec.np);
  std::vector<cplx> wl;
  for (int i = 0; i < spec.nx; ++i)
    for (int j = 0; j < spec.np; ++j) g.values(i, j) = wigner_point(rho.rho, g.x[i], g.p[j], wl);
  const double deficit = 1.0 - g.riemann_sum() / rho.trace();
  if (normalization_warning) {
    normalization_warning->clear();
    if (std::abs(deficit) > 1e-3) {
      std::ostringstream os;
      os << "Wigner grid too coarse or narrow: normalization deficit " << deficit;
      *normalization_warning = os.str();
    }
  }
  return g;
}

}  // namespace gifsim
