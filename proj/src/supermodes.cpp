#include "gifsim/supermodes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

namespace gifsim {

namespace {

MatrixXc pump_hankel(const VectorXc& beta, int m) {
  MatrixXc p(m, m);
  for (int l = 0; l < m; ++l)
    for (int j = 0; j < m; ++j) p(j, l) = beta[j + l];
  return p;
}

// Pump waveform of the pair (m, m'): e^{-iδ_k t} sum_{p+r=k} W_mp W_m'r.
VectorXc pair_vector(const MatrixXc& w, int m, int mp, const WavegridConfig& config, double t) {
  const int n = config.m;
  VectorXc k = VectorXc::Zero(config.pump_size());
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r) k[p + r] += w(m, p) * w(mp, r);
  for (int i = 0; i < k.size(); ++i) k[i] *= std::exp(-kI * (config.delta(i) * t));
  return k;
}

SupermodeBasis decompose(const MatrixXc& s, const MatrixXc& c, const VectorXc& beta, double t,
                         const WavegridConfig& config, const DecomposeOptions& opt,
                         const SupermodeBasis* previous) {
  const int n = config.m;
  const int m_fh = opt.m_fh;
  const int m_sh = opt.m_sh > 0 ? opt.m_sh : 2 * m_fh - 1;
  if (m_fh < 1 || m_fh > n) throw std::invalid_argument("supermodes: m_fh must be in [1, M]");
  if (m_sh > config.pump_size()) throw std::invalid_argument("supermodes: m_sh exceeds pump grid");

  SupermodeBasis basis;
  basis.time = t;
  Eigen::BDCSVD<MatrixXc> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MatrixXc u = svd.matrixU();
  MatrixXc vs = svd.matrixV();
  Eigen::VectorXd sigma = svd.singularValues();

  // Tracked supermodes follow the previous basis by overlap, so that modes
  // whose singular values cross keep their identity.
  if (previous && previous->v.rows() == n) {
    std::vector<int> order;
    std::vector<bool> used(n, false);
    for (int m = 0; m < m_fh; ++m) {
      int best = -1;
      double best_ov = -1.0;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double ov = std::abs(previous->v.row(m).transpose().dot(vs.col(j)));
        if (ov > best_ov) {
          best_ov = ov;
          best = j;
        }
      }
      used[best] = true;
      order.push_back(best);
      if (best >= m_fh) {
        std::ostringstream os;
        os << "t=" << t << ": tracked supermode " << m << " ranks " << best << " by singular value";
        basis.warnings.push_back(os.str());
      }
    }
    for (int j = 0; j < n; ++j)
      if (!used[j]) order.push_back(j);
    const MatrixXc u0 = u, v0 = vs;
    const Eigen::VectorXd s0 = sigma;
    for (int i = 0; i < n; ++i) {
      u.col(i) = u0.col(order[i]);
      vs.col(i) = v0.col(order[i]);
      sigma[i] = s0[order[i]];
    }
  } else if (sigma[0] > 0.0) {
    // Near-degenerate leading singular values: order by overlap with the pump
    // amplitude at the doubled wavenumber.
    VectorXc mirror(n);
    for (int j = 0; j < n; ++j) mirror[j] = beta[2 * j];
    int start = 0;
    while (start < std::min(m_fh, n)) {
      int end = start + 1;
      while (end < n && sigma[end - 1] - sigma[end] <= opt.degeneracy_gap * sigma[0]) ++end;
      if (end - start > 1) {
        std::vector<int> idx(end - start);
        std::iota(idx.begin(), idx.end(), start);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
          return std::abs(vs.col(a).dot(mirror)) > std::abs(vs.col(b).dot(mirror));
        });
        const MatrixXc ublock = u.middleCols(start, end - start), vblock = vs.middleCols(start, end - start);
        for (int i = 0; i < end - start; ++i) {
          u.col(start + i) = ublock.col(idx[i] - start);
          vs.col(start + i) = vblock.col(idx[i] - start);
        }
        std::ostringstream os;
        os << "t=" << t << ": singular values " << start << ".." << end - 1 << " degenerate within "
           << opt.degeneracy_gap;
        basis.warnings.push_back(os.str());
      }
      start = end;
    }
  }

  // Pair phase from C = W† cosh V, then sign from the previous basis.
  for (int m = 0; m < n; ++m) {
    const cplx z = u.col(m).adjoint() * c * vs.col(m).conjugate();
    const cplx rot = std::abs(z) > 0.0 ? std::polar(1.0, 0.5 * std::arg(z)) : cplx{1.0};
    u.col(m) *= rot;
    vs.col(m) *= rot;
    if (previous && previous->v.rows() == n) {
      const cplx ov = previous->v.row(m).transpose().dot(vs.col(m));  // sum conj(prev) * new
      if (ov.real() < 0.0) {
        u.col(m) = -u.col(m);
        vs.col(m) = -vs.col(m);
      }
    }
  }
  basis.w = u.adjoint();
  basis.v = vs.transpose();
  basis.lambdas = sigma.array().asinh();
  basis.signal = basis.v.topRows(m_fh);

  // Pump supermodes: pair products of leading W rows, dominant couplings first.
  struct Pair { int m, mp; double weight; };
  std::vector<Pair> pairs;
  for (int m = 0; m < m_fh; ++m)
    for (int mp = m; mp < m_fh; ++mp) pairs.push_back({m, mp, sigma[m] * sigma[mp]});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.weight > b.weight; });
  if (previous && !previous->pump_pairs.empty()) {
    // Keep the previous order so the orthonormalized rows vary smoothly.
    const auto rank = [&](const Pair& pr) {
      const auto it = std::find(previous->pump_pairs.begin(), previous->pump_pairs.end(), std::pair{pr.m, pr.mp});
      return it - previous->pump_pairs.begin();
    };
    std::stable_sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) { return rank(a) < rank(b); });
  }
  std::vector<VectorXc> rows;
  for (const Pair& pr : pairs) {
    if (int(rows.size()) == m_sh) break;
    VectorXc k = pair_vector(basis.w, pr.m, pr.mp, config, t);
    const double k_norm = k.norm();
    if (k_norm == 0.0) continue;
    k /= k_norm;
    for (const VectorXc& q : rows) k -= q.dot(k) * q;
    const double residual = k.norm();
    if (residual < opt.rank_tol) {
      std::ostringstream os;
      os << "t=" << t << ": pair (" << pr.m << "," << pr.mp << ") dependent (residual " << residual << ")";
      basis.warnings.push_back(os.str());
      continue;
    }
    rows.push_back(k / residual);
    basis.pump_pairs.emplace_back(pr.m, pr.mp);
  }
  if (int(rows.size()) < m_sh) {
    std::ostringstream os;
    os << "t=" << t << ": pump subspace rank " << rows.size() << " < requested " << m_sh;
    basis.warnings.push_back(os.str());
  }
  basis.pump.resize(rows.size(), config.pump_size());
  for (std::size_t l = 0; l < rows.size(); ++l) {
    VectorXc row = rows[l];
    if (previous && l < std::size_t(previous->pump.rows()) && previous->pump.cols() == row.size()) {
      const cplx ov = previous->pump.row(l).transpose().dot(row);
      if (std::abs(ov) > 0.0) row *= std::conj(ov) / std::abs(ov);
    }
    basis.pump.row(l) = row.transpose();
  }
  return basis;
}

}  // namespace

SupermodeBasis decompose_supermodes(const MultimodeGifState& state, const WavegridConfig& config,
                                    const DecomposeOptions& options, const SupermodeBasis* previous) {
  if (state.s.rows() != config.m || state.beta.size() != config.pump_size())
    throw std::invalid_argument("decompose_supermodes: state does not match grid");
  if (state.s.cwiseAbs().maxCoeff() == 0.0) {
    if (previous) {
      SupermodeBasis b = *previous;
      b.time = state.time;
      b.warnings.clear();
      return b;
    }
    const MatrixXc seed = -kI * pump_hankel(state.beta, config.m);
    return decompose(seed, MatrixXc::Identity(config.m, config.m), state.beta, state.time, config, options,
                     nullptr);
  }
  return decompose(state.s, state.c, state.beta, state.time, config, options, previous);
}

SupermodeBasis seed_supermodes(const WavegridConfig& config, const PumpProfile& pump,
                               const DecomposeOptions& options) {
  if (pump.amplitudes.size() != config.pump_size())
    throw std::invalid_argument("seed_supermodes: pump does not match grid");
  const MatrixXc seed = -kI * pump_hankel(pump.amplitudes, config.m);
  if (seed.cwiseAbs().maxCoeff() == 0.0) {
    // No pump: any orthonormal set will do.
    const int m_sh = options.m_sh > 0 ? options.m_sh : 2 * options.m_fh - 1;
    SupermodeBasis b;
    b.lambdas = Eigen::VectorXd::Zero(config.m);
    b.w = b.v = MatrixXc::Identity(config.m, config.m);
    b.signal = b.v.topRows(options.m_fh);
    b.pump = MatrixXc::Identity(config.pump_size(), config.pump_size()).topRows(m_sh);
    return b;
  }
  SupermodeBasis b =
      decompose(seed, MatrixXc::Identity(config.m, config.m), pump.amplitudes, 0.0, config, options, nullptr);
  b.lambdas.setZero();
  return b;
}

void cubic_tensors(const MultimodeGifState& state, const WavegridConfig& config, const MatrixXc& signal,
                   const MatrixXc& pump, GifTensors& out) {
  const int n = config.m;
  const double g = config.coupling();
  const double t = state.time;
  const MatrixXc x = state.s * signal.transpose();  // M x M_FH
  const MatrixXc y = state.c * signal.adjoint();
  const int m_sh = int(pump.rows());
  out.time = t;
  out.mu.resize(m_sh);
  out.nu.resize(m_sh);
  out.xi.resize(m_sh);
  VectorXc rotated(config.pump_size());
  MatrixXc p(n, n);
  for (int l = 0; l < m_sh; ++l) {
    for (int k = 0; k < rotated.size(); ++k) rotated[k] = std::exp(kI * (config.delta(k) * t)) * pump(l, k);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) p(r, c) = rotated[r + c];
    const MatrixXc px = p * x, py = p * y;
    out.mu[l] = g * (x.transpose() * px);
    out.nu[l] = g * (x.transpose() * py);
    out.xi[l] = g * (y.transpose() * py);
    out.mu[l] = 0.5 * (out.mu[l] + out.mu[l].transpose()).eval();
    out.xi[l] = 0.5 * (out.xi[l] + out.xi[l].transpose()).eval();
  }
}

MatrixXc rotation_generator(const MatrixXc& from, const MatrixXc& to, double dt, double min_overlap) {
  if (from.rows() != to.rows() || from.cols() != to.cols())
    throw std::invalid_argument("rotation_generator: basis shapes differ");
  const Eigen::Index r = from.rows();
  if (from == to) return MatrixXc::Zero(r, r);
  if (!(dt > 0.0)) throw std::invalid_argument("rotation_generator: dt must be positive");
  const MatrixXc overlap = to * from.adjoint();  // to ≈ overlap * from
  for (Eigen::Index m = 0; m < r; ++m) {
    const double kept = overlap.row(m).norm();
    if (kept < min_overlap) {
      std::ostringstream os;
      os << "waveform " << m << " keeps only " << kept << " of its norm in the previous span (< " << min_overlap
         << "); refresh the basis more often";
      throw NumericalError("gauge-alignment", os.str());
    }
  }
  Eigen::JacobiSVD<MatrixXc> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatrixXc unitary = svd.matrixU() * svd.matrixV().adjoint();
  // Unitary matrices are normal, so the Schur form is diagonal.
  Eigen::ComplexSchur<MatrixXc> schur(unitary);
  const MatrixXc& q = schur.matrixU();
  VectorXc logs(r);
  for (Eigen::Index i = 0; i < r; ++i) logs[i] = kI * std::arg(schur.matrixT()(i, i));
  const MatrixXc gen = q * logs.asDiagonal() * q.adjoint() / dt;
  return 0.5 * (gen - gen.adjoint());
}

GifTensors build_gif_tensors(const MultimodeGifState& state, const WavegridConfig& config,
                             const SupermodeBasis& basis, const SupermodeBasis* previous, double dt_basis) {
  GifTensors out;
  cubic_tensors(state, config, basis.signal, basis.pump, out);
  out.inertial_signal = MatrixXc::Zero(basis.m_fh(), basis.m_fh());
  out.inertial_pump = MatrixXc::Zero(basis.m_sh(), basis.m_sh());
  if (previous && dt_basis > 0.0) {
    out.inertial_signal = kI * rotation_generator(previous->signal, basis.signal, dt_basis);
    out.inertial_pump = kI * rotation_generator(previous->pump, basis.pump, dt_basis);
  }
  return out;
}

// ---------------------------------------------------------------------------

SupermodeHamiltonian::SupermodeHamiltonian(LayoutPtr layout, int m_fh, int m_sh)
    : layout_(std::move(layout)), m_fh_(m_fh), m_sh_(m_sh) {
  if (int(layout_->mode_count()) != m_fh + m_sh)
    throw std::invalid_argument("SupermodeHamiltonian: layout mode count mismatch");
  std::vector<SparseOp> a(m_fh), ad(m_fh), b(m_sh), bd(m_sh);
  for (int m = 0; m < m_fh; ++m) {
    a[m] = annihilation(*layout_, m);
    ad[m] = adjoint(a[m]);
  }
  for (int l = 0; l < m_sh; ++l) {
    b[l] = annihilation(*layout_, m_fh + l);
    bd[l] = adjoint(b[l]);
  }
  for (int l = 0; l < m_sh; ++l) {
    for (int m = 0; m < m_fh; ++m)
      for (int n = m; n < m_fh; ++n) terms_.add(SparseOp(bd[l] * SparseOp(ad[m] * ad[n])));
    for (int m = 0; m < m_fh; ++m)
      for (int n = 0; n < m_fh; ++n) terms_.add(SparseOp(bd[l] * SparseOp(ad[m] * a[n])));
    for (int m = 0; m < m_fh; ++m)
      for (int n = m; n < m_fh; ++n) terms_.add(SparseOp(bd[l] * SparseOp(a[m] * a[n])));
  }
  for (int m = 0; m < m_fh; ++m)
    for (int n = m; n < m_fh; ++n) terms_.add(SparseOp(ad[m] * a[n]));
  for (int m = 0; m < m_sh; ++m)
    for (int n = m; n < m_sh; ++n) terms_.add(SparseOp(bd[m] * b[n]));
  terms_.freeze();
}

void SupermodeHamiltonian::coefficients(const GifTensors& t, std::vector<cplx>& out) const {
  out.clear();
  out.reserve(terms_.size());
  for (int l = 0; l < m_sh_; ++l) {
    for (int m = 0; m < m_fh_; ++m)
      for (int n = m; n < m_fh_; ++n) out.push_back(m == n ? 0.5 * t.mu[l](m, m) : t.mu[l](m, n));
    for (int m = 0; m < m_fh_; ++m)
      for (int n = 0; n < m_fh_; ++n) out.push_back(t.nu[l](m, n));
    for (int m = 0; m < m_fh_; ++m)
      for (int n = m; n < m_fh_; ++n) out.push_back(m == n ? 0.5 * t.xi[l](m, m) : t.xi[l](m, n));
  }
  for (int m = 0; m < m_fh_; ++m)
    for (int n = m; n < m_fh_; ++n)
      out.push_back(m == n ? 0.5 * t.inertial_signal(m, m).real() : t.inertial_signal(m, n));
  for (int m = 0; m < m_sh_; ++m)
    for (int n = m; n < m_sh_; ++n)
      out.push_back(m == n ? 0.5 * t.inertial_pump(m, m).real() : t.inertial_pump(m, n));
}

SparseOp SupermodeHamiltonian::assemble(const GifTensors& tensors) const {
  std::vector<cplx> c;
  coefficients(tensors, c);
  return terms_.assemble(c);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> refresh_schedule(std::span<const double> samples, double cadence) {
  std::vector<double> nodes;
  if (samples.empty()) return nodes;
  const double t_end = samples.back();
  const long n = long(std::floor(t_end / cadence + 1e-9));
  for (long k = 1; k <= n; ++k) nodes.push_back(k * cadence);
  for (double t : samples)
    if (t > 0.0) nodes.push_back(t);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> out;
  for (double t : nodes)
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  return out;
}

LayoutPtr supermode_layout(const NongaussianOptions& opt, int m_fh, int m_sh) {
  std::vector<int> cutoffs, weights;
  for (int m = 0; m < m_fh; ++m) {
    cutoffs.push_back(m < int(opt.signal_cutoffs.size()) ? opt.signal_cutoffs[m] : 12);
    weights.push_back(1);
  }
  for (int l = 0; l < m_sh; ++l) {
    cutoffs.push_back(l < int(opt.pump_cutoffs.size()) ? opt.pump_cutoffs[l] : 6);
    weights.push_back(2);
  }
  if (opt.max_excitation)
    return std::make_shared<const ModeLayout>(cutoffs, weights, *opt.max_excitation);
  return std::make_shared<const ModeLayout>(cutoffs);
}

// exp(τ G) for anti-Hermitian G = iH, from one eigendecomposition of H.
class UnitaryFlow {
 public:
  UnitaryFlow() = default;
  explicit UnitaryFlow(const MatrixXc& generator) {
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(-kI * generator);
    vectors_ = es.eigenvectors();
    rates_ = es.eigenvalues();
  }
  MatrixXc at(double tau) const {
    if (rates_.size() == 0) return {};
    VectorXc ph(rates_.size());
    for (Eigen::Index i = 0; i < rates_.size(); ++i) ph[i] = std::polar(1.0, rates_[i] * tau);
    return vectors_ * ph.asDiagonal() * vectors_.adjoint();
  }

 private:
  MatrixXc vectors_;
  Eigen::VectorXd rates_;
};

// Waveforms of one refresh interval, rows(t) = exp((t - t0) G) rows(t0).
struct Interval {
  double t0 = 0.0;
  MatrixXc signal0, pump0;
  UnitaryFlow signal_flow, pump_flow;
  bool moving = false;
  MatrixXc signal_at(double t) const { return moving ? MatrixXc(signal_flow.at(t - t0) * signal0) : signal0; }
  MatrixXc pump_at(double t) const { return moving ? MatrixXc(pump_flow.at(t - t0) * pump0) : pump0; }
};

}  // namespace

std::vector<NongaussianSample> evolve_nongaussian(const WavegridConfig& config, const PumpProfile& pump,
                                                  std::span<const double> sample_times,
                                                  const NongaussianOptions& options,
                                                  NongaussianDiagnostics* diagnostics) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0) throw std::invalid_argument("sample times must be >= 0");
    if (i > 0 && !(sample_times[i] > sample_times[i - 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  }
  if (!(options.basis_cadence > 0.0)) throw std::invalid_argument("basis cadence must be positive");
  NongaussianDiagnostics diag;

  const MultimodeGifSystem system(config, PumpModel::depleted);
  const MultimodeGifState gif0 = initial_gif_state(config, pump);
  SupermodeBasis basis = seed_supermodes(config, pump, options.decompose);
  const int m_fh = basis.m_fh(), m_sh = basis.m_sh();
  DecomposeOptions dec = options.decompose;
  dec.m_sh = m_sh;
  const auto note = [&diag](const std::vector<std::string>& ws) {
    for (const auto& w : ws) {
      if (diag.warnings.size() < kMaxRecordedWarnings)
        diag.warnings.push_back(w);
      else
        ++diag.suppressed_warnings;
    }
  };
  note(basis.warnings);

  const LayoutPtr layout = supermode_layout(options, m_fh, m_sh);
  const SupermodeHamiltonian hamiltonian(layout, m_fh, m_sh);
  const Eigen::Index ng = system.packed_size();
  const Eigen::Index dim = Eigen::Index(layout->dimension());

  OdeSolver ahead([&system](double t, const VectorXc& y, VectorXc& dy) { system.rhs(t, y, dy); }, 0.0,
                  system.pack(gif0), options.gif.ode);

  Interval interval;
  interval.signal0 = basis.signal;
  interval.pump0 = basis.pump;
  GifTensors tensors;
  tensors.inertial_signal = MatrixXc::Zero(m_fh, m_fh);
  tensors.inertial_pump = MatrixXc::Zero(m_sh, m_sh);
  std::vector<cplx> coeffs;
  VectorXc gif_dy, h_psi(dim);
  OdeRhs joint_rhs = [&](double t, const VectorXc& y, VectorXc& dy) {
    dy.resize(y.size());
    system.rhs(t, y.head(ng), gif_dy);
    dy.head(ng) = gif_dy;
    const MultimodeGifState gif = system.unpack(t, y.head(ng));
    cubic_tensors(gif, config, interval.signal_at(t), interval.pump_at(t), tensors);
    hamiltonian.coefficients(tensors, coeffs);
    const VectorXc psi = y.tail(dim);
    hamiltonian.apply(coeffs, psi, h_psi);
    dy.tail(dim) = -kI * h_psi;
  };
  VectorXc y0(ng + dim);
  y0.head(ng) = system.pack(gif0);
  y0.tail(dim) = vacuum_state(layout).amplitudes;
  OdeSolver joint(joint_rhs, 0.0, y0, options.fock.ode);

  std::vector<NongaussianSample> out;
  std::size_t next_sample = 0;
  auto record = [&](const MultimodeGifState& gif, const SupermodeBasis& b, const VectorXc& psi, double t) {
    out.push_back({gif, b, FockState{layout, psi, t}});
    ++next_sample;
  };
  if (!sample_times.empty() && sample_times[0] == 0.0) record(gif0, basis, y0.tail(dim), 0.0);

  double t_prev = 0.0;
  for (double t_node : refresh_schedule(sample_times, options.basis_cadence)) {
    ahead.advance_to(t_node);
    const MultimodeGifState gif_next = system.unpack(t_node, ahead.state());
    ConstraintDrift drift;
    check_constraints(gif_next, options.gif.constraint_tol, &drift);
    diag.max_drift.bogoliubov = std::max(diag.max_drift.bogoliubov, drift.bogoliubov);
    diag.max_drift.symmetry = std::max(diag.max_drift.symmetry, drift.symmetry);
    SupermodeBasis next = decompose_supermodes(gif_next, config, dec, &basis);
    if (next.m_sh() != m_sh) throw NumericalError("pump-rank", next.warnings.empty() ? "rank drop" : next.warnings.back());
    note(next.warnings);
    ++diag.refreshes;

    const double h = t_node - t_prev;
    const MatrixXc ov = next.signal * basis.signal.adjoint();
    for (Eigen::Index m = 0; m < ov.rows(); ++m)
      diag.min_basis_overlap = std::min(diag.min_basis_overlap, std::abs(ov(m, m)));
    interval.t0 = t_prev;
    interval.signal0 = basis.signal;
    interval.pump0 = basis.pump;
    const MatrixXc gen_signal = rotation_generator(basis.signal, next.signal, h, options.min_overlap);
    const MatrixXc gen_pump = rotation_generator(basis.pump, next.pump, h, options.min_overlap);
    interval.signal_flow = UnitaryFlow(gen_signal);
    interval.pump_flow = UnitaryFlow(gen_pump);
    interval.moving = true;
    tensors.inertial_signal = kI * gen_signal;
    tensors.inertial_pump = kI * gen_pump;
    joint.invalidate_derivative();

    joint.advance_to(t_node);
    const VectorXc psi = joint.state().tail(dim);
    const double drift_norm = std::abs(psi.norm() - 1.0);
    diag.max_norm_drift = std::max(diag.max_norm_drift, drift_norm);
    if (drift_norm > 10.0 * options.fock.norm_tol) {
      std::ostringstream os;
      os << "|psi| - 1 = " << drift_norm << " at t=" << t_node;
      throw NumericalError("norm-preservation", os.str());
    }
    const FockState probe{layout, psi, t_node};
    diag.max_leakage = std::max(diag.max_leakage, fock_leakage(probe).max());

    basis = std::move(next);
    t_prev = t_node;
    if (next_sample < sample_times.size() && std::abs(sample_times[next_sample] - t_node) <= 1e-12 * std::max(1.0, t_node))
      record(gif_next, basis, psi, t_node);
  }
  diag.leakage_flagged = diag.max_leakage > options.leakage_threshold;
  diag.stats = joint.stats();
  if (diagnostics) *diagnostics = std::move(diag);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct SupermodeMoments {
  MatrixXc n;       // <a_m† a_n>
  MatrixXc pair;    // <a_m a_n>
  VectorXc b;       // <b_l>
  Eigen::VectorXd nb;  // <b_l† b_l>
};

SupermodeMoments supermode_moments(const NongaussianSample& sample) {
  const int m_fh = sample.basis.m_fh(), m_sh = sample.basis.m_sh();
  const ModeLayout& layout = *sample.state.layout;
  if (int(layout.mode_count()) != m_fh + m_sh) throw std::invalid_argument("sample layout mismatch");
  const VectorXc& psi = sample.state.amplitudes;
  std::vector<VectorXc> apsi(m_fh);
  for (int m = 0; m < m_fh; ++m) apsi[m] = annihilation(layout, m) * psi;
  SupermodeMoments mo;
  mo.n.resize(m_fh, m_fh);
  mo.pair.resize(m_fh, m_fh);
  for (int m = 0; m < m_fh; ++m)
    for (int n = 0; n < m_fh; ++n) {
      mo.n(m, n) = apsi[m].dot(apsi[n]);
      mo.pair(m, n) = psi.dot(annihilation(layout, m) * apsi[n]);
    }
  mo.b.resize(m_sh);
  mo.nb.resize(m_sh);
  for (int l = 0; l < m_sh; ++l) {
    const VectorXc bpsi = annihilation(layout, m_fh + l) * psi;
    mo.b[l] = psi.dot(bpsi);
    mo.nb[l] = bpsi.squaredNorm();
  }
  return mo;
}

}  // namespace

double pump_photon_number(const NongaussianSample& sample, const WavegridConfig& config) {
  const auto mo = supermode_moments(sample);
  const double t = sample.gif.time;
  double total = sample.gif.beta.squaredNorm() + mo.nb.sum();
  for (int l = 0; l < sample.basis.m_sh(); ++l) {
    cplx proj = 0.0;
    for (int k = 0; k < config.pump_size(); ++k)
      proj += sample.gif.beta[k] * std::exp(kI * (config.delta(k) * t)) * sample.basis.pump(l, k);
    total += 2.0 * (std::conj(proj) * mo.b[l]).real();
  }
  return total;
}

Eigen::VectorXd signal_spectral_density(const NongaussianSample& sample, const WavegridConfig& config) {
  const auto mo = supermode_moments(sample);
  const MatrixXc& a = sample.basis.signal;
  const MatrixXc x = sample.gif.s * a.transpose();
  const MatrixXc y = sample.gif.c * a.adjoint();
  Eigen::VectorXd out = sample.gif.s.rowwise().squaredNorm();
  for (int j = 0; j < config.m; ++j) {
    cplx extra = 0.0;
    for (int m = 0; m < a.rows(); ++m)
      for (int n = 0; n < a.rows(); ++n) {
        extra += (std::conj(y(j, m)) * y(j, n) + x(j, m) * std::conj(x(j, n))) * mo.n(m, n);
        extra += 2.0 * (std::conj(x(j, m)) * y(j, n) * mo.pair(m, n)).real();
      }
    out[j] += extra.real();
  }
  return out / config.ds;
}

double signal_photon_number(const NongaussianSample& sample, const WavegridConfig& config) {
  return signal_spectral_density(sample, config).sum() * config.ds;
}

double manley_rowe(const NongaussianSample& sample, const WavegridConfig& config) {
  return signal_photon_number(sample, config) + 2.0 * pump_photon_number(sample, config);
}

NongaussianSample gaussian_sample(const MultimodeGifState& gif, const SupermodeBasis& basis) {
  std::vector<int> cutoffs(basis.m_fh() + basis.m_sh(), 1);
  auto layout = make_layout(cutoffs);
  return {gif, basis, vacuum_state(layout, gif.time)};
}

}  // namespace gifsim
