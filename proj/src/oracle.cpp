#include "gifsim/oracle.hpp"

#include <cmath>
#include <sstream>

namespace gifsim {

TinyGridSystem build_tiny_hamiltonian(const WavegridConfig& config, const OracleOptions& options) {
  config.validate();
  if (config.m > kMaxTinySignalPoints) {
    std::ostringstream os;
    os << "oracle: at most " << kMaxTinySignalPoints << " signal points (got " << config.m << ")";
    throw std::invalid_argument(os.str());
  }
  if (options.max_excitation < 0) throw std::invalid_argument("oracle: max_excitation must be >= 0");
  const int m = config.m, np = config.pump_size();
  const int k = options.max_excitation;
  std::vector<int> cutoffs, weights;
  for (int j = 0; j < m; ++j) {
    cutoffs.push_back(k + 1);
    weights.push_back(1);
  }
  for (int i = 0; i < np; ++i) {
    cutoffs.push_back(k / 2 + 1);
    weights.push_back(2);
  }
  TinyGridSystem sys{config, std::make_shared<const ModeLayout>(cutoffs, weights, k, options.dimension_cap), {}};
  const ModeLayout& layout = *sys.layout;

  std::vector<SparseOp> a(m), b(np);
  for (int j = 0; j < m; ++j) a[j] = annihilation(layout, j);
  for (int i = 0; i < np; ++i) b[i] = annihilation(layout, m + i);
  const double g = config.coupling();
  SparseOp down(layout.dimension(), layout.dimension());  // sum b a† a† terms
  for (int j = 0; j < m; ++j)
    for (int l = j; l < m; ++l) {
      const double c = (j == l ? 0.5 : 1.0) * g;
      down += c * SparseOp(b[j + l] * SparseOp(adjoint(a[j]) * adjoint(a[l])));
    }
  SparseOp h = down + adjoint(down);
  for (int j = 0; j < m; ++j) h += config.gamma(j) * SparseOp(adjoint(a[j]) * a[j]);
  for (int i = 0; i < np; ++i) h += config.delta(i) * SparseOp(adjoint(b[i]) * b[i]);
  h.makeCompressed();
  sys.hamiltonian = std::move(h);
  return sys;
}

SparseOp generalized_number_operator(const TinyGridSystem& system) {
  const ModeLayout& layout = *system.layout;
  SparseOp n(layout.dimension(), layout.dimension());
  for (int j = 0; j < system.signal_modes(); ++j) n += number_operator(layout, j);
  for (int i = 0; i < system.pump_modes(); ++i) n += 2.0 * number_operator(layout, system.signal_modes() + i);
  n.makeCompressed();
  return n;
}

FockState oracle_initial_state(const TinyGridSystem& system, const PumpProfile& pump, double* truncation_loss) {
  if (pump.amplitudes.size() != system.pump_modes())
    throw std::invalid_argument("oracle: pump profile does not match grid");
  const auto cutoffs = system.layout->cutoffs();
  std::vector<VectorXc> modes;
  for (int j = 0; j < system.signal_modes(); ++j) {
    VectorXc v = VectorXc::Zero(cutoffs[j]);
    v[0] = 1.0;
    modes.push_back(v);
  }
  for (int i = 0; i < system.pump_modes(); ++i)
    modes.push_back(coherent_amplitudes(pump.amplitudes[i], cutoffs[system.signal_modes() + i]));
  return product_state(system.layout, modes, truncation_loss);
}

std::vector<OracleSample> oracle_evolve(const TinyGridSystem& system, const PumpProfile& pump,
                                        std::span<const double> sample_times, const OracleOptions& options,
                                        OracleDiagnostics* diagnostics) {
  OracleDiagnostics diag;
  const FockState psi0 = oracle_initial_state(system, pump, &diag.truncation_loss);
  const SparseOp& h = system.hamiltonian;
  HamiltonianApply apply = [&h](double, const VectorXc& psi, VectorXc& out) { out.noalias() = h * psi; };
  const auto states = evolve_schrodinger(psi0, apply, sample_times, options.schrodinger, &diag.schrodinger);

  const ModeLayout& layout = *system.layout;
  std::vector<SparseOp> numbers;
  for (std::size_t k = 0; k < layout.mode_count(); ++k) numbers.push_back(number_operator(layout, k));
  std::vector<OracleSample> out;
  out.reserve(states.size());
  for (const FockState& st : states) {
    OracleSample s{st, 0.0, 0.0, 0.0, Eigen::VectorXd(system.signal_modes()), fock_leakage(st).max()};
    for (int j = 0; j < system.signal_modes(); ++j) {
      const double n = expectation(numbers[j], st).real();
      s.signal_number += n;
      s.spectral_density[j] = n / system.config.ds;
    }
    for (int i = 0; i < system.pump_modes(); ++i)
      s.pump_number += expectation(numbers[system.signal_modes() + i], st).real();
    s.generalized_number = s.signal_number + 2.0 * s.pump_number;
    out.push_back(std::move(s));
  }
  if (diagnostics) *diagnostics = diag;
  return out;
}

QuadratureVariances waveform_quadratures(const TinyGridSystem& system, const FockState& state,
                                         const VectorXc& waveform) {
  if (waveform.size() != system.signal_modes()) throw std::invalid_argument("waveform length mismatch");
  const VectorXc w = waveform.normalized();
  const ModeLayout& layout = *state.layout;
  SparseOp f(layout.dimension(), layout.dimension());
  for (int j = 0; j < system.signal_modes(); ++j) f += w[j] * annihilation(layout, j);
  const VectorXc& psi = state.amplitudes;
  const VectorXc fpsi = f * psi;
  const cplx mean = psi.dot(fpsi);
  const double nf = fpsi.squaredNorm();  // <f† f>
  const cplx ff = psi.dot(f * fpsi);     // <f f>
  const cplx cov = ff - mean * mean;
  const double ncov = nf - std::norm(mean);
  return {0.5 * (2.0 * cov.real() + 2.0 * ncov + 1.0), 0.5 * (-2.0 * cov.real() + 2.0 * ncov + 1.0)};
}

}  // namespace gifsim
