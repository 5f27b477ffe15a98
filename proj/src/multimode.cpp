#include "gifsim/multimode.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gifsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

WavegridConfig WavegridConfig::from_range(int m, double s_min, double s_max, double d0, double d1,
                                          double d2) {
  if (m < 1) throw std::invalid_argument("wavegrid: m must be >= 1");
  if (std::abs(s_min + s_max) > 1e-12 * std::max(1.0, std::abs(s_max)))
    throw std::invalid_argument("wavegrid: s-range must be symmetric about 0");
  WavegridConfig c;
  c.m = m;
  c.ds = m == 1 ? 1.0 : (s_max - s_min) / (m - 1);
  c.d0 = d0;
  c.d1 = d1;
  c.d2 = d2;
  c.validate();
  return c;
}

void WavegridConfig::validate() const {
  if (m < 1) throw std::invalid_argument("wavegrid: m must be >= 1");
  if (!(ds > 0.0) || !std::isfinite(ds)) throw std::invalid_argument("wavegrid: ds must be positive");
}

double WavegridConfig::gamma(int j) const {
  const double w = kTwoPi * signal_s(j);
  return 0.5 * w * w;
}

double WavegridConfig::delta(int k) const {
  const double w = kTwoPi * pump_s(k);
  return d0 + d1 * w + 0.5 * d2 * w * w;
}

double WavegridConfig::coupling() const { return std::sqrt(ds); }

PumpProfile make_gaussian_pump(const WavegridConfig& config, double n_sh0, double width_tolerance) {
  config.validate();
  if (n_sh0 < 0.0) throw std::invalid_argument("pump: photon number must be >= 0");
  const int n = config.pump_size();
  PumpProfile pump{VectorXc::Zero(n)};
  if (n_sh0 == 0.0) return pump;
  const double edge = std::abs(config.pump_s(0)) + 0.5 * config.ds;
  const double missing = std::erfc(std::numbers::pi * edge);
  if (missing > width_tolerance) {
    // erfc(π s) <= tol
    double need = edge;
    while (std::erfc(std::numbers::pi * need) > width_tolerance) need *= 1.05;
    std::ostringstream os;
    os << "pump grid too narrow: covers |s| <= " << edge << " and misses " << missing
       << " of the pump norm; need |s| >= " << need << " (signal range >= " << need / 2 << ")";
    throw std::invalid_argument(os.str());
  }
  const double scale = std::sqrt(n_sh0) * std::pow(std::numbers::pi, 0.25) * std::sqrt(config.ds);
  for (int k = 0; k < n; ++k) {
    const double x = std::numbers::pi * config.pump_s(k);
    pump.amplitudes[k] = scale * std::exp(-0.5 * x * x);
  }
  pump.amplitudes *= std::sqrt(n_sh0) / pump.amplitudes.norm();
  return pump;
}

MultimodeGifState initial_gif_state(const WavegridConfig& config, const PumpProfile& pump) {
  if (pump.amplitudes.size() != config.pump_size())
    throw std::invalid_argument("pump profile does not match the pump grid");
  return {0.0, pump.amplitudes, MatrixXc::Identity(config.m, config.m),
          MatrixXc::Zero(config.m, config.m)};
}

MultimodeGifSystem::MultimodeGifSystem(const WavegridConfig& config, PumpModel model)
    : config_(config), model_(model) {
  config_.validate();
  const int m = config_.m, np = config_.pump_size();
  packed_size_ = np + 2 * Eigen::Index(m) * m;
  gamma_.resize(m);
  delta_.resize(np);
  for (int j = 0; j < m; ++j) gamma_[j] = config_.gamma(j);
  for (int k = 0; k < np; ++k) delta_[k] = config_.delta(k);
  mismatch_.resize(m, m);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l) mismatch_(j, l) = gamma_[j] + gamma_[l] - delta_[j + l];
  phase_.resize(m, m);
  hankel_.resize(m, m);
  work_.resize(m, m);
}

VectorXc MultimodeGifSystem::pack(const MultimodeGifState& state) const {
  const int m = config_.m, np = config_.pump_size();
  const double t = state.time;
  VectorXc y(packed_size_);
  for (int k = 0; k < np; ++k) y[k] = std::exp(kI * (delta_[k] * t)) * state.beta[k];
  Eigen::Map<MatrixXc> c(y.data() + np, m, m), s(y.data() + np + m * m, m, m);
  for (int j = 0; j < m; ++j) {
    const cplx ph = std::exp(kI * (gamma_[j] * t));
    c.row(j) = ph * state.c.row(j);
    s.row(j) = ph * state.s.row(j);
  }
  return y;
}

MultimodeGifState MultimodeGifSystem::unpack(double t, const VectorXc& y) const {
  const int m = config_.m, np = config_.pump_size();
  MultimodeGifState out{t, VectorXc(np), MatrixXc(m, m), MatrixXc(m, m)};
  for (int k = 0; k < np; ++k) out.beta[k] = std::exp(-kI * (delta_[k] * t)) * y[k];
  Eigen::Map<const MatrixXc> c(y.data() + np, m, m), s(y.data() + np + m * m, m, m);
  for (int j = 0; j < m; ++j) {
    const cplx ph = std::exp(-kI * (gamma_[j] * t));
    out.c.row(j) = ph * c.row(j);
    out.s.row(j) = ph * s.row(j);
  }
  return out;
}

void MultimodeGifSystem::rhs(double t, const VectorXc& y, VectorXc& dy) const {
  const int m = config_.m, np = config_.pump_size();
  const double g = config_.coupling();
  dy.resize(y.size());
  Eigen::Map<const MatrixXc> c(y.data() + np, m, m), s(y.data() + np + m * m, m, m);
  Eigen::Map<MatrixXc> dc(dy.data() + np, m, m), ds(dy.data() + np + m * m, m, m);

  for (int l = 0; l < m; ++l)
    for (int j = 0; j < m; ++j) {
      phase_(j, l) = std::polar(1.0, mismatch_(j, l) * t);
      hankel_(j, l) = phase_(j, l) * y[j + l];
    }
  dc.noalias() = (-kI * g) * (hankel_ * s.conjugate());
  ds.noalias() = (-kI * g) * (hankel_ * c.conjugate());

  if (model_ == PumpModel::undepleted) {
    dy.head(np).setZero();
    return;
  }
  work_.noalias() = c * s.transpose();
  dy.head(np).setZero();
  for (int r = 0; r < m; ++r)
    for (int p = 0; p < m; ++p) dy[p + r] += std::conj(phase_(p, r)) * work_(p, r);
  dy.head(np) *= -0.5 * kI * g;
}

ConstraintDrift constraint_drift(const MultimodeGifState& state) {
  const Eigen::Index m = state.c.rows();
  ConstraintDrift d;
  const MatrixXc bog = state.c * state.c.adjoint() - state.s * state.s.adjoint() - MatrixXc::Identity(m, m);
  d.bogoliubov = bog.cwiseAbs().maxCoeff();
  const MatrixXc cs = state.c * state.s.transpose();
  d.symmetry = (cs - cs.transpose()).cwiseAbs().maxCoeff();
  return d;
}

void check_constraints(const MultimodeGifState& state, double tol, ConstraintDrift* drift) {
  const ConstraintDrift d = constraint_drift(state);
  if (drift) *drift = d;
  const double scale = std::max(1.0, state.c.cwiseAbs2().maxCoeff());
  if (d.max() > 10.0 * tol * scale) {
    std::ostringstream os;
    os << "at t=" << state.time << ": |CC†-SS†-I| = " << d.bogoliubov << ", |CSᵀ-(CSᵀ)ᵀ| = " << d.symmetry
       << " exceeds 10 x " << tol << " x " << scale;
    throw NumericalError("symplectic-constraint", os.str());
  }
}

std::vector<MultimodeGifState> integrate_gif_multimode(const WavegridConfig& config,
                                                       const PumpProfile& pump, PumpModel model,
                                                       std::span<const double> sample_times,
                                                       const GifOptions& options,
                                                       GifDiagnostics* diagnostics) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0) throw std::invalid_argument("sample times must be >= 0");
    if (i > 0 && sample_times[i] < sample_times[i - 1])
      throw std::invalid_argument("sample times must be non-decreasing");
  }
  const MultimodeGifSystem system(config, model);
  OdeSolver solver([&system](double t, const VectorXc& y, VectorXc& dy) { system.rhs(t, y, dy); }, 0.0,
                   system.pack(initial_gif_state(config, pump)), options.ode);
  std::vector<MultimodeGifState> out;
  out.reserve(sample_times.size());
  ConstraintDrift worst;
  for (double t : sample_times) {
    solver.advance_to(t);
    out.push_back(system.unpack(t, solver.state()));
    ConstraintDrift d;
    check_constraints(out.back(), options.constraint_tol, &d);
    worst.bogoliubov = std::max(worst.bogoliubov, d.bogoliubov);
    worst.symmetry = std::max(worst.symmetry, d.symmetry);
  }
  if (diagnostics) {
    diagnostics->max_drift = worst;
    diagnostics->stats = solver.stats();
  }
  return out;
}

double pump_photon_number(const MultimodeGifState& state) { return state.beta.squaredNorm(); }

double signal_photon_number(const MultimodeGifState& state) { return state.s.squaredNorm(); }

double manley_rowe(const MultimodeGifState& state) {
  return signal_photon_number(state) + 2.0 * pump_photon_number(state);
}

Eigen::VectorXd gaussian_spectral_density(const MultimodeGifState& state, const WavegridConfig& config) {
  return state.s.rowwise().squaredNorm() / config.ds;
}

double asymptotic_R_multimode(double t) {
  if (t < 0.0) throw std::invalid_argument("asymptotic_R_multimode: t must be >= 0");
  return 2.0 * std::pow(t, 1.5) / (3.0 * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace gifsim
