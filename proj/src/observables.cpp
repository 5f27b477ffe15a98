#include "gifsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace gifsim {

ModeMoments mode_moments(const FockState& state, std::size_t mode) {
  const SparseOp a = annihilation(*state.layout, mode);
  const VectorXc& psi = state.amplitudes;
  const VectorXc apsi = a * psi;
  return {psi.dot(apsi), psi.dot(a * apsi), apsi.squaredNorm()};
}

ModeMoments squeeze_moments(const ModeMoments& m, double lambda) {
  const double c = std::cosh(lambda), s = std::sinh(lambda);
  ModeMoments out;
  out.mean = c * m.mean + s * std::conj(m.mean);
  out.pair = c * c * m.pair + s * s * std::conj(m.pair) + c * s * (2.0 * m.number + 1.0);
  out.number = c * c * m.number + s * s * (m.number + 1.0) + 2.0 * c * s * m.pair.real();
  return out;
}

QuadratureVariances quadrature_variances(const ModeMoments& m) {
  const double cov = (m.pair - m.mean * m.mean).real();
  const double n = m.number - std::norm(m.mean);
  return {cov + n + 0.5, -cov + n + 0.5};
}

double to_db(double variance) { return 10.0 * std::log10(variance / 0.5); }

SqueezingReport squeezing_report(const SupermodeBasis& basis, const FockState& state) {
  const int m_fh = basis.m_fh();
  if (state.layout->mode_count() != std::size_t(m_fh + basis.m_sh()))
    throw std::invalid_argument("squeezing_report: state does not match the supermode basis");
  SqueezingReport r;
  r.time = basis.time;
  r.lambdas = basis.lambdas.head(m_fh);
  for (int m = 0; m < m_fh; ++m) {
    const auto q = quadrature_variances(squeeze_moments(mode_moments(state, m), r.lambdas[m]));
    r.lab.push_back(q);
    r.p_db.push_back(to_db(q.p));
  }
  const std::size_t a0[] = {0};
  r.purity_f0 = purity(partial_trace(state, a0));
  std::vector<std::size_t> signal(m_fh);
  for (int m = 0; m < m_fh; ++m) signal[m] = m;
  r.entropy = basis.m_sh() > 0 ? entanglement_entropy(state, signal) : 0.0;
  return r;
}

double apply_discrete_loss(double variance, double transmissivity) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
    throw std::invalid_argument("transmissivity must lie in [0, 1]");
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
  return transmissivity * variance + 0.5 * (1.0 - transmissivity);
}

WignerGrid wigner_frame_transform(const WignerGrid& gif, double lambda) {
  WignerGrid lab = gif;
  const double sx = std::exp(lambda), sp = std::exp(-lambda);
  for (double& x : lab.x) x *= sx;
  for (double& p : lab.p) p *= sp;
  lab.frame = Frame::lab;
  return lab;
}

namespace {

// Index i and weight w with axis[i] <= v <= axis[i+1]; false outside.
bool locate(const std::vector<double>& axis, double v, std::size_t& i, double& w) {
  if (axis.size() < 2 || v < axis.front() || v > axis.back()) return false;
  i = std::size_t(std::upper_bound(axis.begin(), axis.end(), v) - axis.begin());
  i = std::min(std::max<std::size_t>(i, 1), axis.size() - 1) - 1;
  w = (v - axis[i]) / (axis[i + 1] - axis[i]);
  return true;
}

}  // namespace

WignerGrid resample(const WignerGrid& grid, const WignerSpec& spec) {
  if (spec.nx < 2 || spec.np < 2) throw std::invalid_argument("resample: grid needs >= 2 points per axis");
  WignerGrid out;
  out.frame = grid.frame;
  out.x.resize(spec.nx);
  out.p.resize(spec.np);
  for (int i = 0; i < spec.nx; ++i) out.x[i] = spec.x_min + (spec.x_max - spec.x_min) * i / (spec.nx - 1);
  for (int i = 0; i < spec.np; ++i) out.p[i] = spec.p_min + (spec.p_max - spec.p_min) * i / (spec.np - 1);
  out.values = Eigen::MatrixXd::Zero(spec.nx, spec.np);
  for (int i = 0; i < spec.nx; ++i) {
    std::size_t ix;
    double wx;
    if (!locate(grid.x, out.x[i], ix, wx)) continue;
    for (int j = 0; j < spec.np; ++j) {
      std::size_t ip;
      double wp;
      if (!locate(grid.p, out.p[j], ip, wp)) continue;
      out.values(i, j) = (1 - wx) * (1 - wp) * grid.values(ix, ip) + wx * (1 - wp) * grid.values(ix + 1, ip) +
                         (1 - wx) * wp * grid.values(ix, ip + 1) + wx * wp * grid.values(ix + 1, ip + 1);
    }
  }
  return out;
}

DensityMatrix hybrid_supermode_state(const FockState& state, std::size_t a_mode, std::size_t b_mode, double phi,
                                     double theta) {
  if (a_mode == b_mode) throw std::invalid_argument("hybrid mode needs two distinct modes");
  const std::size_t keep[] = {a_mode, b_mode};
  const DensityMatrix pair = partial_trace(state, keep);
  const int na = pair.cutoffs[0], nb = pair.cutoffs[1];
  // The mixing conserves n_a + n_b, so the hybrid mode needs na + nb - 1 levels.
  const int d = na + nb - 1;

  // U = exp(φ(e^{iθ} a† b - h.c.)), so that U† a U = cos φ a + e^{iθ} sin φ b.
  // Sector n holds the states (n - r, r), r = 0..n; with -iK Hermitian.
  std::vector<MatrixXc> sector(d);
  const cplx phase = std::polar(1.0, theta);
  for (int n = 0; n < d; ++n) {
    MatrixXc h = MatrixXc::Zero(n + 1, n + 1);
    for (int j = 1; j <= n; ++j) {
      // a† b |n-j, j> = sqrt((n-j+1) j) |n-j+1, j-1>
      const cplx k = phi * phase * std::sqrt(double(n - j + 1) * j);
      h(j - 1, j) += cplx(0, -1) * k;
      h(j, j - 1) += cplx(0, -1) * -std::conj(k);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXc> eig(h);
    const VectorXc e = (cplx(0, 1) * eig.eigenvalues().cast<cplx>()).array().exp();
    sector[n] = eig.eigenvectors() * e.asDiagonal() * eig.eigenvectors().adjoint();
  }

  // U rho U† block by block, tracing out the second mode on the fly. The
  // full two-mode matrix over d levels each does not fit in memory.
  const auto entry = [&](int n, int r, int m, int c) {
    const int i = n - r, k = m - c;
    if (i >= na || r >= nb || k >= na || c >= nb) return cplx{};
    return pair.rho(i * nb + r, k * nb + c);
  };
  DensityMatrix out{MatrixXc::Zero(d, d), {d}};
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m) {
      MatrixXc block(n + 1, m + 1);
      bool any = false;
      for (int r = 0; r <= n; ++r)
        for (int c = 0; c <= m; ++c) {
          block(r, c) = entry(n, r, m, c);
          any = any || block(r, c) != cplx{};
        }
      if (!any) continue;
      const MatrixXc mixed = sector[n] * block * sector[m].adjoint();
      for (int j = 0; j <= std::min(n, m); ++j) out.rho(n - j, m - j) += mixed(j, j);
    }
  return out;
}

DensityMatrix hybrid_supermode_state(const NongaussianSample& sample, double phi, double theta) {
  if (sample.basis.m_sh() < 1) throw std::invalid_argument("hybrid mode needs a pump supermode");
  return hybrid_supermode_state(sample.state, 0, std::size_t(sample.basis.m_fh()), phi, theta);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need two equal series of length >= 2");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace gifsim
