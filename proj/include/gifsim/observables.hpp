#pragma once

#include <span>
#include <vector>

#include "gifsim/supermodes.hpp"

namespace gifsim {

/// First and second moments of one mode c: <c>, <c c>, <c† c>.
struct ModeMoments {
  cplx mean{};
  cplx pair{};
  double number = 0.0;
};

ModeMoments mode_moments(const FockState& state, std::size_t mode);

/// Moments of cosh(λ) c + sinh(λ) c† given those of c.
ModeMoments squeeze_moments(const ModeMoments& m, double lambda);

/// Centered variances, X = (c + c†)/sqrt 2, P = (c - c†)/(i sqrt 2). Vacuum: 1/2.
struct QuadratureVariances {
  double x = 0.5;
  double p = 0.5;
};

QuadratureVariances quadrature_variances(const ModeMoments& m);

/// Variance relative to vacuum, in dB (negative means squeezed).
double to_db(double variance);

struct SqueezingReport {
  double time = 0.0;
  Eigen::VectorXd lambdas;                 // per signal supermode
  std::vector<QuadratureVariances> lab;    // <X²(f_m)>, <P²(f_m)>
  std::vector<double> p_db;                // to_db(lab[m].p)
  double purity_f0 = 1.0;
  double entropy = 0.0;                    // signal | pump, nats
};

/// Lab-frame quadratures of the squeezing supermodes from the interaction-frame
/// state over [a_0 .., b_0 ..].
SqueezingReport squeezing_report(const SupermodeBasis& basis, const FockState& state);
inline SqueezingReport squeezing_report(const NongaussianSample& sample) {
  return squeezing_report(sample.basis, sample.state);
}

/// Beam-splitter loss on a quadrature variance: η V + (1 - η)/2.
double apply_discrete_loss(double variance, double transmissivity);

/// Interaction-frame portrait of supermode m mapped to the lab frame by
/// x' = e^{λ} x, p' = e^{-λ} p (values are carried over unchanged).
WignerGrid wigner_frame_transform(const WignerGrid& gif, double lambda);

/// Bilinear resampling onto a new rectangular grid; zero outside the source.
WignerGrid resample(const WignerGrid& grid, const WignerSpec& spec);

/// Reduced state of the mode cos φ a + e^{iθ} sin φ b, a and b given by their
/// indices in the state layout.
DensityMatrix hybrid_supermode_state(const FockState& state, std::size_t a_mode, std::size_t b_mode,
                                     double phi, double theta);
/// a_0 with b_0 of a supermode state.
DensityMatrix hybrid_supermode_state(const NongaussianSample& sample, double phi, double theta);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace gifsim
