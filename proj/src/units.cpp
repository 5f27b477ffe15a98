#include "gifsim/units.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gifsim::units {

PhysicalParams PhysicalParams::from_lab_units(double lambda_nm, double eta_per_w_cm2, double k2_fs2_per_mm,
                                              double r, double l_loss_m) {
  PhysicalParams p{nm_to_m(lambda_nm), per_w_cm2_to_si(eta_per_w_cm2), fs2_per_mm_to_si(k2_fs2_per_mm), r,
                   l_loss_m};
  p.validate();
  return p;
}

void PhysicalParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("units: ") + name + " must be positive");
  };
  positive(lambda_sh, "lambda_sh");
  positive(eta, "eta");
  positive(k2_fh, "k2_fh");
  positive(r, "r");
  positive(l_loss, "l_loss");
}

NonlinearLength nonlinear_length(const PhysicalParams& params) {
  params.validate();
  const double omega = 2.0 * std::numbers::pi * kSpeedOfLight / params.lambda_sh;
  const double rate = kHbar * omega * params.eta;  // s / m^2
  NonlinearLength out;
  out.l_chi2 = std::cbrt(params.k2_fh / (rate * rate));
  out.l_eff = params.r * out.l_chi2;
  out.loss_over_l_eff = 1.0 - std::exp2(-out.l_eff / params.l_loss);
  return out;
}

WavelengthScaling wavelength_scaling(double lambda_ratio) {
  if (!(lambda_ratio > 0.0)) throw std::invalid_argument("units: wavelength ratio must be positive");
  return {std::pow(lambda_ratio, -4.0), std::pow(lambda_ratio, 10.0 / 3.0)};
}

}  // namespace gifsim::units
