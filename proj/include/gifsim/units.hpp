#pragma once

namespace gifsim::units {

inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s

/// Waveguide parameters in SI units.
struct PhysicalParams {
  double lambda_sh = 456.5e-9;  // pump carrier wavelength, m
  double eta = 330e4;           // normalized conversion efficiency, 1/(W m^2)
  double k2_fh = 1e-27;         // |k''| of the signal, s^2/m
  double r = 0.18;              // enhancement factor
  double l_loss = 1.0;          // 3 dB power attenuation length, m

  /// From nm, 1/(W cm^2), fs^2/mm, -, m.
  static PhysicalParams from_lab_units(double lambda_nm, double eta_per_w_cm2, double k2_fs2_per_mm, double r,
                                       double l_loss_m);
  void validate() const;
};

struct NonlinearLength {
  double l_chi2 = 0.0;           // m
  double l_eff = 0.0;            // r * l_chi2, m
  double loss_over_l_eff = 0.0;  // fractional power loss over l_eff
};

/// L = cbrt(|k''| / (hbar omega_sh eta)^2), omega_sh = 2 pi c / lambda_sh.
NonlinearLength nonlinear_length(const PhysicalParams& params);

/// Normalized propagation time t corresponds to distance t * l_chi2.
inline double physical_distance(double t, const NonlinearLength& scale) { return t * scale.l_chi2; }
inline double normalized_time(double z, const NonlinearLength& scale) { return z / scale.l_chi2; }

struct WavelengthScaling {
  double eta_scale = 1.0;
  double length_scale = 1.0;
};

/// Scale factors of eta (~lambda^-4) and l_chi2 (~lambda^(10/3)) when the pump
/// wavelength is multiplied by `lambda_ratio`.
WavelengthScaling wavelength_scaling(double lambda_ratio);

// Conversions of the common lab inputs to SI.
inline constexpr double nm_to_m(double v) { return v * 1e-9; }
inline constexpr double per_w_cm2_to_si(double v) { return v * 1e4; }
inline constexpr double fs2_per_mm_to_si(double v) { return v * 1e-27; }
inline constexpr double m_to_nm(double v) { return v * 1e9; }
inline constexpr double si_to_per_w_cm2(double v) { return v * 1e-4; }
inline constexpr double si_to_fs2_per_mm(double v) { return v * 1e27; }

}  // namespace gifsim::units
