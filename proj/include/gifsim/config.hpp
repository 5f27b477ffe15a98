#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gifsim {

/// Invalid configuration: unknown key, unparsable or out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunKind { single, multimode, nongaussian, oracle, units };

struct RunConfig {
  RunKind kind = RunKind::single;

  // [run]
  double t_final = 1.5;
  int samples = 30;                       // rows at t = k t_final / samples, k = 0..samples
  std::vector<std::string> models;        // empty selects every model of the kind
  std::vector<double> wigner_times;       // extra sample times with phase-space output

  // [single]
  double delta = -0.5;
  double beta0 = 1.0;
  int lab_signal_cutoff = 40;
  int lab_pump_cutoff = 20;
  int frame_signal_cutoff = 150;
  int frame_pump_cutoff = 16;

  // [grid]
  int m = 64;
  double s_min = -4.0, s_max = 4.0;
  double d0 = 0.0, d1 = 0.0, d2 = 0.3;

  // [pump]
  std::string pump_shape = "gaussian";
  double n_sh = 10.0;
  double width_tolerance = 1e-6;

  // [model]
  int m_fh = 2;
  int m_sh = 0;                           // 0 selects 2 m_fh - 1
  std::vector<int> signal_cutoffs{12, 8};
  std::vector<int> pump_cutoffs{6, 4, 3};
  int max_excitation = 0;                 // 0 disables the excitation budget
  double basis_cadence = 4e-3;
  double leakage_threshold = 1e-4;

  // [integrator]
  double rtol = 1e-10, atol = 1e-10;      // Gaussian frame
  double fock_rtol = 1e-8, fock_atol = 1e-8;
  double fixed_step = 0.0;                // > 0: fixed-step RK4 everywhere

  // [oracle]
  int oracle_max_excitation = 20;

  // [loss]
  double transmissivity = 1.0;

  // [wigner]
  double wigner_extent = 5.0;             // |x|, |p| <= extent
  int wigner_points = 101;
  bool hybrid = false;
  double hybrid_phi = 0.0, hybrid_theta = 0.0;  // in units of pi

  // [units]
  double lambda_nm = 456.5;
  double eta_w_cm2 = 330.0;
  double k2_fs2_mm = 1.0;
  double r = 0.18;
  double l_loss_m = 1.0;

  /// Sample times: the uniform grid merged with wigner_times.
  std::vector<double> sample_times() const;
  bool has_model(const std::string& name) const;
};

std::string to_string(RunKind kind);

/// Documented key list: (section.key, default value, description).
struct KeyInfo {
  std::string key;
  std::string default_value;
  std::string description;
};
std::vector<KeyInfo> config_keys();

/// Applies one `section.key = value` assignment. Throws ConfigError.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Reads an INI file ([section] headers, key = value, '#' comment lines).
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Parses "section.key=value".
std::pair<std::string, std::string> split_override(const std::string& assignment);

/// Built-in preset file, or ConfigError if unknown.
std::filesystem::path preset_path(const std::string& name);
std::vector<std::string> preset_names();

/// Defaults, then preset, then file, then overrides; validated.
RunConfig load_config(const std::optional<std::string>& preset, const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& overrides);

void validate(const RunConfig& config);

/// Every key with its resolved value, in table order.
std::vector<std::pair<std::string, std::string>> resolved_values(const RunConfig& config);

}  // namespace gifsim
