#include "gifsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#ifndef GIFSIM_PRESET_DIR
#define GIFSIM_PRESET_DIR "presets"
#endif

namespace gifsim {

namespace {

using Tokens = std::vector<std::string>;

std::string format_double(double v) {
  // shortest form that reads back to the same value
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::string& single_token(const std::string& key, const Tokens& tokens) {
  if (tokens.size() != 1) throw ConfigError(key + ": expected a single value");
  return tokens.front();
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(key + ": not a finite number: '" + s + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError(key + ": not an integer: '" + s + "'");
  return v;
}

template <class T>
struct Codec;

template <>
struct Codec<double> {
  static double parse(const std::string& key, const Tokens& t) { return parse_double(key, single_token(key, t)); }
  static std::string format(double v) { return format_double(v); }
};

template <>
struct Codec<int> {
  static int parse(const std::string& key, const Tokens& t) { return parse_int(key, single_token(key, t)); }
  static std::string format(int v) { return std::to_string(v); }
};

template <>
struct Codec<bool> {
  static bool parse(const std::string& key, const Tokens& t) {
    const std::string& s = single_token(key, t);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
  }
  static std::string format(bool v) { return v ? "true" : "false"; }
};

template <>
struct Codec<std::string> {
  static std::string parse(const std::string& key, const Tokens& t) { return single_token(key, t); }
  static std::string format(const std::string& v) { return v; }
};

template <class T>
struct Codec<std::vector<T>> {
  static std::vector<T> parse(const std::string& key, const Tokens& t) {
    std::vector<T> out;
    for (const auto& s : t) out.push_back(Codec<T>::parse(key, Tokens{s}));
    return out;
  }
  static std::string format(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + Codec<T>::format(v[i]);
    return s;
  }
};

const std::vector<std::pair<RunKind, std::string>>& kind_names() {
  static const std::vector<std::pair<RunKind, std::string>> names{{RunKind::single, "single"},
                                                                  {RunKind::multimode, "multimode"},
                                                                  {RunKind::nongaussian, "nongaussian"},
                                                                  {RunKind::oracle, "oracle"},
                                                                  {RunKind::units, "units"}};
  return names;
}

template <>
struct Codec<RunKind> {
  static RunKind parse(const std::string& key, const Tokens& t) {
    const std::string& s = single_token(key, t);
    for (const auto& [k, name] : kind_names())
      if (name == s) return k;
    throw ConfigError(key + ": unknown run kind '" + s + "' (single, multimode, nongaussian, oracle, units)");
  }
  static std::string format(RunKind k) { return to_string(k); }
};

struct Field {
  std::string key;
  std::string description;
  std::function<void(RunConfig&, const Tokens&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

template <class T>
Field field(std::string key, T RunConfig::*member, std::string description) {
  const std::string k = key;
  return {std::move(key), std::move(description),
          [k, member](RunConfig& c, const Tokens& t) { c.*member = Codec<T>::parse(k, t); },
          [member](const RunConfig& c) { return Codec<T>::format(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      field("run.kind", &RunConfig::kind, "single | multimode | nongaussian | oracle | units"),
      field("run.t_final", &RunConfig::t_final, "final normalized time"),
      field("run.samples", &RunConfig::samples, "number of uniform intervals up to t_final"),
      field("run.models", &RunConfig::models, "models to run (empty: all of the kind)"),
      field("run.wigner_times", &RunConfig::wigner_times, "times with phase-space output"),
      field("single.delta", &RunConfig::delta, "phase mismatch δ"),
      field("single.beta0", &RunConfig::beta0, "initial pump amplitude β(0)"),
      field("single.lab_signal_cutoff", &RunConfig::lab_signal_cutoff, "signal levels, lab-frame model"),
      field("single.lab_pump_cutoff", &RunConfig::lab_pump_cutoff, "pump levels, lab-frame model"),
      field("single.frame_signal_cutoff", &RunConfig::frame_signal_cutoff, "signal levels, frame model"),
      field("single.frame_pump_cutoff", &RunConfig::frame_pump_cutoff, "pump levels, frame model"),
      field("grid.m", &RunConfig::m, "signal grid points"),
      field("grid.s_min", &RunConfig::s_min, "lowest signal wavenumber"),
      field("grid.s_max", &RunConfig::s_max, "highest signal wavenumber"),
      field("grid.d0", &RunConfig::d0, "pump mismatch, constant term"),
      field("grid.d1", &RunConfig::d1, "pump mismatch, group-velocity term"),
      field("grid.d2", &RunConfig::d2, "pump mismatch, dispersion term"),
      field("pump.shape", &RunConfig::pump_shape, "gaussian"),
      field("pump.n_sh", &RunConfig::n_sh, "initial pump photon number"),
      field("pump.width_tolerance", &RunConfig::width_tolerance, "allowed pump-spectrum tail outside the grid"),
      field("model.m_fh", &RunConfig::m_fh, "signal supermodes"),
      field("model.m_sh", &RunConfig::m_sh, "pump supermodes (0: 2 m_fh - 1)"),
      field("model.signal_cutoffs", &RunConfig::signal_cutoffs, "Fock levels per signal supermode"),
      field("model.pump_cutoffs", &RunConfig::pump_cutoffs, "Fock levels per pump supermode"),
      field("model.max_excitation", &RunConfig::max_excitation, "budget on n_a + 2 n_b (0: none)"),
      field("model.basis_cadence", &RunConfig::basis_cadence, "time between supermode refreshes"),
      field("model.leakage_threshold", &RunConfig::leakage_threshold, "Fock leakage warning level"),
      field("integrator.rtol", &RunConfig::rtol, "relative tolerance, Gaussian frame"),
      field("integrator.atol", &RunConfig::atol, "absolute tolerance, Gaussian frame"),
      field("integrator.fock_rtol", &RunConfig::fock_rtol, "relative tolerance, Fock states"),
      field("integrator.fock_atol", &RunConfig::fock_atol, "absolute tolerance, Fock states"),
      field("integrator.fixed_step", &RunConfig::fixed_step, "RK4 step for every integrator (0: adaptive)"),
      field("oracle.max_excitation", &RunConfig::oracle_max_excitation, "budget on n_a + 2 n_b"),
      field("loss.transmissivity", &RunConfig::transmissivity, "end-of-waveguide transmissivity"),
      field("wigner.extent", &RunConfig::wigner_extent, "portrait half-width in x and p"),
      field("wigner.points", &RunConfig::wigner_points, "points per axis"),
      field("wigner.hybrid", &RunConfig::hybrid, "also write the hybrid signal-pump mode"),
      field("wigner.hybrid_phi", &RunConfig::hybrid_phi, "hybrid mixing angle / pi"),
      field("wigner.hybrid_theta", &RunConfig::hybrid_theta, "hybrid phase / pi"),
      field("units.lambda_nm", &RunConfig::lambda_nm, "pump wavelength, nm"),
      field("units.eta_w_cm2", &RunConfig::eta_w_cm2, "conversion efficiency, 1/(W cm^2)"),
      field("units.k2_fs2_mm", &RunConfig::k2_fs2_mm, "signal |k''|, fs^2/mm"),
      field("units.r", &RunConfig::r, "enhancement factor"),
      field("units.l_loss_m", &RunConfig::l_loss_m, "3 dB loss length, m"),
  };
  return table;
}

Tokens split_list(const std::string& value) {
  Tokens out;
  std::string cur;
  for (char ch : value) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void set_tokens(RunConfig& config, const std::string& key, const Tokens& tokens) {
  for (const Field& f : fields()) {
    if (f.key != key) continue;
    f.parse(config, tokens);
    return;
  }
  throw ConfigError("unknown key '" + key + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string to_string(RunKind kind) {
  for (const auto& [k, name] : kind_names())
    if (k == kind) return name;
  return "?";
}

std::vector<double> RunConfig::sample_times() const {
  std::vector<double> t;
  for (int k = 0; k <= samples; ++k) t.push_back(t_final * k / samples);
  for (double w : wigner_times) t.push_back(w);
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double v : t)
    if (out.empty() || v - out.back() > 1e-12 * std::max(1.0, t_final)) out.push_back(v);
  return out;
}

bool RunConfig::has_model(const std::string& name) const {
  return models.empty() || std::find(models.begin(), models.end(), name) != models.end();
}

std::vector<KeyInfo> config_keys() {
  const RunConfig defaults;
  std::vector<KeyInfo> out;
  for (const Field& f : fields()) out.push_back({f.key, f.format(defaults), f.description});
  return out;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  set_tokens(config, key, split_list(value));
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  CLI::ConfigINI ini;
  ini.comment('#');
  std::vector<CLI::ConfigItem> items;
  try {
    items = ini.from_file(path.string());
  } catch (const CLI::Error& e) {
    throw ConfigError("cannot read config '" + path.string() + "': " + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    Tokens tokens;
    for (const auto& in : item.inputs)
      for (auto& t : split_list(in)) tokens.push_back(t);
    try {
      set_tokens(config, item.fullname(), tokens);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
}

std::pair<std::string, std::string> split_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  std::string key = assignment.substr(0, eq);
  key.erase(key.find_last_not_of(" \t") + 1);
  return {key, assignment.substr(eq + 1)};
}

std::filesystem::path preset_path(const std::string& name) {
  const char* env = std::getenv("GIFSIM_PRESET_DIR");
  const std::filesystem::path dir = env ? env : GIFSIM_PRESET_DIR;
  const auto path = dir / (name + ".ini");
  if (!std::filesystem::exists(path)) {
    std::string known;
    for (const auto& p : preset_names()) known += " " + p;
    throw ConfigError("unknown preset '" + name + "' (known:" + known + ")");
  }
  return path;
}

std::vector<std::string> preset_names() {
  const char* env = std::getenv("GIFSIM_PRESET_DIR");
  const std::filesystem::path dir = env ? env : GIFSIM_PRESET_DIR;
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.path().extension() == ".ini") out.push_back(entry.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

RunConfig load_config(const std::optional<std::string>& preset, const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& overrides) {
  RunConfig config;
  if (preset) apply_config_file(config, preset_path(*preset));
  if (file) apply_config_file(config, *file);
  for (const auto& o : overrides) {
    const auto [key, value] = split_override(o);
    set_config_value(config, key, value);
  }
  validate(config);
  return config;
}

void validate(const RunConfig& c) {
  require(c.t_final > 0.0, "run.t_final must be positive");
  require(c.samples >= 1, "run.samples must be >= 1");
  for (double w : c.wigner_times) require(w >= 0.0 && w <= c.t_final, "run.wigner_times must lie in [0, t_final]");

  static const std::vector<std::pair<RunKind, std::set<std::string>>> allowed{
      {RunKind::single, {"full", "frame", "gif", "undepleted"}},
      {RunKind::multimode, {"gif", "undepleted"}},
      {RunKind::nongaussian, {"nongaussian", "gif", "undepleted"}},
      {RunKind::oracle, {"oracle", "nongaussian"}},
      {RunKind::units, {}}};
  for (const auto& [kind, names] : allowed) {
    if (kind != c.kind) continue;
    for (const auto& m : c.models)
      require(names.count(m) > 0, "run.models: '" + m + "' is not available for kind " + to_string(c.kind));
  }

  require(c.lab_signal_cutoff >= 2 && c.lab_pump_cutoff >= 2 && c.frame_signal_cutoff >= 2 &&
              c.frame_pump_cutoff >= 2,
          "single.*_cutoff must be >= 2");
  require(c.beta0 >= 0.0, "single.beta0 must be >= 0");

  require(c.m >= 1, "grid.m must be >= 1");
  require(c.s_max > c.s_min || c.m == 1, "grid.s_max must exceed grid.s_min");
  require(std::abs(c.s_min + c.s_max) <= 1e-12 * std::max(1.0, std::abs(c.s_max)),
          "grid.s_min must equal -grid.s_max");
  require(c.pump_shape == "gaussian", "pump.shape: only 'gaussian' is supported");
  require(c.n_sh >= 0.0, "pump.n_sh must be >= 0");
  require(c.width_tolerance > 0.0 && c.width_tolerance < 1.0, "pump.width_tolerance must lie in (0, 1)");

  require(c.m_fh >= 1 && c.m_fh <= c.m, "model.m_fh must lie in [1, grid.m]");
  require(c.m_sh >= 0 && c.m_sh <= 2 * c.m - 1, "model.m_sh must lie in [0, 2 grid.m - 1]");
  const int m_sh = c.m_sh > 0 ? c.m_sh : 2 * c.m_fh - 1;
  require(c.signal_cutoffs.size() == 1 || int(c.signal_cutoffs.size()) == c.m_fh,
          "model.signal_cutoffs needs 1 or m_fh entries");
  require(c.pump_cutoffs.size() == 1 || int(c.pump_cutoffs.size()) == m_sh,
          "model.pump_cutoffs needs 1 or m_sh entries");
  for (int v : c.signal_cutoffs) require(v >= 1, "model.signal_cutoffs must be >= 1");
  for (int v : c.pump_cutoffs) require(v >= 1, "model.pump_cutoffs must be >= 1");
  require(c.max_excitation >= 0, "model.max_excitation must be >= 0");
  require(c.basis_cadence > 0.0, "model.basis_cadence must be positive");
  require(c.leakage_threshold > 0.0, "model.leakage_threshold must be positive");

  require(c.rtol > 0.0 && c.atol > 0.0 && c.fock_rtol > 0.0 && c.fock_atol > 0.0,
          "integrator tolerances must be positive");
  require(c.fixed_step >= 0.0, "integrator.fixed_step must be >= 0");

  if (c.kind == RunKind::oracle) require(c.m <= 3, "oracle runs need grid.m <= 3");
  require(c.oracle_max_excitation >= 1, "oracle.max_excitation must be >= 1");
  require(c.transmissivity >= 0.0 && c.transmissivity <= 1.0, "loss.transmissivity must lie in [0, 1]");
  require(c.wigner_extent > 0.0, "wigner.extent must be positive");
  require(c.wigner_points >= 2, "wigner.points must be >= 2");
  require(c.lambda_nm > 0.0 && c.eta_w_cm2 > 0.0 && c.k2_fs2_mm > 0.0 && c.r > 0.0 && c.l_loss_m > 0.0,
          "units.* must be positive");
}

std::vector<std::pair<std::string, std::string>> resolved_values(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.format(config));
  return out;
}

}  // namespace gifsim
