#include "gifsim/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "gifsim/observables.hpp"
#include "gifsim/oracle.hpp"
#include "gifsim/single_mode.hpp"
#include "gifsim/units.hpp"

namespace gifsim {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// Column-oriented CSV: a header, then one row per record.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(const std::vector<double>& values) {
    if (values.size() != header_.size()) throw std::logic_error("csv row width mismatch");
    rows_.push_back(values);
  }
  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path.string());
    for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << num(r[i]);
      out << '\n';
    }
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

void write_wigner(const fs::path& path, const WignerGrid& g, const std::string& mode, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out << "# gifsim wigner 1\n";
  out << "# frame " << (g.frame == Frame::lab ? "lab" : "gif") << "\n";
  out << "# mode " << mode << "\n";
  out << "# time " << num(t) << "\n";
  out << "# x " << num(g.x.front()) << " " << num(g.x.back()) << " " << g.x.size() << "\n";
  out << "# p " << num(g.p.front()) << " " << num(g.p.back()) << " " << g.p.size() << "\n";
  for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.values.cols(); ++j) out << (j ? " " : "") << num(g.values(i, j));
    out << '\n';
  }
}

bool is_wigner_time(const RunConfig& c, double t) {
  for (double w : c.wigner_times)
    if (std::abs(w - t) <= 1e-12 * std::max(1.0, c.t_final)) return true;
  return false;
}

std::string time_tag(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return buf;
}

OdeOptions ode_options(const RunConfig& c, double rtol, double atol) {
  OdeOptions o;
  o.rtol = rtol;
  o.atol = atol;
  if (c.fixed_step > 0.0) o.fixed_step = c.fixed_step;
  return o;
}

WignerSpec wigner_spec(const RunConfig& c) {
  return {-c.wigner_extent, c.wigner_extent, -c.wigner_extent, c.wigner_extent, c.wigner_points, c.wigner_points};
}

WavegridConfig grid_of(const RunConfig& c) {
  return WavegridConfig::from_range(c.m, c.s_min, c.s_max, c.d0, c.d1, c.d2);
}

std::vector<int> expand(const std::vector<int>& v, int n) {
  return v.size() == 1 ? std::vector<int>(std::size_t(n), v.front()) : v;
}

NongaussianOptions nongaussian_options(const RunConfig& c) {
  NongaussianOptions o;
  o.decompose.m_fh = c.m_fh;
  o.decompose.m_sh = c.m_sh;
  const int m_sh = c.m_sh > 0 ? c.m_sh : 2 * c.m_fh - 1;
  o.signal_cutoffs = expand(c.signal_cutoffs, c.m_fh);
  o.pump_cutoffs = expand(c.pump_cutoffs, m_sh);
  if (c.max_excitation > 0) o.max_excitation = c.max_excitation;
  o.basis_cadence = c.basis_cadence;
  o.leakage_threshold = c.leakage_threshold;
  o.gif.ode = ode_options(c, c.rtol, c.atol);
  o.fock.ode = ode_options(c, c.fock_rtol, c.fock_atol);
  return o;
}

json drift_json(const ConstraintDrift& d) { return {{"bogoliubov", d.bogoliubov}, {"symmetry", d.symmetry}}; }
json stats_json(const OdeStats& s) {
  return {{"accepted", s.accepted}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
}

struct Context {
  const RunConfig& config;
  fs::path dir;
  RunOutcome outcome;
  json diagnostics = json::object();

  void add_file(const std::string& name) { outcome.files.emplace_back(name); }
  void warn(const std::string& w) { outcome.warnings.push_back(w); }
  void check_leakage(const std::string& model, double t, double leakage) {
    if (leakage > config.leakage_threshold) {
      std::ostringstream os;
      os << model << ": Fock leakage " << leakage << " above " << config.leakage_threshold << " at t=" << t;
      warn(os.str());
    }
  }
};

// ---------------------------------------------------------------------------

void run_single(Context& ctx) {
  const RunConfig& c = ctx.config;
  SingleModeParams params{c.delta, c.beta0, c.sample_times()};
  params.validate();
  const auto& times = params.sample_times;
  const double n0 = c.beta0 * c.beta0;
  const OdeOptions gif_ode = ode_options(c, c.rtol, c.atol);
  SchrodingerOptions fock;
  fock.ode = ode_options(c, c.fock_rtol, c.fock_atol);

  std::vector<std::string> header{"t"};
  const bool full = c.has_model("full"), frame = c.has_model("frame"), gif = c.has_model("gif"),
             und = c.has_model("undepleted");
  if (full) header.insert(header.end(), {"R_full", "N_signal_full", "X_var_full", "P_var_full", "leakage_full"});
  if (frame)
    header.insert(header.end(), {"R_frame", "N_signal_frame", "X_var_frame", "P_var_frame", "leakage_frame"});
  if (gif) header.insert(header.end(), {"R_gif", "N_signal_gif", "X_var_gif", "P_var_gif", "manley_rowe_error_gif"});
  if (und) header.insert(header.end(), {"R_undepleted_implied", "N_signal_undepleted"});
  header.push_back("R_asymptote");
  Table table(header);

  std::vector<FockState> lab;
  std::vector<GifFrameSample> framed;
  std::vector<SingleGifState> dep, undep;
  if (full) {
    SchrodingerDiagnostics d;
    lab = evolve_lab_full(params, c.lab_signal_cutoff, c.lab_pump_cutoff, fock, &d);
    ctx.diagnostics["full"] = {{"max_leakage", d.max_leakage}, {"norm_drift", d.max_norm_drift},
                               {"ode", stats_json(d.stats)}};
  }
  if (frame) {
    SchrodingerDiagnostics d;
    framed = evolve_gif_frame_single(params, c.frame_signal_cutoff, c.frame_pump_cutoff, fock, &d);
    ctx.diagnostics["frame"] = {{"max_leakage", d.max_leakage}, {"norm_drift", d.max_norm_drift},
                                {"ode", stats_json(d.stats)}};
  }
  if (gif) dep = integrate_gif_single(params, PumpModel::depleted, gif_ode);
  if (und) undep = integrate_gif_single(params, PumpModel::undepleted, gif_ode);

  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    std::vector<double> r{t};
    if (full) {
      const LabMoments m = lab_moments(lab[i]);
      const double leak = fock_leakage(lab[i]).max();
      ctx.check_leakage("full", t, leak);
      r.insert(r.end(), {depletion_ratio(m.pump_number, n0), m.signal_number, m.signal_x_var, m.signal_p_var, leak});
    }
    if (frame) {
      const LabMoments m = reconstruct_lab_moments(framed[i].gif, c.delta, framed[i].state);
      const double leak = fock_leakage(framed[i].state).max();
      ctx.check_leakage("frame", t, leak);
      r.insert(r.end(), {depletion_ratio(m.pump_number, n0), m.signal_number, m.signal_x_var, m.signal_p_var, leak});
    }
    if (gif) {
      const LabMoments m = gaussian_lab_moments(dep[i]);
      r.insert(r.end(), {depletion_ratio(m.pump_number, n0), m.signal_number, m.signal_x_var, m.signal_p_var,
                         n0 > 0 ? manley_rowe_single(dep[i]) / (2 * n0) - 1 : 0.0});
    }
    if (und) {
      const double ns = std::norm(undep[i].s);
      r.insert(r.end(), {n0 > 0 ? ns / (2 * n0) : 0.0, ns});
    }
    r.push_back(asymptotic_R_single(t));
    table.row(r);

    if (is_wigner_time(c, t)) {
      const std::size_t keep[] = {0};
      if (full) {
        WignerGrid g = wigner_single_mode(partial_trace(lab[i], keep), wigner_spec(c));
        g.frame = Frame::lab;
        const std::string name = "wigner_lab_signal_" + time_tag(i) + ".txt";
        write_wigner(ctx.dir / name, g, "signal", t);
        ctx.add_file(name);
      }
      if (frame) {
        WignerGrid g = wigner_single_mode(partial_trace(framed[i].state, keep), wigner_spec(c));
        g.frame = Frame::gif;
        const std::string name = "wigner_gif_signal_" + time_tag(i) + ".txt";
        write_wigner(ctx.dir / name, g, "signal", t);
        ctx.add_file(name);
      }
    }
  }
  table.write(ctx.dir / "series.csv");
  ctx.add_file("series.csv");
}

// ---------------------------------------------------------------------------

void write_gaussian_portraits(Context& ctx, double lambda, double t, std::size_t index) {
  // Vacuum interaction-frame state of f_0: W is the vacuum Gaussian.
  const LayoutPtr one = make_layout({1});
  const std::size_t keep[] = {0};
  WignerGrid g = wigner_single_mode(partial_trace(vacuum_state(one), keep), wigner_spec(ctx.config));
  const std::string gif_name = "wigner_gif_f0_gaussian_" + time_tag(index) + ".txt";
  write_wigner(ctx.dir / gif_name, g, "f0", t);
  const std::string lab_name = "wigner_lab_f0_gaussian_" + time_tag(index) + ".txt";
  write_wigner(ctx.dir / lab_name, wigner_frame_transform(g, lambda), "f0", t);
  ctx.add_file(gif_name);
  ctx.add_file(lab_name);
}

void run_multimode(Context& ctx) {
  const RunConfig& c = ctx.config;
  const WavegridConfig grid = grid_of(c);
  const PumpProfile pump = make_gaussian_pump(grid, c.n_sh, c.width_tolerance);
  const std::vector<double> times = c.sample_times();
  const double n0 = pump.photon_number();
  GifOptions gopt;
  gopt.ode = ode_options(c, c.rtol, c.atol);
  const bool und = c.has_model("undepleted");

  GifDiagnostics gd;
  const auto dep = integrate_gif_multimode(grid, pump, PumpModel::depleted, times, gopt, &gd);
  std::vector<MultimodeGifState> undep;
  GifDiagnostics ud;
  if (und) undep = integrate_gif_multimode(grid, pump, PumpModel::undepleted, times, gopt, &ud);
  ctx.diagnostics["gif"] = {{"max_drift", drift_json(gd.max_drift)}, {"ode", stats_json(gd.stats)}};
  if (und) ctx.diagnostics["undepleted"] = {{"max_drift", drift_json(ud.max_drift)}, {"ode", stats_json(ud.stats)}};

  std::vector<std::string> header{"t", "R_gif"};
  if (und) header.push_back("R_undepleted_implied");
  header.insert(header.end(), {"R_asymptote", "N_signal_gif"});
  if (und) header.push_back("N_signal_undepleted");
  header.insert(header.end(), {"manley_rowe_error_gif", "drift_bogoliubov", "drift_symmetry"});
  for (int m = 0; m < c.m_fh; ++m) header.push_back("lambda_" + std::to_string(m));
  header.insert(header.end(), {"P_f0_gif", "P_f0_gif_lossy", "P_db_gif", "P_db_gif_lossy", "peak_density_gif"});
  if (und) header.push_back("peak_density_undepleted");
  Table table(header);
  Table spectrum(und ? std::vector<std::string>{"t", "s", "density_gif", "density_undepleted"}
                     : std::vector<std::string>{"t", "s", "density_gif"});

  DecomposeOptions dopt;
  dopt.m_fh = c.m_fh;
  dopt.m_sh = c.m_sh;
  std::optional<SupermodeBasis> basis;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    basis = i == 0 ? seed_supermodes(grid, pump, dopt)
                   : decompose_supermodes(dep[i], grid, dopt, basis ? &*basis : nullptr);
    const ConstraintDrift drift = constraint_drift(dep[i]);
    const Eigen::VectorXd dens = gaussian_spectral_density(dep[i], grid);
    std::vector<double> r{t, n0 > 0 ? 1.0 - pump_photon_number(dep[i]) / n0 : 0.0};
    Eigen::VectorXd dens_u;
    if (und) {
      dens_u = gaussian_spectral_density(undep[i], grid);
      r.push_back(n0 > 0 ? signal_photon_number(undep[i]) / (2 * n0) : 0.0);
    }
    r.insert(r.end(), {asymptotic_R_multimode(t), signal_photon_number(dep[i])});
    if (und) r.push_back(signal_photon_number(undep[i]));
    r.insert(r.end(), {n0 > 0 ? manley_rowe(dep[i]) / (2 * n0) - 1 : 0.0, drift.bogoliubov, drift.symmetry});
    for (int m = 0; m < c.m_fh; ++m) r.push_back(basis->lambdas[m]);
    const double p = 0.5 * std::exp(-2.0 * basis->lambdas[0]);
    const double pl = apply_discrete_loss(p, c.transmissivity);
    r.insert(r.end(), {p, pl, to_db(p), to_db(pl), dens.maxCoeff()});
    if (und) r.push_back(dens_u.maxCoeff());
    table.row(r);
    for (int j = 0; j < grid.m; ++j) {
      if (und)
        spectrum.row({t, grid.signal_s(j), dens[j], dens_u[j]});
      else
        spectrum.row({t, grid.signal_s(j), dens[j]});
    }
    if (is_wigner_time(c, t)) write_gaussian_portraits(ctx, basis->lambdas[0], t, i);
  }
  table.write(ctx.dir / "series.csv");
  spectrum.write(ctx.dir / "spectrum.csv");
  ctx.add_file("series.csv");
  ctx.add_file("spectrum.csv");
}

// ---------------------------------------------------------------------------

void run_nongaussian(Context& ctx) {
  const RunConfig& c = ctx.config;
  const WavegridConfig grid = grid_of(c);
  const PumpProfile pump = make_gaussian_pump(grid, c.n_sh, c.width_tolerance);
  const std::vector<double> times = c.sample_times();
  const double n0 = pump.photon_number();
  const bool und = c.has_model("undepleted");

  NongaussianDiagnostics nd;
  const auto ng = evolve_nongaussian(grid, pump, times, nongaussian_options(c), &nd);
  for (const auto& w : nd.warnings) ctx.warn(w);
  if (nd.suppressed_warnings > 0) ctx.warn(std::to_string(nd.suppressed_warnings) + " further basis warnings");
  ctx.diagnostics["nongaussian"] = {{"dimension", ng.front().state.layout->dimension()},
                                    {"max_leakage", nd.max_leakage},
                                    {"leakage_flagged", nd.leakage_flagged},
                                    {"max_norm_drift", nd.max_norm_drift},
                                    {"min_basis_overlap", nd.min_basis_overlap},
                                    {"max_drift", drift_json(nd.max_drift)},
                                    {"refreshes", nd.refreshes},
                                    {"ode", stats_json(nd.stats)}};
  std::vector<MultimodeGifState> undep;
  if (und) {
    GifOptions gopt;
    gopt.ode = ode_options(c, c.rtol, c.atol);
    GifDiagnostics ud;
    undep = integrate_gif_multimode(grid, pump, PumpModel::undepleted, times, gopt, &ud);
    ctx.diagnostics["undepleted"] = {{"max_drift", drift_json(ud.max_drift)}, {"ode", stats_json(ud.stats)}};
  }

  std::vector<std::string> header{"t", "R_nongaussian", "R_gif"};
  if (und) header.push_back("R_undepleted_implied");
  header.insert(header.end(), {"N_signal_nongaussian", "N_signal_gif"});
  if (und) header.push_back("N_signal_undepleted");
  header.insert(header.end(), {"manley_rowe_error_nongaussian", "leakage"});
  for (int m = 0; m < c.m_fh; ++m) header.push_back("lambda_" + std::to_string(m));
  header.insert(header.end(), {"X_f0_nongaussian", "P_f0_nongaussian", "P_f0_gif", "P_f0_nongaussian_lossy",
                               "P_f0_gif_lossy", "P_db_nongaussian", "P_db_gif", "P_db_gif_lossy", "purity_f0",
                               "entropy", "peak_density_nongaussian", "peak_density_gif"});
  if (und) header.push_back("peak_density_undepleted");
  Table table(header);
  Table spectrum(und ? std::vector<std::string>{"t", "s", "density_nongaussian", "density_gif", "density_undepleted"}
                     : std::vector<std::string>{"t", "s", "density_nongaussian", "density_gif"});

  for (std::size_t i = 0; i < ng.size(); ++i) {
    const NongaussianSample& s = ng[i];
    const double t = s.gif.time;
    const double leak = fock_leakage(s.state).max();
    ctx.check_leakage("nongaussian", t, leak);
    const SqueezingReport rep = squeezing_report(s);
    const Eigen::VectorXd dens = signal_spectral_density(s, grid);
    const Eigen::VectorXd dens_g = gaussian_spectral_density(s.gif, grid);
    Eigen::VectorXd dens_u;
    std::vector<double> r{t, n0 > 0 ? 1.0 - pump_photon_number(s, grid) / n0 : 0.0,
                          n0 > 0 ? 1.0 - gifsim::pump_photon_number(s.gif) / n0 : 0.0};
    if (und) {
      dens_u = gaussian_spectral_density(undep[i], grid);
      r.push_back(n0 > 0 ? gifsim::signal_photon_number(undep[i]) / (2 * n0) : 0.0);
    }
    r.insert(r.end(), {signal_photon_number(s, grid), gifsim::signal_photon_number(s.gif)});
    if (und) r.push_back(gifsim::signal_photon_number(undep[i]));
    r.insert(r.end(), {n0 > 0 ? manley_rowe(s, grid) / (2 * n0) - 1 : 0.0, leak});
    for (int m = 0; m < c.m_fh; ++m) r.push_back(rep.lambdas[m]);
    const double p_ng = rep.lab[0].p, p_g = 0.5 * std::exp(-2.0 * rep.lambdas[0]);
    const double p_ngl = apply_discrete_loss(p_ng, c.transmissivity), p_gl = apply_discrete_loss(p_g, c.transmissivity);
    r.insert(r.end(), {rep.lab[0].x, p_ng, p_g, p_ngl, p_gl, to_db(p_ng), to_db(p_g), to_db(p_gl), rep.purity_f0,
                       rep.entropy, dens.maxCoeff(), dens_g.maxCoeff()});
    if (und) r.push_back(dens_u.maxCoeff());
    table.row(r);
    for (int j = 0; j < grid.m; ++j) {
      if (und)
        spectrum.row({t, grid.signal_s(j), dens[j], dens_g[j], dens_u[j]});
      else
        spectrum.row({t, grid.signal_s(j), dens[j], dens_g[j]});
    }

    if (is_wigner_time(c, t)) {
      const std::size_t keep[] = {0};
      std::string warning;
      const WignerGrid g = wigner_single_mode(partial_trace(s.state, keep), wigner_spec(c), &warning);
      if (!warning.empty()) ctx.warn("t=" + num(t) + ": " + warning);
      const std::string gif_name = "wigner_gif_a0_" + time_tag(i) + ".txt";
      const std::string lab_name = "wigner_lab_f0_" + time_tag(i) + ".txt";
      write_wigner(ctx.dir / gif_name, g, "a0", t);
      write_wigner(ctx.dir / lab_name, wigner_frame_transform(g, rep.lambdas[0]), "f0", t);
      ctx.add_file(gif_name);
      ctx.add_file(lab_name);
      ctx.diagnostics["wigner_min"][num(t)] = g.min();
      if (c.hybrid) {
        const DensityMatrix h =
            hybrid_supermode_state(s, c.hybrid_phi * std::numbers::pi, c.hybrid_theta * std::numbers::pi);
        const WignerGrid hg = wigner_single_mode(h, wigner_spec(c));
        const std::string name = "wigner_gif_hybrid_" + time_tag(i) + ".txt";
        write_wigner(ctx.dir / name, hg, "hybrid", t);
        ctx.add_file(name);
        ctx.diagnostics["wigner_min_hybrid"][num(t)] = hg.min();
      }
    }
  }
  table.write(ctx.dir / "series.csv");
  spectrum.write(ctx.dir / "spectrum.csv");
  ctx.add_file("series.csv");
  ctx.add_file("spectrum.csv");
}

// ---------------------------------------------------------------------------

void run_oracle(Context& ctx) {
  const RunConfig& c = ctx.config;
  const WavegridConfig grid = grid_of(c);
  const PumpProfile pump = make_gaussian_pump(grid, c.n_sh, c.width_tolerance);
  const std::vector<double> times = c.sample_times();
  OracleOptions oopt;
  oopt.max_excitation = c.oracle_max_excitation;
  oopt.schrodinger.ode = ode_options(c, c.fock_rtol, c.fock_atol);
  const TinyGridSystem sys = build_tiny_hamiltonian(grid, oopt);
  OracleDiagnostics od;
  const auto orc = oracle_evolve(sys, pump, times, oopt, &od);
  ctx.diagnostics["oracle"] = {{"dimension", sys.layout->dimension()},
                               {"truncation_loss", od.truncation_loss},
                               {"max_leakage", od.schrodinger.max_leakage},
                               {"ode", stats_json(od.schrodinger.stats)}};
  const double n0 = orc.front().pump_number;
  const double nmr0 = orc.front().generalized_number;

  const bool ng_on = c.has_model("nongaussian");
  std::vector<NongaussianSample> ng;
  if (ng_on) {
    NongaussianDiagnostics nd;
    ng = evolve_nongaussian(grid, pump, times, nongaussian_options(c), &nd);
    for (const auto& w : nd.warnings) ctx.warn(w);
    if (nd.suppressed_warnings > 0) ctx.warn(std::to_string(nd.suppressed_warnings) + " further basis warnings");
    ctx.diagnostics["nongaussian"] = {{"dimension", ng.front().state.layout->dimension()},
                                      {"max_leakage", nd.max_leakage},
                                      {"min_basis_overlap", nd.min_basis_overlap},
                                      {"refreshes", nd.refreshes},
                                      {"ode", stats_json(nd.stats)}};
  }
  // Waveform of the dominant squeezing supermode: from the supermode run when
  // present, otherwise from the Gaussian frame alone.
  std::vector<MultimodeGifState> gif;
  if (!ng_on) {
    GifOptions gopt;
    gopt.ode = ode_options(c, c.rtol, c.atol);
    gif = integrate_gif_multimode(grid, pump, PumpModel::depleted, times, gopt);
  }
  DecomposeOptions dopt;
  dopt.m_fh = c.m_fh;
  dopt.m_sh = c.m_sh;

  std::vector<std::string> header{"t", "R_oracle", "N_signal_oracle", "manley_rowe_error_oracle", "leakage_oracle",
                                  "X_f0_oracle", "P_f0_oracle", "lambda_0"};
  if (ng_on)
    header.insert(header.end(), {"R_nongaussian", "N_signal_nongaussian", "leakage_nongaussian", "X_f0_nongaussian",
                                 "P_f0_nongaussian"});
  Table table(header);
  std::vector<std::string> sh{"t", "s", "density_oracle"};
  if (ng_on) sh.push_back("density_nongaussian");
  Table spectrum(sh);
  std::optional<SupermodeBasis> basis;
  double ng0 = 0.0;
  for (std::size_t i = 0; i < orc.size(); ++i) {
    const double t = times[i];
    if (ng_on)
      basis = ng[i].basis;
    else
      basis = i == 0 ? seed_supermodes(grid, pump, dopt)
                     : decompose_supermodes(gif[i], grid, dopt, basis ? &*basis : nullptr);
    const VectorXc w0 = basis->w.row(0).transpose();
    const QuadratureVariances q = waveform_quadratures(sys, orc[i].state, w0);
    ctx.check_leakage("oracle", t, orc[i].leakage);
    std::vector<double> r{t, n0 > 0 ? 1.0 - orc[i].pump_number / n0 : 0.0, orc[i].signal_number,
                          nmr0 > 0 ? orc[i].generalized_number / nmr0 - 1 : 0.0, orc[i].leakage, q.x, q.p,
                          basis->lambdas[0]};
    Eigen::VectorXd dens_ng;
    if (ng_on) {
      if (i == 0) ng0 = pump_photon_number(ng[0], grid);
      const double leak = fock_leakage(ng[i].state).max();
      ctx.check_leakage("nongaussian", t, leak);
      const SqueezingReport rep = squeezing_report(ng[i]);
      dens_ng = signal_spectral_density(ng[i], grid);
      r.insert(r.end(), {ng0 > 0 ? 1.0 - pump_photon_number(ng[i], grid) / ng0 : 0.0,
                         signal_photon_number(ng[i], grid), leak, rep.lab[0].x, rep.lab[0].p});
    }
    table.row(r);
    for (int j = 0; j < grid.m; ++j) {
      if (ng_on)
        spectrum.row({t, grid.signal_s(j), orc[i].spectral_density[j], dens_ng[j]});
      else
        spectrum.row({t, grid.signal_s(j), orc[i].spectral_density[j]});
    }
  }
  table.write(ctx.dir / "series.csv");
  spectrum.write(ctx.dir / "spectrum.csv");
  ctx.add_file("series.csv");
  ctx.add_file("spectrum.csv");
}

// ---------------------------------------------------------------------------

void run_units(Context& ctx) {
  std::ofstream out(ctx.dir / "units.csv", std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + (ctx.dir / "units.csv").string());
  out << "quantity,value,unit\n";
  for (const auto& row : units_table(ctx.config)) out << row[0] << "," << row[1] << "," << row[2] << "\n";
  ctx.add_file("units.csv");
}

void write_metadata(const Context& ctx, const std::string& status, const json& error) {
  json meta;
  meta["format"] = "gifsim-metadata 1";
  meta["version"] = kVersion;
  meta["kind"] = to_string(ctx.config.kind);
  meta["status"] = status;
  if (!error.is_null()) meta["error"] = error;
  json cfg = json::object();
  for (const auto& [k, v] : resolved_values(ctx.config)) cfg[k] = v;
  meta["config"] = cfg;
  meta["sample_times"] = ctx.config.sample_times();
  meta["diagnostics"] = ctx.diagnostics;
  meta["warnings"] = ctx.outcome.warnings;
  json files = json::array();
  for (const auto& f : ctx.outcome.files) files.push_back(f.generic_string());
  meta["files"] = files;
  std::ofstream out(ctx.dir / "metadata.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

}  // namespace

std::vector<std::vector<std::string>> units_table(const RunConfig& c) {
  const auto p = units::PhysicalParams::from_lab_units(c.lambda_nm, c.eta_w_cm2, c.k2_fs2_mm, c.r, c.l_loss_m);
  const auto l = units::nonlinear_length(p);
  return {{"L_chi2", num(l.l_chi2), "m"},
          {"L_eff", num(l.l_eff), "m"},
          {"loss_over_L_eff", num(l.loss_over_l_eff), "1"},
          {"distance_at_t_final", num(units::physical_distance(c.t_final, l)), "m"}};
}

RunOutcome run(const RunConfig& config, const fs::path& out_dir) {
  validate(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw ConfigError("cannot create output directory '" + out_dir.string() + "'");
  Context ctx{config, out_dir, {}};
  try {
    switch (config.kind) {
      case RunKind::single: run_single(ctx); break;
      case RunKind::multimode: run_multimode(ctx); break;
      case RunKind::nongaussian: run_nongaussian(ctx); break;
      case RunKind::oracle: run_oracle(ctx); break;
      case RunKind::units: run_units(ctx); break;
    }
  } catch (const NumericalError& e) {
    write_metadata(ctx, "failed", {{"invariant", e.invariant()}, {"message", e.what()}});
    throw;
  }
  ctx.outcome.files.emplace_back("metadata.json");
  write_metadata(ctx, "ok", nullptr);
  return ctx.outcome;
}

}  // namespace gifsim
