// Command-line front end: gifsim [run|oracle|units|keys|presets] [options]

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "gifsim/ode.hpp"
#include "gifsim/runner.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Request {
  std::optional<std::string> preset;
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  fs::path out;
};

int run_one(const Request& req, std::optional<gifsim::RunKind> force) {
  try {
    auto overrides = req.overrides;
    if (force) overrides.insert(overrides.begin(), "run.kind=" + gifsim::to_string(*force));
    gifsim::RunConfig config = gifsim::load_config(req.preset, req.config, overrides);
    const auto outcome = gifsim::run(config, req.out);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "wrote " << outcome.files.size() << " files to " << req.out.string() << "\n";
    return 0;
  } catch (const gifsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gifsim::NumericalError& e) {
    std::cerr << "numerical failure [" << e.invariant() << "]: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// Runs every request, at most `jobs` at a time in child processes. The exit
// code is the largest one reported.
int run_all(const std::vector<Request>& requests, int jobs, std::optional<gifsim::RunKind> force) {
  if (requests.size() == 1 || jobs <= 1) {
    int worst = 0;
    for (const auto& r : requests) worst = std::max(worst, run_one(r, force));
    return worst;
  }
  std::map<pid_t, std::size_t> running;
  int worst = 0;
  std::size_t next = 0;
  while (next < requests.size() || !running.empty()) {
    while (next < requests.size() && int(running.size()) < jobs) {
      std::fflush(nullptr);
      const pid_t pid = fork();
      if (pid < 0) {
        std::perror("fork");
        return 1;
      }
      if (pid == 0) _exit(run_one(requests[next], force));
      running[pid] = next++;
    }
    int status = 0;
    const pid_t done = wait(&status);
    if (done < 0) break;
    running.erase(done);
    worst = std::max(worst, WIFEXITED(status) ? WEXITSTATUS(status) : 1);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsed squeezed-light simulator (Gaussian interaction frame + supermode Fock evolution)"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::vector<std::string> configs;
  std::optional<std::string> preset;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::optional<double> fixed_step;
  int jobs = 1;
  app.add_option("--config", configs, "INI config file (repeat for a sweep; one output subdirectory each)");
  app.add_option("--preset", preset, "built-in preset: fig2, fig3, fig5, fig7");
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--set", overrides, "override, section.key=value (repeatable)");
  app.add_option("--fixed-step", fixed_step, "fixed RK4 step for every integrator")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "parallel worker processes for sweeps")->check(CLI::PositiveNumber);

  auto* run_cmd = app.add_subcommand("run", "run the configured pipeline (default)");
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force tiny-grid reference run");
  auto* units_cmd = app.add_subcommand("units", "print the physical-unit table");
  auto* keys_cmd = app.add_subcommand("keys", "list config keys with defaults");
  auto* presets_cmd = app.add_subcommand("presets", "list built-in presets");
  (void)run_cmd;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*keys_cmd) {
    for (const auto& k : gifsim::config_keys())
      std::printf("%-28s %-20s %s\n", k.key.c_str(), k.default_value.empty() ? "\"\"" : k.default_value.c_str(),
                  k.description.c_str());
    return 0;
  }
  if (*presets_cmd) {
    for (const auto& p : gifsim::preset_names()) std::printf("%s\n", p.c_str());
    return 0;
  }
  if (fixed_step) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *fixed_step);
    overrides.push_back(std::string("integrator.fixed_step=") + buf);
  }

  if (*units_cmd) {
    try {
      auto o = overrides;
      o.insert(o.begin(), "run.kind=units");
      const auto config = gifsim::load_config(preset, configs.empty() ? std::nullopt : std::optional<fs::path>(configs.front()), o);
      for (const auto& row : gifsim::units_table(config))
        std::printf("%-22s %s %s\n", row[0].c_str(), row[1].c_str(), row[2].c_str());
      if (app.get_option("--out")->count() > 0) gifsim::run(config, out);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
  }

  std::vector<Request> requests;
  if (configs.size() <= 1) {
    requests.push_back({preset, configs.empty() ? std::nullopt : std::optional<fs::path>(configs.front()),
                        overrides, out});
  } else {
    for (const auto& c : configs)
      requests.push_back({preset, fs::path(c), overrides, fs::path(out) / fs::path(c).stem()});
  }
  std::optional<gifsim::RunKind> force;
  if (*oracle_cmd) force = gifsim::RunKind::oracle;
  return run_all(requests, jobs, force);
}
