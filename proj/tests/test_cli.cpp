#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GIFSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gifsim_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli("--set grid.nope=1 --out " + scratch("a").string()), 2);
  EXPECT_EQ(run_cli("--set grid.m=zero --out " + scratch("a").string()), 2);
  EXPECT_EQ(run_cli("--preset nope"), 2);
  EXPECT_EQ(run_cli("--bogus-flag"), 2);
}

TEST(Cli, ListingCommands) {
  EXPECT_EQ(run_cli("keys"), 0);
  EXPECT_EQ(run_cli("presets"), 0);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, NumericalAbortExitsThreeAndRecordsInvariant) {
  // A tiny norm tolerance cannot be met by a coarse fixed step.
  const fs::path out = scratch("numerical");
  const int code = run_cli("--set run.kind=multimode --set grid.m=8 --set run.t_final=0.5 --set run.samples=2 "
                           "--fixed-step 0.25 --set pump.n_sh=50 --out " + out.string());
  EXPECT_EQ(code, 3);
  const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
  EXPECT_EQ(meta["status"], "failed");
  EXPECT_EQ(meta["error"]["invariant"], "symplectic-constraint");
}

TEST(Cli, MultimodeRunWritesOutputs) {
  const fs::path out = scratch("multimode");
  ASSERT_EQ(run_cli("--set run.kind=multimode --set grid.m=16 --set run.t_final=0.2 --set run.samples=4 "
                    "--set run.wigner_times=0.1 --out " + out.string()),
            0);
  EXPECT_TRUE(fs::exists(out / "series.csv"));
  EXPECT_TRUE(fs::exists(out / "spectrum.csv"));
  const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
  EXPECT_EQ(meta["status"], "ok");
  EXPECT_EQ(meta["kind"], "multimode");
  EXPECT_EQ(meta["config"]["grid.m"], "16");
  EXPECT_EQ(meta["sample_times"].size(), 5u);
  bool wigner = false;
  for (const auto& f : meta["files"]) wigner |= f.get<std::string>().rfind("wigner_", 0) == 0;
  EXPECT_TRUE(wigner);
  // header plus one row per sample
  const std::string csv = slurp(out / "series.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(Cli, UnitsCommand) {
  const fs::path out = scratch("units");
  EXPECT_EQ(run_cli("units --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "units.csv"));
}

TEST(Cli, SweepWithJobs) {
  const fs::path dir = scratch("sweep");
  fs::create_directories(dir);
  for (const char* name : {"a", "b"}) {
    std::ofstream(dir / (std::string(name) + ".ini"))
        << "[run]\nkind = multimode\nt_final = 0.1\nsamples = 2\n[grid]\nm = 8\n[pump]\nn_sh = "
        << (name[0] == 'a' ? 1 : 2) << "\n";
  }
  const fs::path out = dir / "out";
  EXPECT_EQ(run_cli("--config " + (dir / "a.ini").string() + " --config " + (dir / "b.ini").string() +
                    " --jobs 2 --out " + out.string()),
            0);
  EXPECT_TRUE(fs::exists(out / "a" / "series.csv"));
  EXPECT_TRUE(fs::exists(out / "b" / "series.csv"));
  EXPECT_NE(slurp(out / "a" / "series.csv"), slurp(out / "b" / "series.csv"));
}

TEST(Cli, FixedStepOutputIsByteIdentical) {
  const std::string args = "--set run.kind=multimode --set grid.m=12 --set run.t_final=0.3 --set run.samples=3 "
                           "--fixed-step 1e-3 --out ";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run_cli(args + a.string()), 0);
  ASSERT_EQ(run_cli(args + b.string()), 0);
  EXPECT_EQ(slurp(a / "series.csv"), slurp(b / "series.csv"));
  EXPECT_EQ(slurp(a / "metadata.json"), slurp(b / "metadata.json"));
}
