#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "gifsim/config.hpp"

using namespace gifsim;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Config, DefaultsValidate) {
  const RunConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.sample_times().size(), 31u);
  EXPECT_TRUE(c.has_model("gif"));
}

TEST(Config, SampleTimesMergeWignerTimes) {
  RunConfig c;
  c.t_final = 1.0;
  c.samples = 4;
  c.wigner_times = {0.5, 0.1};
  const std::vector<double> expected{0.0, 0.1, 0.25, 0.5, 0.75, 1.0};
  EXPECT_EQ(c.sample_times(), expected);
}

TEST(Config, FileThenOverrides) {
  const auto path = write_file("gifsim_test_a.ini",
                               "# comment\n[run]\nkind = nongaussian\nmodels = nongaussian, gif\n"
                               "[model]\nsignal_cutoffs = 10 6\n[pump]\nn_sh = 4\n");
  const RunConfig c = load_config(std::nullopt, path, {"pump.n_sh=7.5", "run.t_final = 0.4"});
  EXPECT_EQ(c.kind, RunKind::nongaussian);
  EXPECT_EQ(c.models, (std::vector<std::string>{"nongaussian", "gif"}));
  EXPECT_EQ(c.signal_cutoffs, (std::vector<int>{10, 6}));
  EXPECT_DOUBLE_EQ(c.n_sh, 7.5);
  EXPECT_DOUBLE_EQ(c.t_final, 0.4);
  EXPECT_FALSE(c.has_model("undepleted"));
}

TEST(Config, UnknownKeyRejected) {
  const auto path = write_file("gifsim_test_b.ini", "[grid]\nmm = 3\n");
  EXPECT_THROW(load_config(std::nullopt, path, {}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"grid.nope=1"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"no_equals_sign"}), ConfigError);
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"grid.m=abc"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"grid.m=3.5"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"run.kind=banana"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"loss.transmissivity=1.5"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"grid.s_min=-3", "grid.s_max=4"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"run.kind=multimode", "run.models=full"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"model.pump_cutoffs=4,3"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"run.kind=oracle", "grid.m=5"}), ConfigError);
  EXPECT_THROW(load_config(std::nullopt, std::nullopt, {"wigner.hybrid=maybe"}), ConfigError);
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(load_config(std::nullopt, std::filesystem::path("/nonexistent/x.ini"), {}), ConfigError);
}

TEST(Config, PresetsLoad) {
  const auto names = preset_names();
  for (const char* want : {"fig2", "fig3", "fig5", "fig7"})
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  for (const auto& n : names) EXPECT_NO_THROW(load_config(n, std::nullopt, {})) << n;
  const RunConfig fig2 = load_config("fig2", std::nullopt, {});
  EXPECT_EQ(fig2.kind, RunKind::single);
  EXPECT_DOUBLE_EQ(fig2.delta, -0.5);
  EXPECT_THROW(preset_path("nope"), ConfigError);
}

TEST(Config, ResolvedValuesRoundTrip) {
  RunConfig c = load_config(std::nullopt, std::nullopt, {"run.kind=multimode", "grid.d2=1.0", "run.wigner_times=0.1"});
  RunConfig back;
  for (const auto& [k, v] : resolved_values(c)) set_config_value(back, k, v);
  EXPECT_EQ(resolved_values(back), resolved_values(c));
  EXPECT_EQ(config_keys().size(), resolved_values(c).size());
}
