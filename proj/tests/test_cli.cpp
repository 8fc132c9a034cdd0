#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "prosocial/cli/commands.hpp"
#include "prosocial/io/table.hpp"

namespace fs = std::filesystem;
using prosocial::io::read_file;
using prosocial::io::write_file_atomic;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "prosocial_cli_test";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" PROSOCIAL_CLI_PATH "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = kRoot / "configs" / name;
  write_file_atomic(p, body);
  return p;
}

const char* kSmall = R"({
  "beliefs": {"thresholds": [0.3, 1.2], "samples": 2000},
  "figure1": {"lattice": 20, "S_vv": [-1, 1], "c": [0.3, 0.7]},
  "sweep": {"axes": [{"name": "R", "values": [0, 1]}, {"name": "c", "values": [0.2, 0.8]}], "population": 500},
  "costs": {"c": [0.25, 0.5]},
  "calibrate": {"targets": [0.8, 0.9]},
  "experiment": {"countries": 6, "rows_per_country": 400, "margin_norms": [0, 0.5, 1]}
})";

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kRoot);
    small_ = write_config("small.json", kSmall).string();
  }
  static inline std::string small_;
};

}  // namespace

TEST_F(Cli, EverySubcommandRunsAndRerunsByteIdentically) {
  for (const auto& sub : prosocial::cli::subcommands()) {
    const fs::path a = kRoot / ("a_" + sub), b = kRoot / ("b_" + sub);
    ASSERT_EQ(run(sub + " --config " + small_ + " --seed 7 --out " + a.string()), 0) << sub;
    ASSERT_EQ(run(sub + " --config " + small_ + " --seed 7 --out " + b.string()), 0) << sub;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      EXPECT_EQ(read_file(e.path()), read_file(b / e.path().filename())) << e.path();
    }
    EXPECT_GE(files, 2u) << sub;
    const auto manifest = nlohmann::json::parse(read_file(a / "manifest.json"));
    EXPECT_EQ(manifest["subcommand"], sub);
    EXPECT_EQ(manifest["seed"], 7);
    for (const auto& f : manifest["files"]) EXPECT_TRUE(fs::exists(a / f["path"].get<std::string>()));
  }
}

TEST_F(Cli, SeedChangesStochasticOutput) {
  ASSERT_EQ(run("sweep --config " + small_ + " --seed 1 --out " + (kRoot / "s1").string()), 0);
  ASSERT_EQ(run("sweep --config " + small_ + " --seed 2 --out " + (kRoot / "s2").string()), 0);
  EXPECT_NE(read_file(kRoot / "s1" / "sweep.csv"), read_file(kRoot / "s2" / "sweep.csv"));
}

TEST_F(Cli, StochasticCommandsNeedASeed) {
  EXPECT_EQ(run("sweep --config " + small_ + " --out " + (kRoot / "noseed").string()), 2);
  EXPECT_EQ(run("costs --config " + small_ + " --out " + (kRoot / "noseed_costs").string()), 0);
}

TEST_F(Cli, ExitCodesByFailureKind) {
  EXPECT_EQ(run("costs --bogus"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("costs --format xml"), 2);
  const auto bad = write_config("bad.json", R"({"params": {"S_vv": 0.1, "Svv": 0.2}})");
  EXPECT_EQ(run("costs --config " + bad.string() + " --out " + (kRoot / "bad").string()), 2);
  const auto unreachable = write_config("unreach.json", R"({"params": {"c": 0.9}, "calibrate": {"targets": [0.999]}})");
  const fs::path out = kRoot / "unreach";
  EXPECT_EQ(run("calibrate --config " + unreachable.string() + " --out " + out.string()), 5);
  const auto doc = prosocial::io::parse_csv(read_file(out / "calibrate.csv"));
  EXPECT_EQ(doc.rows[0][doc.column("status")], "unattainable");
  const auto missing = write_config(
      "missing.json", R"({"experiment": {"input_countries": "nope.csv", "input_microdata": "nope2.csv"}})");
  EXPECT_EQ(run("experiment --seed 1 --config " + missing.string() + " --out " + (kRoot / "missing").string()), 1);
  write_file_atomic(kRoot / "blocker", "x");
  EXPECT_EQ(run("costs --out " + (kRoot / "blocker" / "sub").string()), 1);
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, OutputDirectoryPrecedence) {
  const fs::path flag = kRoot / "flag", env = kRoot / "env", conf = kRoot / "conf";
  const auto cfg = write_config("out.json", R"({"out": ")" + conf.string() + R"("})");
  const std::string env_set = std::string(prosocial::cli::kOutDirEnv) + "=" + env.string();
  ASSERT_EQ(run("costs --config " + cfg.string(), env_set), 0);
  EXPECT_TRUE(fs::exists(env / "costs.csv"));
  EXPECT_FALSE(fs::exists(conf));
  ASSERT_EQ(run("costs --config " + cfg.string() + " --out " + flag.string(), env_set), 0);
  EXPECT_TRUE(fs::exists(flag / "costs.csv"));
  ASSERT_EQ(run("costs --config " + cfg.string(), std::string(prosocial::cli::kOutDirEnv) + "="), 0);
  EXPECT_TRUE(fs::exists(conf / "costs.csv"));
}

TEST_F(Cli, JsonFormat) {
  const fs::path out = kRoot / "json";
  ASSERT_EQ(run("costs --format json --config " + small_ + " --out " + out.string()), 0);
  const auto doc = nlohmann::json::parse(read_file(out / "costs.json"));
  EXPECT_EQ(doc["schema"], "costs/v1");
  EXPECT_EQ(doc["rows"].size(), 2u);
  EXPECT_NEAR(doc["rows"][1][2].get<double>(), 0.38095238095238093, 1e-15);
}

TEST_F(Cli, ExperimentReimportReproducesCoefficients) {
  const fs::path first = kRoot / "exp_first";
  ASSERT_EQ(run("experiment --config " + small_ + " --seed 3 --out " + first.string()), 0);
  const auto cfg = write_config("reimport.json", R"({"experiment": {"margin_norms": [0, 0.5, 1], "input_countries": ")" +
                                                     (first / "countries.csv").string() + R"(", "input_microdata": ")" +
                                                     (first / "microdata.csv").string() + R"("}})");
  const fs::path second = kRoot / "exp_second";
  ASSERT_EQ(run("experiment --config " + cfg.string() + " --seed 3 --out " + second.string()), 0);
  EXPECT_EQ(read_file(first / "coefficients.csv"), read_file(second / "coefficients.csv"));
  EXPECT_EQ(read_file(first / "margins.csv"), read_file(second / "margins.csv"));
}
