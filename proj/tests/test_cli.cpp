#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace {

int run(const std::string& args) {
  const int s = std::system((std::string(IKERN_CLI_PATH) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string tmp(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(Cli, VerifyDeltaPassesAndEchoesConfig) {
  const auto out = tmp("delta.json");
  EXPECT_EQ(run("verify-delta --mmax 300 --q 30,60 --out " + out), 0);
  const auto r = nlohmann::json::parse(slurp(out));
  EXPECT_TRUE(r["pass"].get<bool>());
  EXPECT_EQ(r["config"]["mmax"], 300);
  EXPECT_EQ(r["config"]["q"].size(), 2u);
  EXPECT_FALSE(r["checks"].empty());
}

TEST(Cli, UsageErrorsHaveTheirOwnExitCode) {
  EXPECT_EQ(run("verify-delta --s-places moon"), 2);
  EXPECT_EQ(run("verify-local --p 4"), 2);
  EXPECT_EQ(run("compare-sigma --x 0"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, BudgetExceededExitCode) { EXPECT_EQ(run("compare-sigma --x 100 --budget 10"), 3); }

TEST(Cli, FailingCheckIsNamed) {
  const auto out = tmp("sigma.json");
  EXPECT_EQ(run("compare-sigma --x 20 --trunc-gamma 1 --trunc-c 3 --out " + out), 1);
  const auto r = nlohmann::json::parse(slurp(out));
  for (const char* k : {"config", "direct", "delta_inserted", "poisson_side", "error_budget", "truncation_report", "pass"})
    EXPECT_TRUE(r.contains(k)) << k;
  EXPECT_FALSE(r["pass"].get<bool>());
  EXPECT_TRUE(r.contains("first_failure"));
  // non-finite budgets are written as strings
  EXPECT_EQ(r["error_budget"]["tail_ratio"], "inf");
}

TEST(Cli, ReportsAreBitwiseReproducible) {
  const auto a = tmp("a.json"), b = tmp("b.json");
  ASSERT_EQ(run("verify-local --p 3 --n 2 --cases 5 --seed 9 --out " + a), 0);
  ASSERT_EQ(run("--workers 1 verify-local --p 3 --n 2 --cases 5 --seed 9 --out " + b), 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, ParameterFile) {
  const auto cfg = tmp("params.toml"), out = tmp("p.json");
  {
    std::ofstream f(cfg);
    f << "[verify-zeta]\np = 5\nm = 2\ncases = 1\n";
  }
  EXPECT_EQ(run("--config " + cfg + " verify-zeta --out " + out), 0);
  const auto r = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(r["config"]["p"], 5);
  EXPECT_EQ(r["config"]["m"], 2);
}
