#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "chaoscope_cli.hpp"

namespace {

struct Result
{
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args)
{
  args.insert(args.begin(), "chaoscope");
  std::ostringstream out, err;
  const int status = chaoscope::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name)
{
  auto dir = std::filesystem::temp_directory_path() / ("chaoscope_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

} // namespace

TEST(Cli, LevelsTable)
{
  const auto r = run({"levels", "--max", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* v : {"10", "695", "90", "3421640", "182", "12560", "1572"})
    EXPECT_NE(r.out.find(v), std::string::npos) << v;
}

TEST(Cli, LevelsJson)
{
  const auto r = run({"--format", "json", "levels", "--max", "2"});
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j[2]["cycle_lengths"], nlohmann::json({"695", "90"}));
}

TEST(Cli, OrbitCsv)
{
  const auto r = run({"orbit", "--spine", "2", "--cycle", "1", "--pos", "1", "--obs", "1", "--horizon", "3"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "t,cycle_0,pos_0,cycle_1,pos_1\n0,0,0,0,0\n1,0,0,1,1\n2,0,0,1,2\n3,0,0,1,3\n");
}

TEST(Cli, OrbitPastSpineIsAnError)
{
  const auto r = run({"orbit", "--spine", "2", "--cycle", "1", "--pos", "690", "--horizon", "10"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("spine exhausted"), std::string::npos);
}

TEST(Cli, MixingGaps)
{
  const auto r = run({"mixing-gaps", "--m", "1", "--j", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("gaps: 0 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19 20 21 22\n"), std::string::npos);
  EXPECT_NE(r.out.find("prefix confirmed"), std::string::npos);
  EXPECT_NE(r.out.find("missing from [0, 22]: 1\n"), std::string::npos);
}

TEST(Cli, MixingBudgetFromEnvironment)
{
  ::setenv("CHAOSCOPE_BUDGET", "100", 1);
  const auto r = run({"mixing-gaps", "--m", "1", "--j", "1"});
  ::unsetenv("CHAOSCOPE_BUDGET");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
}

TEST(Cli, ValidateMaterializedLevels)
{
  const auto r = run({"validate", "--max", "2"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("G_2 -> G_1: 784 vertices, 0 violations"), std::string::npos);
}

TEST(Cli, MaterializeDot)
{
  const auto r = run({"materialize", "--level", "1", "--dot"});
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("digraph G_1 {\n  0 [label=\"v0\"];\n", 0), 0u);
  EXPECT_EQ(run({"materialize", "--level", "4"}).status, 2);
}

TEST(Cli, DistanceDegreeLift)
{
  auto r = run({"distance", "--spine", "2", "--cycle", "1", "--pos", "1", "--cycle-b", "0"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "d = 2^-2\n");
  r = run({"degree", "--spine", "2", "--cycle", "1", "--pos", "1", "--obs", "2"});
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("degree (depth 2): 1"), std::string::npos);
  r = run({"--format", "json", "lift", "--level", "1", "--cycle", "1", "--pos", "1", "--max", "3"});
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["total"], "44");
}

TEST(Cli, Proximal)
{
  const auto r = run({"proximal", "--spine", "2", "--cycle", "1", "--pos", "2", "--level", "1", "--windows", "1",
                      "--window-length", "10"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("9\n", 0), 0u);
}

TEST(Cli, UsageErrors)
{
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"nonsense"}).status, 2);
  EXPECT_EQ(run({"orbit", "--spine", "x"}).status, 2);
  EXPECT_EQ(run({"orbit", "--spine", "2", "--pos", "abc"}).status, 2);
  EXPECT_EQ(run({"orbit", "--spine", "2", "--cycle", "3"}).status, 2);
  EXPECT_EQ(run({"verify"}).status, 2);
  EXPECT_EQ(run({"verify", "--criterion", "12"}).status, 2);
  EXPECT_EQ(run({"--budget", "-5", "levels"}).status, 2);
}

TEST(Cli, SpineGuard)
{
  auto r = run({"degree", "--spine", "21", "--cycle", "0"});
  EXPECT_EQ(r.status, 2);
  r = run({"degree", "--spine", "13", "--cycle", "0", "--obs", "13"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, DslCheck)
{
  const auto dir = scratch("dsl");
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "good.cover") << chaoscope::dsl::builtin_document_text(4);
    std::ofstream(dir / "bad.cover") << "cover x mode bouquet\nlevel 1 { c1[9] := 10 e; }\n";
    std::ofstream(dir / "broken.cover") << "cover x mode\n";
  }
  auto r = run({"dsl-check", (dir / "good.cover").string()});
  EXPECT_EQ(r.status, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("matches the built-in construction: yes"), std::string::npos);
  EXPECT_EQ(run({"dsl-check", (dir / "bad.cover").string()}).status, 1);
  EXPECT_EQ(run({"dsl-check", (dir / "broken.cover").string()}).status, 1);
  EXPECT_EQ(run({"dsl-check", (dir / "missing.cover").string()}).status, 2);
}

TEST(Cli, CustomCoverFile)
{
  const auto dir = scratch("custom");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "t.cover") << "cover t mode bouquet\nlevel 1 { c1 := 4 e; }\nlevel 2 { c1 := e + 3 c1 + e; c2 := 6 e; }\n";
  const auto r = run({"--cover", (dir / "t.cover").string(), "levels", "--max", "2"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("2  1  14"), std::string::npos);
  EXPECT_EQ(run({"--cover", (dir / "t.cover").string(), "levels", "--max", "3"}).status, 2);
}

TEST(Cli, OutDirAndManifestAreDeterministic)
{
  const auto a = scratch("out_a");
  const auto b = scratch("out_b");
  for (const auto& dir : {a, b}) {
    const auto r = run({"--seed", "3", "--out", dir.string(), "--format", "json", "liyorke", "--pairs", "5"});
    EXPECT_EQ(r.out, "");
  }
  EXPECT_TRUE(std::filesystem::exists(a / "manifest.json"));
  EXPECT_EQ(slurp(a / "liyorke.json"), slurp(b / "liyorke.json"));
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["command"], "liyorke");
  EXPECT_EQ(manifest["parameters"]["seed"], 3);
  EXPECT_EQ(manifest["files"][0]["name"], "liyorke.json");
}

TEST(Cli, VerifySingleCriterion)
{
  const auto r = run({"verify", "--criterion", "7"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("PASS [7]", 0), 0u);
}

TEST(Cli, Help)
{
  const auto r = run({"--help"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("mixing-gaps"), std::string::npos);
}
