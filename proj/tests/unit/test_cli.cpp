#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with the given arguments; stderr is discarded.
Run cli(const std::string& args) {
  const std::string cmd = std::string(QSTAR_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const char* name) { return std::string(QSTAR_TEST_DATA) + "/" + name; }

fs::path scratch(const char* name) {
  auto dir = fs::temp_directory_path() / ("qstar_cli_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, HelpListsDefaults) {
  for (const char* sub : {"generate", "infer", "sweep", "spectral", "greedy", "alluvial"}) {
    const auto r = cli(std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    // Every option line carrying a value type also shows its default.
    std::istringstream lines(r.out);
    for (std::string line; std::getline(lines, line);) {
      const bool valued = std::regex_search(line, std::regex(R"(^\s+(-\w,)?--[\w-]+ (TEXT|INT|UINT|FLOAT))"));
      const bool required = line.find("REQUIRED") != std::string::npos;
      if (valued && !required) EXPECT_NE(line.find('['), std::string::npos) << sub << ": " << line;
    }
    EXPECT_NE(r.out.find("--seed"), std::string::npos) << sub;
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(cli("spectral --input " + data("karate.txt") + " --no-such-flag").code, 2);
  EXPECT_EQ(cli("nonsense").code, 2);
  EXPECT_EQ(cli("spectral --input /nonexistent/graph.txt").code, 2);  // CLI11 checks file existence
  std::ofstream(dir / "bad.txt") << "0 1\n1 x\n";
  EXPECT_EQ(cli("spectral --input " + (dir / "bad.txt").string() + " -o " + dir.string()).code, 3);
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(cli("spectral --input " + data("karate.txt") + " -o " + (dir / "blocker" / "sub").string()).code, 3);
  EXPECT_EQ(cli("generate --n 10 --c 50 -o " + dir.string()).code, 4);
  fs::remove_all(dir);
}

TEST(Cli, SpectralFootball) {
  const auto dir = scratch("football");
  const auto r = cli("spectral --input " + data("football.txt") + " --matrix nb -o " + dir.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("q_star=10"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(slurp(dir / "spectral.json"));
  EXPECT_EQ(j["non_backtracking"]["q_star"], 10);
  fs::remove_all(dir);
}

TEST(Cli, GenerateAndSweepArtifacts) {
  const auto dir = scratch("pipeline");
  const auto d = dir.string();
  ASSERT_EQ(cli("generate --model sbm --n 300 --q 2 --c 6 --eps 0.2 --seed 7 -o " + d).code, 0);
  EXPECT_TRUE(fs::exists(dir / "graph.txt"));
  EXPECT_TRUE(fs::exists(dir / "labels.txt"));
  const auto meta = nlohmann::json::parse(slurp(dir / "generate.json"));
  EXPECT_EQ(meta["seed"], 7);

  const auto r = cli("sweep --input " + d + "/graph.txt --qmax 3 --restarts 2 --runs 3 --seed 1 -o " + d);
  ASSERT_EQ(r.code, 0);
  const auto report = nlohmann::json::parse(slurp(dir / "sweep.json"));
  EXPECT_EQ(report["seed"], 1);
  EXPECT_EQ(report["rows"].size(), 3u);
  EXPECT_EQ(slurp(dir / "sweep.csv").rfind("q,q_eff,bethe_f", 0), 0u);
  fs::remove_all(dir);
}

TEST(Cli, DeterministicGivenSeed) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(cli("generate --model dcsbm --n 200 --q 2 --eps 0.3 --seed 4 -o " + dir.string()).code, 0);
    ASSERT_EQ(cli("greedy --input " + data("karate.txt") + " --runs 5 --seed 4 -o " + dir.string()).code, 0);
    ASSERT_EQ(cli("infer --input " + data("karate.txt") + " --q 2 --restarts 2 --seed 4 --jobs 2 -o " + dir.string())
                  .code,
              0);
  }
  for (const char* f : {"graph.txt", "labels.txt", "greedy.json", "infer.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, ConfigFileAndOverride) {
  const auto dir = scratch("config");
  std::ofstream(dir / "config.json") << R"({"seed": 9, "generate": {"n": 120, "q": 3}})";
  ASSERT_EQ(cli("generate --config " + (dir / "config.json").string() + " --n 150 -o " + dir.string()).code, 0);
  const auto meta = nlohmann::json::parse(slurp(dir / "generate.json"));
  EXPECT_EQ(meta["seed"], 9);
  EXPECT_EQ(meta["q"], 3);
  EXPECT_EQ(meta["n"], 150);
  EXPECT_EQ(cli("generate --config " + (dir / "missing.json").string()).code, 3);
  fs::remove_all(dir);
}

TEST(Cli, AlluvialExport) {
  const auto dir = scratch("alluvial");
  ASSERT_EQ(cli("alluvial --input " + data("karate.txt") + " --qs 2,3 --restarts 2 -o " + dir.string()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "map_q2.txt"));
  EXPECT_TRUE(fs::exists(dir / "map_q3.txt"));
  EXPECT_TRUE(fs::exists(dir / "flows.json"));
  fs::remove_all(dir);
}
