#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "depctl/commands.hpp"

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(DEPCTL_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(DEPCTL_CONFIG_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("depctl_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

const char* kSmallToy = R"({
  "arrival": {"constant": 1},
  "service": {"kernel": {"transition": [[1]], "increments": [[{"type": "gaussian", "mean": 3, "variance": 2}]]}},
  "simulation": {"horizon": 50, "replications": 2000, "delay_levels": [0, 1, 2], "backlog_levels": [0, 1, 2]}
})";

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("spectral").code, 2);
  EXPECT_EQ(run("bounds --config " + config("toy.json") + " --mode nonsense").code, 2);
  EXPECT_EQ(run("spectral --config /nonexistent.json").code, 2);
  EXPECT_EQ(run("simulate --config " + write_temp("noseed.json", kSmallToy)).code, 2);
}

TEST(Cli, UnstableQueue) {
  EXPECT_EQ(run("bounds --config " + config("unstable.json")).code, 4);
  EXPECT_EQ(run("simulate --config " + config("unstable.json")).code, 4);
}

TEST(Cli, NumericError) {
  // The Rayleigh capacity MGF overflows at theta = 1 with W = 20 kHz.
  EXPECT_EQ(run("spectral --config " + config("unstable.json") + " --theta 1").code, 3);
}

TEST(Cli, CopulaError) {
  const std::string path = write_temp("zero_mass.json", R"({
    "copulas": {"horizon": 2, "dimensions": [{"varpi0": [0, 1], "sequence": [{"family": "p"}]}]}
  })");
  EXPECT_EQ(run("control --config " + path).code, 5);
}

TEST(Cli, ControlMatricesAtFourDecimals) {
  const CliRun r = run("control --config " + config("rayleigh_negative.json") + " --decimals 4 --out ''");
  ASSERT_EQ(r.code, 0);
  for (const char* s : {"0.2875", "0.7125", "0.3054", "0.6946"}) EXPECT_NE(r.out.find(s), std::string::npos) << s;
  const CliRun pos = run("control --config " + config("rayleigh_positive.json") + " --decimals 4 --out ''");
  for (const char* s : {"0.4125", "0.5875", "0.2518", "0.7482"}) EXPECT_NE(pos.out.find(s), std::string::npos) << s;
}

TEST(Cli, SpectralToy) {
  const CliRun r = run("spectral --config " + config("toy.json") + " --theta 0,2 --decimals 9");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string header, row0, row2;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row2);
  EXPECT_EQ(header.substr(0, 6), "theta,");
  EXPECT_EQ(row2.substr(row2.rfind(',') + 1), "0.000000000");
}

TEST(Cli, SimulateIsDeterministic) {
  const std::string path = write_temp("toy_small.json", kSmallToy);
  const CliRun a = run("simulate --config " + path + " --seed 5");
  const CliRun b = run("simulate --config " + path + " --seed 5");
  const CliRun c = run("simulate --config " + path + " --seed 6");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, ZeroTraffic) {
  const CliRun r = run("simulate --config " + config("zero_traffic.json"));
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    // kind,level,estimate,...
    std::istringstream cells(line);
    std::string kind, level, estimate;
    std::getline(cells, kind, ',');
    std::getline(cells, level, ',');
    std::getline(cells, estimate, ',');
    EXPECT_EQ(std::stod(estimate), 0.0) << line;
  }
  EXPECT_EQ(rows, 4);
}

TEST(Cli, RunCommandNeverThrows) {
  depctl::CommandOptions opt;
  opt.config_text = "{";
  EXPECT_EQ(depctl::run_command("spectral", opt).exit_code, depctl::kExitUsage);
  EXPECT_EQ(depctl::run_command("nonsense", opt).exit_code, depctl::kExitUsage);
}
