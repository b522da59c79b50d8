#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = gexp::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string c; std::getline(in, c, ',');) out.push_back(c);
  return out;
}

// Column `name` of every data row (after the echo and header lines).
std::vector<double> column(const std::string& csv, const std::string& name) {
  const auto ls = lines(csv);
  const auto head = cells(ls.at(1));
  const auto it = std::find(head.begin(), head.end(), name);
  EXPECT_NE(it, head.end()) << name;
  const auto idx = static_cast<std::size_t>(it - head.begin());
  std::vector<double> out;
  for (std::size_t i = 2; i < ls.size(); ++i) out.push_back(std::stod(cells(ls[i]).at(idx)));
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gexp_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, PdeTopVariance) {
  const Result r = run({"pde", "--sigma2", "0.25", "1", "--phi", "sq", "--t", "1", "--accuracy", "fine"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0].rfind("# gexp pde", 0), 0u);
  EXPECT_EQ(ls[1], "value,nx,dt,runtime_s");
  EXPECT_NEAR(column(r.out, "value")[0], 1.0, 5e-3);
  EXPECT_EQ(column(r.out, "nx")[0], 801);
}

TEST(Cli, GirsanovCheckDegenerateBand) {
  const Result r = run({"girsanov-check", "--sigma2", "0", "1", "--h", "const:0.5", "--phi", "cos1",
                        "--times", "1", "--m-list", "6,8,10,12"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto err = column(r.out, "abs_error");
  ASSERT_EQ(err.size(), 4u);
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_LE(err[i], err[i - 1]);
  EXPECT_LE(err.back(), 1e-2);
  EXPECT_EQ(column(r.out, "m"), (std::vector<double>{6, 8, 10, 12}));
}

TEST(Cli, AxiomsPrintCounts) {
  const Result r = run({"axioms", "--trials", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto passed = column(r.out, "passed");
  ASSERT_EQ(passed.size(), 6u);
  for (double p : passed) EXPECT_EQ(p, 100);
}

TEST(Cli, TreeAndJepsAndDegenerate) {
  Result r = run({"tree", "--steps", "6", "--sigma-levels", "3", "--phi", "sq", "--mode", "lower"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(column(r.out, "value")[0], 0.25, 1e-12);
  EXPECT_EQ(column(r.out, "leaves")[0], 46656);

  r = run({"jeps-sweep", "--alpha", "1", "--beta", "1", "--eps-list", "0.4,0.2", "--steps", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(column(r.out, "eps"), (std::vector<double>{0.4, 0.2}));

  r = run({"degenerate", "--eps-list", "0.4,0.2", "--steps", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).size(), 5u);
}

TEST(Cli, MultiTimeArity1IsAveraged) {
  const Result r = run({"tree", "--steps", "4", "--sigma-levels", "2", "--phi", "cos1", "--times", "0.5,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Result expr = run({"tree", "--steps", "4", "--sigma-levels", "2", "--phi",
                           "0.5*(clip(cos(x1), -1, 1) + clip(cos(x2), -1, 1))", "--phi-bound", "1",
                           "--times", "0.5,1"});
  ASSERT_EQ(expr.code, 0) << expr.err;
  EXPECT_NEAR(column(r.out, "value")[0], column(expr.out, "value")[0], 1e-15);
}

TEST(Cli, ConfigurationErrorsExitTwo) {
  Result r = run({"pde", "--bogus"});
  EXPECT_EQ(r.code, 2);
  r = run({"pde", "--phi", "cos(x1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("position"), std::string::npos) << r.err;
  r = run({"tree", "--steps", "30"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("reduce steps"), std::string::npos) << r.err;
  r = run({"pde", "--sigma2", "1", "0.5"});
  EXPECT_EQ(r.code, 2);
  r = run({"girsanov-check", "--h", "wiggly"});
  EXPECT_EQ(r.code, 2);
  r = run({"tree", "--phi", "x1 + x2", "--times", "1"});
  EXPECT_EQ(r.code, 2);
  r = run({"tree", "--steps", "4", "--times", "0.3"});
  EXPECT_EQ(r.code, 2);
  r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(lines(r.err.empty() ? r.out : r.err).empty(), false);
}

TEST(Cli, VersionAndHelp) {
  Result r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("tree"), std::string::npos);
  r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("girsanov-check"), std::string::npos);
}

TEST(Cli, SeedIsAcceptedAndIgnored) {
  const Result a = run({"tree", "--steps", "4", "--seed", "1", "--no-timing"});
  const Result b = run({"tree", "--steps", "4", "--seed", "2", "--no-timing"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(lines(a.out)[2], lines(b.out)[2]);
}

TEST(Cli, ByteIdenticalRepeatRuns) {
  const std::vector<std::string> args = {"girsanov-check", "--m-list", "4,6", "--no-timing"};
  const Result a = run(args);
  const Result b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, EchoedConfigReproducesTheRun) {
  const Result a = run({"degenerate", "--eps-list", "0.4,0.1", "--steps", "4", "--phi", "x1*x1",
                        "--phi-bound", "4", "--no-timing"});
  ASSERT_EQ(a.code, 0) << a.err;
  std::istringstream echo(lines(a.out)[0]);
  std::vector<std::string> args;
  for (std::string word; echo >> word;) {
    if (word.size() > 1 && word.front() == '\'' && word.back() == '\'') word = word.substr(1, word.size() - 2);
    args.push_back(word);
  }
  ASSERT_GE(args.size(), 3u);
  args.erase(args.begin(), args.begin() + 2);  // "#", "gexp"
  args.push_back("--no-timing");
  const Result b = run(args);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ConfigFileIsOverriddenByFlags) {
  const fs::path dir = scratch("config");
  const fs::path cfg = dir / "run.ini";
  std::ofstream(cfg) << "sigma2 = 0.5 1\nphi = lin\naccuracy = coarse\n";
  Result r = run({"pde", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(lines(r.out)[0].find("--phi lin"), std::string::npos) << r.out;
  EXPECT_NE(lines(r.out)[0].find("--sigma2 0.5 1"), std::string::npos) << r.out;
  EXPECT_EQ(column(r.out, "nx")[0], 201);
  r = run({"pde", "--config", cfg.string(), "--phi", "sq", "--accuracy", "medium"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(lines(r.out)[0].find("--phi sq"), std::string::npos);
  EXPECT_EQ(column(r.out, "nx")[0], 401);
  EXPECT_NEAR(column(r.out, "value")[0], 1.0, 5e-3);
}

TEST(Cli, OutputDestinations) {
  const fs::path dir = scratch("output");
  const fs::path file = dir / "nested" / "pde.csv";
  Result r = run({"pde", "--output", file.string(), "--no-timing"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const std::string written = slurp(file);
  EXPECT_EQ(written.rfind("# gexp pde", 0), 0u);

  ::setenv("GEXP_OUTPUT_DIR", dir.c_str(), 1);
  r = run({"pde", "--no-timing"});
  ::unsetenv("GEXP_OUTPUT_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "pde.csv"), written);
}

TEST(Cli, ReproduceAllQuickWithInjectedBias) {
  const Result r = run({"reproduce-all", "--quick", "--inject-bias", "0.1"});
  EXPECT_EQ(r.code, 1);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 10u);
  for (int id : {6, 7, 10}) {
    EXPECT_EQ(ls[static_cast<std::size_t>(id - 1)].rfind("FAIL", 0), 0u) << ls[id - 1];
  }
  for (int id : {1, 2, 3, 4, 5, 8, 9}) {
    EXPECT_EQ(ls[static_cast<std::size_t>(id - 1)].rfind("PASS", 0), 0u) << ls[id - 1];
  }
}
