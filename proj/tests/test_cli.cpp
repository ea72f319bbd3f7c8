#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ngt/cli.hpp"

using namespace ngt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ngt_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "ngt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(NGT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files[e.path().filename().string()] = io::read_file(e.path());
  return files;
}

}  // namespace

TEST(Config, DefaultsResolve) {
  const cli::RunConfig cfg = cli::RunConfig::resolve(std::nullopt, {});
  EXPECT_EQ(cfg.op().name(), "infinity");
  EXPECT_EQ(cfg.dim(), 2);
  EXPECT_EQ(cfg.seed(), 0u);
  EXPECT_TRUE(cfg.wants("csv"));
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"grid.hh=1"}), ConfigError);
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"nosuch=1"}), ConfigError);
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"grid.h.x=1"}), ConfigError);
  const fs::path dir = scratch("unknown");
  io::write_atomic(dir / "c.json", R"({"grid": {"h": 0.1, "typo": 2}})");
  EXPECT_THROW(cli::RunConfig::resolve(dir / "c.json", {}), ConfigError);
}

TEST(Config, TypeMismatchesAreErrors) {
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"grid.h=\"coarse\""}), ConfigError);
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"grid.h=coarse"}), ConfigError);
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"grid=3"}), ConfigError);
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"output.formats=[\"png\"]"}), ConfigError);
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"seed=1.5"}), ConfigError);
  EXPECT_THROW(cli::RunConfig::resolve(std::nullopt, {"noequals"}), ConfigError);
}

TEST(Config, SetOverridesFileAndParsesValues) {
  const fs::path dir = scratch("overrides");
  io::write_atomic(dir / "c.json", R"({"grid": {"h": 0.1}, "operator": {"name": "laplace"}})");
  const cli::RunConfig cfg =
      cli::RunConfig::resolve(dir / "c.json", {"grid.h=0.25", "operator.name=m-laplace:3", "g.expr=2*t/(1+t^2)"});
  EXPECT_DOUBLE_EQ(cfg.grid_problem().h, 0.25);
  EXPECT_EQ(cfg.op().name(), "m-laplace:3");
  EXPECT_EQ(cfg.doc()["g"]["expr"], "2*t/(1+t^2)");
  // string-typed keys keep numeric-looking text verbatim
  EXPECT_EQ(cli::RunConfig::resolve(std::nullopt, {"f.expr=-1"}).doc()["f"]["expr"], "-1");
}

TEST(Config, OperatorParams) {
  auto cfg = cli::RunConfig::resolve(std::nullopt, {"operator.name=k-hessian", "operator.params.k=2"});
  EXPECT_EQ(cfg.op().name(), "k-hessian:2");
  cfg = cli::RunConfig::resolve(std::nullopt, {"operator.name=laplace", "operator.params.m=3"});
  EXPECT_THROW(cfg.op(), ConfigError);
  cfg = cli::RunConfig::resolve(std::nullopt, {"operator.params.n=9"});
  EXPECT_THROW(cfg.op(), ConfigError);
}

TEST(Config, DomainAndExpressions) {
  auto cfg = cli::RunConfig::resolve(std::nullopt, {"domain.shape=disc", "domain.params=[0,0,2]"});
  EXPECT_DOUBLE_EQ(cfg.domain().inball_radius(), 2.0);
  cfg = cli::RunConfig::resolve(std::nullopt, {"domain.shape=disc"});
  EXPECT_THROW(cfg.domain(), ConfigError);
  cfg = cli::RunConfig::resolve(std::nullopt, {"domain.shape=hexagon"});
  EXPECT_THROW(cfg.domain(), ConfigError);
  cfg = cli::RunConfig::resolve(std::nullopt, {"b.expr=x1 + t"});
  EXPECT_THROW(cfg.b(), ConfigError);
  cfg = cli::RunConfig::resolve(std::nullopt, {"g.expr=-1"});
  EXPECT_THROW(cfg.g(), ConfigError);
}

TEST(Config, SampleConfigsResolve) {
  int seen = 0;
  for (const auto& e : fs::directory_iterator(NGT_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    SCOPED_TRACE(e.path().string());
    const cli::RunConfig cfg = cli::RunConfig::resolve(e.path(), {});
    EXPECT_NO_THROW(cfg.op());
    EXPECT_NO_THROW(cfg.g());
    EXPECT_NO_THROW(cfg.domain());
    ++seen;
  }
  EXPECT_GT(seen, 0);
}

TEST(CheckOperator, SpecExamples) {
  const fs::path dir = scratch("check");
  Outcome r = run({"check-operator", "--op", "infinity", "--samples", "1000", "--seed", "7", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("result=pass"), std::string::npos);
  EXPECT_EQ(r.out.find("note:"), std::string::npos);

  r = run({"check-operator", "--op", "m-laplace:1", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("note: N vanishes identically"), std::string::npos);

  r = run({"check-operator", "--op", "k-hessian:9", "-n", "3", "--out", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("range error"), std::string::npos);
}

TEST(CheckOperator, AllCatalogOperatorsPass) {
  const fs::path dir = scratch("catalog");
  for (const char* op : {"laplace", "m-laplace:3", "k-hessian:2", "infinity", "normalized-infinity"}) {
    const Outcome r = run({"check-operator", "--op", op, "--samples", "200", "--out", dir.string()});
    EXPECT_EQ(r.code, 0) << op << "\n" << r.out << r.err;
  }
}

TEST(Cli, ResolvedConfigRecordsSeed) {
  const fs::path dir = scratch("resolved");
  ASSERT_EQ(run({"check-operator", "--samples", "10", "--seed", "42", "--out", dir.string()}).code, 0);
  const auto doc = nlohmann::json::parse(io::read_file(dir / "resolved_config.json"));
  EXPECT_EQ(doc["seed"], 42);
  EXPECT_EQ(doc["check"]["samples"], 10);
  EXPECT_EQ(doc["output"]["dir"], dir.string());
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Cli, ParseErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"solve", "--bogus"}).code, 2);
  EXPECT_EQ(run({"analyze", "--mode", "everything", "--out", scratch("mode").string()}).code, 2);
  EXPECT_EQ(run({"solve", "--config", "/nonexistent/file.json"}).code, 2);
}

TEST(Verify, DefaultConfigPasses) {
  const fs::path dir = scratch("verify");
  const Outcome r = run({"verify", "--set", "g.expr=2*t/(1+t^2)", "--out", dir.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const std::string rep = io::read_file(dir / "verify_report.txt");
  EXPECT_NE(rep.find("[CHAIN]"), std::string::npos);
  EXPECT_NE(rep.find("direction=forward"), std::string::npos);
  EXPECT_NE(rep.find("direction=backward"), std::string::npos);
  EXPECT_NE(rep.find("result=pass"), std::string::npos);
}

TEST(Verify, DecreasingPhiIsAFailure) {
  const Outcome r = run({"verify", "--set", "verify.phis=[\"-t\"]", "--out", scratch("verify_bad").string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Solve, WritesCsvAndPgm) {
  const fs::path dir = scratch("solve");
  const Outcome r = run({"solve", "--set", "domain.params=[1,1,2,2]", "--set", "b.expr=x1^(4/3) - x2^(4/3)", "--set",
                     "grid.h=0.0625", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("converged=true"), std::string::npos);

  const std::string csv = io::read_file(dir / "solution.csv");
  EXPECT_EQ(csv.rfind("x,y,v,u\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    double x, y, v, u;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &y, &v, &u), 4) << line;
    EXPECT_NEAR(v, std::pow(x, 4.0 / 3) - std::pow(y, 4.0 / 3), 5e-2);
    EXPECT_EQ(u, v);
    ++rows;
  }
  EXPECT_EQ(rows, 15 * 15);

  const std::string pgm = io::read_file(dir / "u.pgm");
  ASSERT_EQ(pgm.rfind("P5\n# min=", 0), 0u);
  const auto body = pgm.find("255\n");
  ASSERT_NE(body, std::string::npos);
  EXPECT_NE(pgm.find("\n17 17\n"), std::string::npos);
  EXPECT_EQ(pgm.size() - body - 4, 17u * 17u);
}

TEST(Solve, NonConvergenceExitsOne) {
  const Outcome r = run({"solve", "--set", "b.expr=x1^2", "--set", "grid.max_iters=1", "--set", "grid.h=0.125", "--out",
                     scratch("solve_fail").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("converged=false"), std::string::npos);
}

TEST(Solve, OnlyInfinityLaplacian) {
  EXPECT_EQ(run({"solve", "--set", "operator.name=laplace", "--out", scratch("solve_op").string()}).code, 2);
}

TEST(Transform, QueriesAndTable) {
  const fs::path dir = scratch("transform");
  Outcome r = run({"transform", "--set", "g.expr=2*t/(1+t^2)", "--phi", "1", "--phi-inv", "1.3333333333333333", "--out",
               dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string q = io::read_file(dir / "transform_queries.csv");
  double in = 0, val = 0;
  std::istringstream s(q);
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "kind,input,output");
  std::getline(s, line);
  ASSERT_EQ(std::sscanf(line.c_str(), "phi,%lf,%lf", &in, &val), 2);
  EXPECT_NEAR(val, 4.0 / 3.0, 1e-10);
  std::getline(s, line);
  ASSERT_EQ(std::sscanf(line.c_str(), "phi_inv,%lf,%lf", &in, &val), 2);
  EXPECT_NEAR(val, 1.0, 1e-9);
  EXPECT_EQ(io::read_file(dir / "transform.csv").rfind("t,G,Phi,Phi_prime\n", 0), 0u);

  r = run({"transform", "--phi", "100", "--out", dir.string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Analyze, Modes) {
  const fs::path dir = scratch("analyze");
  const std::vector<std::string> example = {"--set", "domain.shape=disc", "--set", "domain.params=[0,0,1]", "--set",
                                          "f.expr=exp(t + t^3/3)/(1 + t^2)^3", "--set", "g.expr=2*t/(1+t^2)",
                                          "--set", "analysis.interior_side=16", "--out", dir.string()};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), example.begin(), example.end());
    return run(head);
  };
  Outcome r = with({"analyze", "--mode", "nonexistence"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("verdict="), std::string::npos);
  const std::string rep = io::read_file(dir / "nonexistence.txt");
  for (const char* sec : {"[ELL]", "[ETA]", "[H]", "[ZETA]", "[S]", "[R]", "[VERDICT]"})
    EXPECT_NE(rep.find(sec), std::string::npos) << sec;
  EXPECT_EQ(io::read_file(dir / "eta.csv").rfind("t,eta,H\n", 0), 0u);
  EXPECT_EQ(io::read_file(dir / "zeta.csv").rfind("a,zeta\n", 0), 0u);

  r = with({"analyze", "--mode", "existence-hypotheses"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("verdict = violated"), std::string::npos);

  r = run({"analyze", "--mode", "uniqueness", "--set", "f.expr=-t", "--out", dir.string()});
  EXPECT_EQ(r.code, 0);
  r = run({"analyze", "--mode", "uniqueness", "--set", "f.expr=t", "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  r = run({"analyze", "--mode", "uniqueness", "--set", "f.expr=x1 + t", "--out", dir.string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Analyze, NegativeForcingIsAFailure) {
  const Outcome r = run({"analyze", "--set", "f.expr=-1", "--set", "analysis.interior_side=8", "--out",
                     scratch("analyze_neg").string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Determinism, RerunsAreByteIdentical) {
  const fs::path dir = scratch("determinism");
  const std::vector<std::vector<std::string>> commands = {
      {"check-operator", "--op", "k-hessian:2", "--samples", "300", "--seed", "3"},
      {"verify", "--set", "g.expr=2*t/(1+t^2)", "--seed", "5"},
      {"solve", "--set", "b.expr=x1^2 - x2", "--set", "g.expr=2*t/(1+t^2)", "--set", "grid.h=0.125"},
      {"analyze", "--mode", "nonexistence", "--set", "f.expr=exp(t + t^3/3)/(1 + t^2)^3", "--set",
       "g.expr=2*t/(1+t^2)", "--set", "analysis.interior_side=8"},
      {"transform", "--set", "g.expr=2*t/(1+t^2)", "--phi", "0.5"},
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const fs::path out = dir / std::to_string(i);
    auto args = commands[i];
    args.push_back("--out");
    args.push_back(out.string());
    const Outcome a = run(args);
    ASSERT_NE(a.code, 2) << a.err;
    const auto first = snapshot(out);
    const Outcome b = run(args);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(first, snapshot(out)) << commands[i][0];
  }
}

TEST(Binary, ExitCodes) {
  const fs::path dir = scratch("binary");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_binary("check-operator --op infinity --samples 1000 --seed 7" + out), 0);
  EXPECT_EQ(run_binary("check-operator --op m-laplace:1" + out), 0);
  EXPECT_EQ(run_binary("check-operator --op k-hessian:9 -n 3" + out), 2);
  EXPECT_EQ(run_binary("check-operator --set no.such=1" + out), 2);
  EXPECT_EQ(run_binary("--help"), 0);
}
