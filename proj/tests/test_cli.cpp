#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crdiff/cli.hpp"

using namespace crdiff::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "crdiff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("crdiff_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  std::string out_path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST(ParseArgs, MinimalSimulateFlags) {
  const char* argv[] = {"crdiff", "simulate", "--model", "heisenberg", "--n", "1", "--t", "1",
                        "--steps", "1000", "--paths", "100", "--seed", "7"};
  const ParsedArgs a = parse_args(14, argv);
  EXPECT_EQ(a.config.command(), "simulate");
  EXPECT_EQ(a.config.text("model.name"), "heisenberg");
  EXPECT_EQ(a.config.integer("sim.steps"), 1000);
  EXPECT_EQ(a.config.integer("sim.paths"), 100);
  EXPECT_EQ(a.config.unsigned_integer("sim.seed"), 7u);
  EXPECT_DOUBLE_EQ(a.config.real("sim.t"), 1.0);
}

TEST(ParseArgs, RejectsInvalidValuesNamingTheKey) {
  RunConfig cfg;
  try {
    cfg.set("sim.steps", "-5");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sim.steps");
  }
  EXPECT_THROW(cfg.set("sim.t", "0"), ConfigError);
  EXPECT_THROW(cfg.set("sim.paths", "ten"), ConfigError);
  EXPECT_THROW(cfg.set("model.name", "sphere"), ConfigError);
  EXPECT_THROW(cfg.set("sim.terminal_only", "maybe"), ConfigError);
  EXPECT_THROW(cfg.set("charfn.lambdas", "1,x"), ConfigError);
  EXPECT_THROW(cfg.set("nosuch.key", "1"), ConfigError);
}

TEST(RunConfigText, IniRoundTrip) {
  RunConfig cfg;
  cfg.set("run.command", "dirichlet");
  cfg.set("sim.seed", "123");
  cfg.set("sim.start", "0.1, -0.2, 0.3");
  cfg.set("charfn.lambdas", "0.25,4");
  cfg.set("sim.terminal_only", "true");
  cfg.set("dirichlet.horizon", "2.5");
  RunConfig back;
  load_config_text(cfg.to_ini(), back);
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(back.to_ini(), cfg.to_ini());
  EXPECT_EQ(back.reals("sim.start"), (std::vector<double>{0.1, -0.2, 0.3}));
}

TEST(RunConfigText, RootKeysUseFlagNames) {
  RunConfig cfg;
  load_config_text("steps = 20\nreunitarize-every = 3\n[model]\nn = 2\n", cfg);
  EXPECT_EQ(cfg.integer("sim.steps"), 20);
  EXPECT_EQ(cfg.integer("sim.reunitarize_every"), 3);
  EXPECT_EQ(cfg.integer("model.n"), 2);
  EXPECT_THROW(load_config_text("[sim]\nbogus = 1\n", cfg), ConfigError);
}

TEST(RunConfigText, HashIgnoresWorkersAndOutput) {
  RunConfig a;
  RunConfig b = a;
  b.set("run.workers", "8");
  b.set("run.output", "/tmp/x.csv");
  EXPECT_EQ(a.hash(), b.hash());
  b.set("sim.seed", "99");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST_F(CliFiles, ConfigFileStepsNegativeExitsTwo) {
  const auto cfg = write_file("bad.ini", "[sim]\nsteps = -5\n");
  const Result r = run_cli({"simulate", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("steps"), std::string::npos);
}

TEST_F(CliFiles, FlagOverridesFile) {
  const auto cfg = write_file("seed.ini", "seed = 1\n");
  const char* argv[] = {"crdiff", "simulate", "--config", nullptr, "--seed", "9"};
  const std::string p = cfg.string();
  argv[3] = p.c_str();
  EXPECT_EQ(parse_args(6, argv).config.unsigned_integer("sim.seed"), 9u);
  const Result r = run_cli({"simulate", "--config", p, "--dump-config"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("seed = 1"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli({"simulate", "--bogus", "1"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--steps", "abc"}).code, 2);
  EXPECT_EQ(run_cli({"teleport"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--config", "/nonexistent/file.ini"}).code, 2);
  const Result r = run_cli({"simulate", "--n", "1", "--start", "0,0", "--output", "-"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sim.start"), std::string::npos);
}

TEST(Cli, HelpAndDump) {
  const Result h = run_cli({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("--steps"), std::string::npos);
  const Result d = run_cli({"density", "--dump-config"});
  EXPECT_EQ(d.code, 0);
  RunConfig back;
  load_config_text(d.out, back);
  EXPECT_EQ(back.command(), "density");
}

TEST(Cli, CheckModelReportsResiduals) {
  const Result r = run_cli({"check-model", "--model", "heisenberg", "--n", "2", "--points", "20", "--output", "-"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  EXPECT_EQ(r.out.rfind("# crdiff ", 0), 0u);
}

TEST(Cli, OutputHeaderLines) {
  const Result r = run_cli({"simulate", "--steps", "10", "--paths", "3", "--seed", "7", "--output", "-"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string l1, l2, l3, l4, l5;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  std::getline(in, l4);
  EXPECT_EQ(l1, std::string("# crdiff ") + kVersion);
  EXPECT_EQ(l2, "# command: simulate");
  EXPECT_EQ(l3.rfind("# config_hash: ", 0), 0u);
  EXPECT_EQ(l4, "# seed: 7");
  while (std::getline(in, l5) && l5.rfind("#", 0) == 0) {
  }
  EXPECT_EQ(l5.rfind("path_id,time,u1,v1,t", 0), 0u);
}

TEST(Cli, RuntimeFailureExitsOne) {
  // every path capped: too few samples for a density estimate
  const Result r = run_cli({"density", "--steps", "10", "--paths", "200", "--cap", "1e-9", "--output", "-"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, OtherCommandsRun) {
  for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{
           {"density", "--steps", "20", "--paths", "500", "--grid", "5"},
           {"line-integral", "--steps", "20", "--paths", "50", "--form", "area"},
           {"charfn", "--steps", "20", "--paths", "200"},
           {"check-hormander", "--n", "2", "--points", "3"},
           {"check-smoothness", "--form", "area", "--max-order", "3"},
           {"dirichlet", "--mode", "probe", "--start", "1,0,0", "--dt", "1e-5", "--paths", "50"},
           {"dirichlet", "--mode", "exit_time", "--dt", "0.01", "--paths", "50", "--radius", "0.5"},
           {"simulate", "--model", "gauge_phase", "--steps", "10", "--paths", "5", "--format", "text"}}) {
    auto a = args;
    a.insert(a.end(), {"--output", "-"});
    const Result r = run_cli(a);
    EXPECT_EQ(r.code, 0) << args[0] << ": " << r.err;
    EXPECT_NE(r.out.find("seed="), std::string::npos) << r.out;
  }
  const Result s = run_cli({"check-smoothness", "--form", "area", "--max-order", "3", "--output", "-"});
  EXPECT_NE(s.out.find("(1,1bar)"), std::string::npos);
}

TEST(Cli, ProbeRequiresBoundaryStart) {
  const Result r = run_cli({"dirichlet", "--mode", "probe", "--start", "0,0,0", "--paths", "10", "--output", "-"});
  EXPECT_EQ(r.code, 2);
  const Result fine = run_cli({"dirichlet", "--mode", "probe", "--start", "1,0,0", "--probe-times", "1e-4",
                               "--paths", "10", "--output", "-"});
  EXPECT_EQ(fine.code, 2);
  EXPECT_NE(fine.err.find("dirichlet.dt"), std::string::npos);
}

TEST_F(CliFiles, ByteIdenticalAcrossWorkerCounts) {
  for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{
           {"simulate", "--model", "gauge_phase", "--steps", "20", "--paths", "300"},
           {"line-integral", "--steps", "50", "--paths", "500"},
           {"dirichlet", "--paths", "200", "--start", "0.1,0,0", "--dt", "0.005", "--records"}}) {
    std::string reference;
    for (const char* w : {"1", "4", "8", "1"}) {
      auto a = args;
      const std::string path = out_path(args[0] + "_" + w + ".csv");
      a.insert(a.end(), {"--workers", w, "--output", path});
      const Result r = run_cli(a);
      ASSERT_EQ(r.code, 0) << r.err;
      std::string bytes = slurp(path);
      if (args[0] == "dirichlet") bytes += slurp(out_path(args[0] + "_" + w + "_records.csv"));
      if (reference.empty())
        reference = bytes;
      else
        EXPECT_EQ(bytes, reference) << args[0] << " workers=" << w;
    }
    EXPECT_FALSE(reference.empty());
  }
}

TEST_F(CliFiles, DirichletFlaggedStillSucceeds) {
  const Result r = run_cli({"dirichlet", "--paths", "100", "--start", "0.9,0,0", "--horizon", "0.05", "--output",
                            out_path("d.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("FLAGGED"), std::string::npos) << r.out;
}

TEST_F(CliFiles, EnvironmentSetsDefaultOutputDirectory) {
  ::setenv(kOutputDirEnv, (dir_ / "nested").c_str(), 1);
  const Result r = run_cli({"simulate", "--steps", "5", "--paths", "2"});
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "nested" / "simulate.csv"));
  const Result t = run_cli({"simulate", "--steps", "5", "--paths", "2", "--format", "text", "--output",
                            out_path("sim.txt")});
  EXPECT_EQ(t.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "sim.txt"));
}
