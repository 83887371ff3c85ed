#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "decaylab/config.hpp"
#include "decaylab/error.hpp"
#include "decaylab/runner.hpp"

namespace fs = std::filesystem;
using namespace decaylab;

namespace {

struct CliResult {
  int rc;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("decaylab_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) {
    const auto o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd = std::string(DECAYLAB_CLI_PATH) + " " + args + " >" + o.string() + " 2>" + e.string();
    const int st = std::system(cmd.c_str());
    CliResult r{WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(o), slurp(e)};
    fs::remove(o);
    fs::remove(e);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) m[fs::relative(e.path(), root).string()] = slurp(e.path());
  return m;
}

}  // namespace

TEST_F(Cli, Fig1MarkersListTransitionTimes) {
  const auto out = dir_ / "fig1";
  const auto r = run("reproduce-fig1 --out " + out.string());
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto markers = slurp(out / "fig1_markers.csv");
  EXPECT_EQ(markers.rfind("alpha,mu,t_transition,file\n", 0), 0u);
  EXPECT_NE(markers.find(",1.5,"), std::string::npos);
  EXPECT_NE(markers.find("158.11388300841898"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "fig1_checks.csv"));
}

TEST_F(Cli, EveryKindPassesWithDefaults) {
  for (const auto& k : experiment_kinds()) {
    const auto out = dir_ / k;
    const auto r = run(k + " --out " + out.string());
    EXPECT_EQ(r.rc, 0) << k << "\n" << r.out << r.err;
    EXPECT_TRUE(fs::exists(out / "summary.json")) << k;
  }
}

TEST_F(Cli, EmptyExperimentListIsANoOp) {
  const auto cfg = write("empty.yaml", "schema_version: 1\nexperiments: []\n");
  const auto out = dir_ / "out";
  const auto r = run("run --config " + cfg.string() + " --out " + out.string());
  EXPECT_EQ(r.rc, 0) << r.err;
  EXPECT_TRUE(!fs::exists(out) || fs::is_empty(out));
}

TEST_F(Cli, BadKeyIsReportedWithLineAndColumn) {
  const auto cfg = write("bad.yaml",
                         "schema_version: 1\n"
                         "experiments:\n"
                         "  - name: q\n"
                         "    kind: gd\n"
                         "    eta: 0.5\n"
                         "    etaa: 0.5\n");
  const auto r = run("run --config " + cfg.string() + " --out " + (dir_ / "out").string());
  EXPECT_EQ(r.rc, 3);
  EXPECT_NE(r.err.find("bad.yaml:6:5"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("etaa"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrorsExitWithThree) {
  EXPECT_EQ(run("no-such-command").rc, 3);
  EXPECT_EQ(run("gd --tolerance-profile sloppy").rc, 3);
  EXPECT_EQ(run("run --config " + (dir_ / "missing.yaml").string()).rc, 3);
}

TEST_F(Cli, UnwritableOutputDirectory) {
  const auto blocker = write("blocker", "not a directory");
  const auto r = run("gd --out " + (blocker / "sub").string());
  EXPECT_EQ(r.rc, 3);
  EXPECT_NE(r.err.find("not writable"), std::string::npos) << r.err;
}

TEST_F(Cli, OutputsDoNotDependOnThreadCount) {
  const auto cfg = write("mix.yaml",
                         "schema_version: 1\n"
                         "experiments:\n"
                         "  - {name: noisy, kind: sgd, eta: 0.5, sigma: 1.0, N: 100, replicas: 200}\n"
                         "  - {name: fuzz, kind: sqrtcmp, fuzz: {trials: 300, max_N: 16, mode: max}}\n"
                         "  - {name: energy, kind: hilbert, S_max: 1000, per_decade: 8, times: [0, 1, 10]}\n");
  const auto a = dir_ / "t1", b = dir_ / "t3";
  ASSERT_EQ(run("run --threads 1 --config " + cfg.string() + " --out " + a.string()).rc, 0);
  ASSERT_EQ(run("run --threads 3 --config " + cfg.string() + " --out " + b.string()).rc, 0);
  const auto ta = tree(a), tb = tree(b);
  ASSERT_FALSE(ta.empty());
  EXPECT_EQ(ta, tb);
}

TEST_F(Cli, KindSubcommandSkipsOtherEntries) {
  const auto cfg = write("two.yaml",
                         "schema_version: 1\n"
                         "experiments:\n"
                         "  - {name: a, kind: gd}\n"
                         "  - {name: b, kind: majorize}\n");
  const auto out = dir_ / "out";
  const auto r = run("gd --config " + cfg.string() + " --out " + out.string());
  ASSERT_EQ(r.rc, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "a" / "summary.json"));
  EXPECT_FALSE(fs::exists(out / "b"));
  EXPECT_NE(r.err.find("skipping experiment 'b'"), std::string::npos);
  EXPECT_EQ(slurp(out / "runs.csv").rfind("name,kind,verdict,files\n", 0), 0u);
}

TEST(ConfigParse, ScalarsNamesAndMarks) {
  const auto doc = parse_config(
      "schema_version: 1\n"
      "experiments:\n"
      "  - kind: gd\n"
      "    eta: 0.25\n"
      "    N: 10\n"
      "    label: '10'\n"
      "    on: true\n",
      "mem.yaml");
  ASSERT_EQ(doc.experiments.size(), 1u);
  const auto& e = doc.experiments[0];
  EXPECT_EQ(e.name, "gd_0");
  EXPECT_EQ(e.kind, "gd");
  EXPECT_FALSE(e.params.contains("kind"));
  EXPECT_TRUE(e.params.at("N").is_number_integer());
  EXPECT_TRUE(e.params.at("eta").is_number_float());
  EXPECT_TRUE(e.params.at("label").is_string());
  EXPECT_TRUE(e.params.at("on").is_boolean());
  EXPECT_EQ(e.marks.at("N").line, 5);
  EXPECT_EQ(e.marks.at("N").column, 5);
  EXPECT_EQ(e.count("N"), 10u);
  EXPECT_DOUBLE_EQ(e.number("missing", 2.5), 2.5);
}

TEST(ConfigParse, DocumentLevelErrors) {
  EXPECT_THROW(parse_config("experiments: []\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version: 2\nexperiments: []\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version: 1\nextra: 1\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version: 1\nexperiments:\n  - {eta: 1}\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version: 1\nexperiments:\n  - {name: a, kind: gd}\n  - {name: a, kind: gd}\n"),
               ConfigError);
  EXPECT_THROW(parse_config("schema_version: 1\nexperiments: [\n"), ConfigError);
  EXPECT_TRUE(parse_config("schema_version: 1\n").experiments.empty());
}

TEST(ConfigParse, AllowOnlyPointsAtTheKey) {
  const auto doc = parse_config("schema_version: 1\nexperiments:\n  - kind: gd\n    bogus: 1\n", "x.yaml");
  try {
    doc.experiments[0].allow_only({"eta"});
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x.yaml:4:5"), std::string::npos) << e.what();
  }
}
