#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "strokeml/pipeline/bundle.hpp"
#include "strokeml/pipeline/report.hpp"
#include "support.hpp"

using namespace strokeml;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string output;
};

Outcome cli(const std::string& args, const fs::path& dir) {
    const auto log = dir / "cli.log";
    const std::string cmd = std::string(STROKEML_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fixtures::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
        fixtures::write_csv(dir / "f.csv", fixtures::blobs(30, 3, 4, 6.0, 1));
    }
    fs::path dir;
};

}  // namespace

TEST_F(Cli, RunWritesReportsAndBundle) {
    write_text(dir / "run.yaml", "features: f.csv\nextractor: ResNet50\nseed: 3\nclassifier: GNB\nevaluation: {k: 5}\n");
    const auto out = dir / "out";
    const auto r = cli("run --config " + (dir / "run.yaml").string() + " --out " + out.string() + " --format csv svg", dir);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("ResNet50+None+GNB"), std::string::npos);
    EXPECT_NE(r.output.find("Mean"), std::string::npos);
    for (const char* f : {"model.bundle", "records.json", "summary.csv", "roc.csv", "summary.svg"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto b = pipeline::load_bundle(out / "model.bundle");
    EXPECT_EQ(b.record.label, "ResNet50+None+GNB");
    EXPECT_EQ(pipeline::load_records(out / "records.json").size(), 1u);

    // Re-emitting from records.json reproduces the CSV summary.
    const auto again = dir / "again";
    ASSERT_EQ(cli("report --records " + (out / "records.json").string() + " --out " + again.string(), dir).code, 0);
    std::ifstream a(out / "summary.csv"), c(again / "summary.csv");
    std::stringstream sa, sc;
    sa << a.rdbuf();
    sc << c.rdbuf();
    EXPECT_EQ(sa.str(), sc.str());
}

TEST_F(Cli, SeedOverrideIsRecorded) {
    write_text(dir / "run.yaml", "features: f.csv\nseed: 3\nclassifier: KNN\nevaluation: {k: 3}\n");
    const auto out = dir / "out";
    ASSERT_EQ(cli("cv --config " + (dir / "run.yaml").string() + " --seed 99 --out " + out.string(), dir).code, 0);
    EXPECT_EQ(pipeline::load_records(out / "records.json")[0].config.seed, 99u);
}

TEST_F(Cli, GridCurveAndBench) {
    write_text(dir / "grid.yaml",
               "seed: 1\nevaluation: {k: 3}\ngrid:\n  features: [f.csv]\n  optimizers: [None, PCA, LDA]\n"
               "  classifiers: [GNB, DT]\n");
    write_text(dir / "run.yaml", "features: f.csv\nseed: 3\nclassifier: DT\nevaluation: {k: 3}\n");
    auto r = cli("grid --config " + (dir / "grid.yaml").string() + " --parallel 2 --out " + (dir / "g").string(), dir);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("<- best"), std::string::npos);
    r = cli("curve --config " + (dir / "run.yaml").string() + " --fractions 0.5,1.0 --out " + (dir / "c").string(), dir);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "c" / "learning_curve.csv"));
    r = cli("bench --config " + (dir / "run.yaml").string() + " --repetitions 3 --out " + (dir / "b").string(), dir);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("PM: "), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "b" / "bench.csv"));
}

TEST_F(Cli, Inspect) {
    const auto r = cli("inspect " + (dir / "f.csv").string(), dir);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("rows:      90"), std::string::npos);
    EXPECT_NE(r.output.find("class Ischemic: 30"), std::string::npos);

    write_text(dir / "bad.csv", "id,label,f0\na,Normal,1\nb,Ischemic,x\n");
    const auto bad = cli("inspect " + (dir / "bad.csv").string(), dir);
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.output.find("row 2"), std::string::npos) << bad.output;
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(cli("", dir).code, 1);
    EXPECT_EQ(cli("frobnicate", dir).code, 1);
    EXPECT_EQ(cli("--help", dir).code, 0);
    EXPECT_EQ(cli("run --config " + (dir / "missing.yaml").string(), dir).code, 1);

    write_text(dir / "noseed.yaml", "features: f.csv\nclassifier: GNB\n");
    EXPECT_EQ(cli("run --config " + (dir / "noseed.yaml").string() + " --out " + (dir / "o").string(), dir).code, 1);

    write_text(dir / "nofile.yaml", "features: absent.csv\nseed: 1\nclassifier: GNB\n");
    EXPECT_EQ(cli("run --config " + (dir / "nofile.yaml").string() + " --out " + (dir / "o").string(), dir).code, 2);

    // Every cell failing is a runtime failure of the whole grid.
    write_text(dir / "grid.yaml", "seed: 1\ngrid:\n  features: [absent.csv]\n  optimizers: [None]\n  classifiers: [GNB]\n");
    EXPECT_EQ(cli("grid --config " + (dir / "grid.yaml").string() + " --out " + (dir / "o").string(), dir).code, 2);

    write_text(dir / "run.yaml", "features: f.csv\nseed: 1\nclassifier: GNB\n");
    EXPECT_EQ(cli("bench --config " + (dir / "run.yaml").string() + " --repetitions 2 --out " + (dir / "o").string(), dir)
                  .code,
              1);
}
