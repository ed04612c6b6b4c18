#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "gpvol/cli.hpp"
#include "gpvol/csv.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/hedging.hpp"

namespace fs = std::filesystem;
using namespace gpvol;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result gpvol_run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("gpvol_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ::setenv("SOURCE_DATE_EPOCH", "1000000000", 1);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_spec(const std::string& extra = "") const {
        const std::string p = path("market.txt");
        write_file(p,
                   "spot=1000\nrate=0.02\ndays=120\nstrikes=900,950,1000,1050,1100\nexpiries=45,100,250\n"
                   "kinds=call,put\nspread=0.05\nseed=7\n" + extra);
        return p;
    }

    fs::path dir_;
};

std::size_t csv_rows(const std::string& file) { return csv::parse(read_file(file)).rows.size(); }

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(gpvol_run({}).code, cli::kExitUsage);
    EXPECT_EQ(gpvol_run({"bogus"}).code, cli::kExitUsage);
    EXPECT_EQ(gpvol_run({"synth", "--spec", path("missing.txt"), "--out", path("o")}).code, cli::kExitUsage);
    write_file(path("bad.txt"), "spot=abc\n");
    const Result r = gpvol_run({"synth", "--spec", path("bad.txt"), "--out", path("o")});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("spot"), std::string::npos);
    EXPECT_EQ(gpvol_run({"hedge", "--quotes", path("none.csv"), "--bs", "--out", path("h")}).code, cli::kExitUsage);
    EXPECT_EQ(gpvol_run({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, SynthIsDeterministic) {
    const std::string spec = write_spec();
    ASSERT_EQ(gpvol_run({"synth", "--spec", spec, "--out", path("a")}).code, 0);
    ASSERT_EQ(gpvol_run({"synth", "--spec", spec, "--out", path("b")}).code, 0);
    EXPECT_EQ(read_file(path("a/quotes.csv")), read_file(path("b/quotes.csv")));
    EXPECT_GT(csv_rows(path("a/quotes.csv")), 100u);
    EXPECT_TRUE(fs::exists(path("a/manifest.txt")));
}

TEST_F(CliTest, PrepareWritesOneFilePerSet) {
    ASSERT_EQ(gpvol_run({"synth", "--spec", write_spec(), "--out", path("m")}).code, 0);
    ASSERT_EQ(gpvol_run({"prepare", "--quotes", path("m/quotes.csv"), "--scheme", "mtm", "--out", path("mtm")}).code, 0);
    EXPECT_EQ(csv_rows(path("mtm/partition.csv")), 18u);
    ASSERT_EQ(gpvol_run({"prepare", "--quotes", path("m/quotes.csv"), "--scheme", "ts", "--k", "10", "--out",
                         path("ts")})
                  .code,
              0);
    const csv::Table index = csv::parse(read_file(path("ts/partition.csv")));
    std::size_t train = 0;
    for (const auto& row : index.rows) {
        train += row[2] == "train";
        EXPECT_TRUE(fs::exists(path("ts/" + row[4])));
    }
    EXPECT_EQ(index.rows.size(), 10u);
    EXPECT_EQ(train, 9u);
    EXPECT_EQ(gpvol_run({"prepare", "--quotes", path("m/quotes.csv"), "--scheme", "nope", "--out", path("x")}).code,
              cli::kExitUsage);
}

TEST_F(CliTest, ModelFileRoundTrip) {
    const cli::ModelFile m{builtin_put_model(), TerminalBinding::Put};
    const cli::ModelFile back = cli::parse_model_file(cli::format_model_file(m));
    EXPECT_EQ(back.binding, TerminalBinding::Put);
    EXPECT_EQ(format(back.tree, TerminalBinding::Put), format(m.tree, TerminalBinding::Put));
    EXPECT_THROW(cli::parse_model_file("(+ x0 x1)\n"), ParseError);
    EXPECT_EQ(cli::load_model("builtin-call").binding, TerminalBinding::Call);
}

TEST_F(CliTest, ExactVolModelMatchesBsBaseline) {
    write_file(path("calm.txt"),
               "spot=1000\nrate=0.02\ndays=60\nstrikes=950,1000,1050\nexpiries=120,250\nkinds=call\nvol=0.2\n");
    ASSERT_EQ(gpvol_run({"synth", "--spec", path("calm.txt"), "--out", path("m")}).code, 0);
    write_file(path("flat.expr"), "# binding=call\n0.2\n");
    ASSERT_EQ(gpvol_run({"hedge", "--quotes", path("m/quotes.csv"), "--model", path("flat.expr"), "--kind", "call",
                         "--long", "--out", path("h")})
                  .code,
              0);
    const auto cells = parse_report_long(read_file(path("h/report_long.csv")));
    ASSERT_FALSE(cells.empty());
    std::size_t pairs = 0;
    for (const auto& a : cells) {
        if (a.model != "BS") continue;
        for (const auto& b : cells) {
            if (b.model == "GP" && b.kind == a.kind && b.cls == a.cls && b.strategy == a.strategy &&
                b.frequency == a.frequency) {
                EXPECT_NEAR(a.error, b.error, 1e-8);
                ++pairs;
            }
        }
    }
    EXPECT_GT(pairs, 0u);
}

TEST_F(CliTest, EndToEndIsReproducible) {
    const std::string spec = write_spec("vol_model=smile\nvol_curvature=0.5\n");
    write_file(path("gp.txt"), "population_size=30\noffspring_size=60\nmax_generations_static=6\nmax_generations_dynamic=18\ngenerations_per_sample=2\n");
    for (const std::string run : {"r1", "r2"}) {
        const std::string base = path(run);
        ASSERT_EQ(gpvol_run({"synth", "--spec", spec, "--out", base + "/data"}).code, 0);
        ASSERT_EQ(gpvol_run({"prepare", "--quotes", base + "/data/quotes.csv", "--scheme", "mtm", "--out",
                             base + "/part"})
                      .code,
                  0);
        const Result t = gpvol_run({"train", "--partition", base + "/part", "--config", path("gp.txt"), "--policy",
                                    "arss", "--seeds", "2", "--out", base + "/train"});
        ASSERT_EQ(t.code, 0) << t.err;
        const Result h = gpvol_run({"hedge", "--quotes", base + "/data/quotes.csv", "--model",
                                    base + "/train/best.expr", "--kind", "call", "--long", "--out", base + "/hedge"});
        ASSERT_EQ(h.code, 0) << h.err;
        ASSERT_EQ(gpvol_run({"report", "--summary", base + "/train/summary.csv", "--out", base + "/summary.txt"}).code,
                  0);
    }
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(path("r1"))) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.txt") continue;
        const fs::path rel = fs::relative(e.path(), path("r1"));
        EXPECT_EQ(read_file(e.path().string()), read_file((fs::path(path("r2")) / rel).string())) << rel;
        ++compared;
    }
    EXPECT_GT(compared, 20u);
}
