#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "infharnack/errors.hpp"
#include "runner/runner.hpp"

namespace fs = std::filesystem;
namespace cli = infharnack::cli;
using infharnack::ParseError;

namespace {

class Workspace : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("infharnack_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }
    int run(const std::string& sub, const fs::path& config, const std::string& out, std::string* err = nullptr) const {
        cli::RunOptions opt;
        opt.subcommand = sub;
        opt.config = config;
        opt.out = dir_ / out;
        std::ostringstream es;
        const int code = cli::run(opt, es);
        if (err) *err = es.str();
        return code;
    }
    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    fs::path dir_;
};

const char* kSolve = R"([pair]
f = power 1 3
q = 0

[domain]
type = rectangle

[grid]
n = 33

[solver]
tol = 1e-9

[boundary]
data = linear 1 2 0
)";

}  // namespace

TEST(Config, LineNumbersInParseErrors) {
    try {
        const auto c = cli::Config::parse("[pair]\nf = power 1 3\n\n# comment\nq = zero\n");
        c.section("pair").num("q");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 5);
        EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
    }
    try {
        cli::Config::parse("[pair]\nf = power 1 3\nthis line is not ini\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
    const auto c = cli::Config::parse("[pair]\nf = zero\nqq = 1\n\n[extra]\na = 1\n");
    try {
        c.section("pair").restrict_to({"f", "g", "q"});
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("unknown key 'qq'"), std::string::npos);
    }
    EXPECT_THROW(c.restrict_sections({"pair"}), ParseError);
    EXPECT_THROW(c.section("domain"), ParseError);
    EXPECT_TRUE(c.optional("domain").entries().empty());
}

TEST(Config, ValueParsers) {
    const auto c = cli::Config::parse("[s]\nx = 1e-3\nn = 17\nb = yes\nv = 1 2 3\nbad = 1.5x\n");
    const auto& s = c.section("s");
    EXPECT_DOUBLE_EQ(s.num("x"), 1e-3);
    EXPECT_EQ(s.integer("n", 0), 17);
    EXPECT_TRUE(s.flag("b", false));
    EXPECT_EQ(s.numbers("v", {}), (std::vector<double>{1, 2, 3}));
    EXPECT_DOUBLE_EQ(s.num("missing", 4.0), 4.0);
    EXPECT_THROW(s.num("bad"), ParseError);

    EXPECT_DOUBLE_EQ(cli::parse_function("power 2 3", false, ".")(2.0), 16.0);
    EXPECT_DOUBLE_EQ(cli::parse_function("pwl 0:0 1:2", false, ".")(0.5), 1.0);
    EXPECT_THROW(cli::parse_function("power 2", false, ".", 7), ParseError);
    EXPECT_THROW(cli::parse_function("sin 1", false, "."), ParseError);
    EXPECT_DOUBLE_EQ(cli::parse_point_function("linear 1 2 3", {}, 0)({1, 1}), 6.0);
}

TEST_F(Workspace, SolveWritesReportManifestAndPlotData) {
    const auto cfg = write("solve.ini", kSolve);
    ASSERT_EQ(run("solve", cfg, "a"), cli::kExitPass);
    EXPECT_TRUE(fs::exists(dir_ / "a" / "report.csv"));
    const std::string manifest = slurp(dir_ / "a" / "manifest.txt");
    EXPECT_NE(manifest.find("converged"), std::string::npos);
    EXPECT_NE(manifest.find("# configuration"), std::string::npos);
    bool plot = false;
    for (const auto& e : fs::directory_iterator(dir_ / "a"))
        plot |= e.path().filename().string().rfind("plotdata_", 0) == 0;
    EXPECT_TRUE(plot);
}

TEST_F(Workspace, SameConfigGivesIdenticalReports) {
    const auto cfg = write("solve.ini", kSolve);
    ASSERT_EQ(run("solve", cfg, "a"), cli::kExitPass);
    ASSERT_EQ(run("solve", cfg, "b"), cli::kExitPass);
    EXPECT_EQ(slurp(dir_ / "a" / "report.csv"), slurp(dir_ / "b" / "report.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "manifest.txt"), slurp(dir_ / "b" / "manifest.txt"));
}

TEST_F(Workspace, ExitCodes) {
    const auto ok = write("ok.ini", "[pair]\nf = power 2 3\nq = 0\n");
    EXPECT_EQ(run("profile", ok, "p"), cli::kExitPass);
    // Keller-Osserman fails for a linear force.
    const auto ko = write("ko.ini", "[pair]\nf = power 1 1\nq = 0\n");
    EXPECT_EQ(run("profile", ko, "k"), cli::kExitFail);
    std::string err;
    const auto bad = write("bad.ini", "[pair]\nf = power 2 3\nq = 0\nwat = 1\n");
    EXPECT_EQ(run("profile", bad, "b", &err), cli::kExitError);
    EXPECT_NE(err.find("line 4"), std::string::npos) << err;
    EXPECT_EQ(run("profile", dir_ / "missing.ini", "m", &err), cli::kExitError);
    EXPECT_EQ(cli::exit_code(infharnack::Verdict::Inconclusive), cli::kExitInconclusive);
}

TEST_F(Workspace, HarnackWithoutItsBlockIsAConfigError) {
    const auto cfg = write("h.ini", R"([coefficients]
A = const 1
B = const 1
q = 0.5

[domain]
type = disk
radius = 0.1

[grid]
n = 33

[boundary]
data = const 1
)");
    std::string err;
    EXPECT_EQ(run("harnack", cfg, "h", &err), cli::kExitError);
    EXPECT_NE(err.find("missing [harnack] block"), std::string::npos) << err;
}

TEST_F(Workspace, BlockNotUsedByCommand) {
    const auto cfg = write("x.ini", std::string(kSolve) + "\n[chain]\nK = 6\n");
    std::string err;
    EXPECT_EQ(run("profile", cfg, "x", &err), cli::kExitError);
    EXPECT_NE(err.find("not used"), std::string::npos) << err;
}

TEST(Subcommands, AllEightListed) {
    const auto& s = cli::subcommands();
    EXPECT_EQ(s.size(), 8u);
    for (const char* name : {"check-conditions", "profile", "radial", "solve", "compare", "global-bound",
                             "harnack", "chain"})
        EXPECT_NE(std::find(s.begin(), s.end(), name), s.end()) << name;
}
