#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gkm/cli.hpp"

using namespace gkm;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "gkm");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), {}};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("gkm_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

} // namespace

TEST_F(CliTest, RunWritesTranscriptAndCosts) {
    const auto r = cli({"run", "--scheme", "oft-secure", "--members", "6", "--events", "20", "--out-dir", dir_.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "oft-secure_transcript.csv"));
    const auto costs = slurp(dir_ / "oft-secure_costs.csv");
    EXPECT_EQ(costs.rfind("scheme,height,event", 0), 0u);
    EXPECT_EQ(r.out, costs);
    EXPECT_FALSE(fs::exists(dir_ / "oft-secure_costs.csv.tmp"));
}

TEST_F(CliTest, RunFromScriptIsDeterministic) {
    fs::create_directories(dir_);
    std::ofstream(dir_ / "s.txt") << "join 1\njoin 2\njoin 3\nleave 2\n";
    const auto a = cli({"run", "--scheme", "lkh", "--script", (dir_ / "s.txt").string(), "--out-dir", (dir_ / "a").string()});
    const auto b = cli({"run", "--scheme", "lkh", "--script", (dir_ / "s.txt").string(), "--out-dir", (dir_ / "b").string()});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    ASSERT_EQ(b.code, kExitOk) << b.err;
    EXPECT_EQ(slurp(dir_ / "a" / "lkh_transcript.csv"), slurp(dir_ / "b" / "lkh_transcript.csv"));
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, PerfectHeightPlainFormat) {
    const auto r = cli({"run", "--scheme", "lkh-bottomup", "--perfect-height", "4", "--event", "leave", "--format", "plain",
                        "--out-dir", dir_.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "lkh-bottomup_costs.txt"));
    EXPECT_NE(r.out.find("leave"), std::string::npos);
    EXPECT_EQ(r.out.find("join"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(cli({}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--scheme", "gkmp"}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--key-width", "12", "--out-dir", dir_.string()}).code, kExitUsage);
    EXPECT_EQ(cli({"run", "--script", (dir_ / "missing.txt").string()}).code, kExitUsage);
    EXPECT_EQ(cli({"compare", "--heights", "x"}).code, kExitUsage);
    EXPECT_EQ(cli({"attack", "--scenario", "nope"}).code, kExitUsage);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(CliTest, CompareReportsRatios) {
    const auto r = cli({"compare", "--heights", "10,12"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("0.667"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("0.900"), std::string::npos) << r.out;
}

TEST_F(CliTest, AttackVerdicts) {
    const auto oft = cli({"attack", "--scenario", "horng"});
    EXPECT_EQ(oft.code, kExitOk) << oft.out;
    EXPECT_NE(oft.out.find("SUCCESS (expected)"), std::string::npos) << oft.out;
    const auto secure = cli({"attack", "--scenario", "kuchen2", "--scheme", "oft-secure"});
    EXPECT_EQ(secure.code, kExitOk) << secure.out;
    EXPECT_NE(secure.out.find("RESISTED (expected)"), std::string::npos) << secure.out;
}
