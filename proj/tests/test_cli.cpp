// Runs the otcert binary and checks exit codes and output.

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Run {
  int code = -1;
  std::string out;
};

Run otcert(const std::string& args) {
  std::string cmd = std::string(OTCERT_BINARY) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  Run r;
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("otcert_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
};

const char* kZeroDiagonal = R"({"mu": ["1/2", "1/2"], "nu": ["1/2", "1/2"], "cost": [[0, 1], [1, 0]]})";
const char* kAntiDiagonal =
    R"({"mu": ["1/2", "1/2"], "nu": ["1/2", "1/2"], "cost": [[0, 1], [1, 0]], "plan": [[0, "1/2"], ["1/2", 0]]})";

TEST_F(Cli, HelpAndUsageErrors) {
  auto help = otcert("--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("check"), std::string::npos);
  EXPECT_EQ(otcert("").code, 2);
  EXPECT_EQ(otcert("frobnicate").code, 2);
  EXPECT_EQ(otcert("--rational --float solve x.json").code, 2);
  EXPECT_EQ(otcert("gen nope").code, 2);
}

TEST_F(Cli, SolveExitCodes) {
  auto ok = otcert("--json solve " + write("z.json", kZeroDiagonal));
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(Json::parse(ok.out)["data"]["value"], "0");

  auto none = otcert("solve " + write("n.json", R"({"mu": [1], "nu": [1], "cost": [["inf"]]})"));
  EXPECT_EQ(none.code, 1);
  EXPECT_NE(none.out.find("no finite plan"), std::string::npos);

  EXPECT_EQ(otcert("solve " + (dir_ / "missing.json").string()).code, 2);
  EXPECT_EQ(otcert("solve " + write("bad.json", "{not json")).code, 2);
  auto mismatch = otcert("solve " + write("m.json", R"({"mu": [1], "nu": [1], "cost": [[0, 1]]})"));
  EXPECT_EQ(mismatch.code, 2);
  EXPECT_NE(mismatch.out.find("error:"), std::string::npos);
}

TEST_F(Cli, CheckReportsVerdicts) {
  auto pass = otcert("check " + write("z.json", kZeroDiagonal));
  EXPECT_EQ(pass.code, 0) << pass.out;
  EXPECT_NE(pass.out.find("[pass] (4) strongly c-monotone"), std::string::npos);

  auto fail = otcert("--json check " + write("a.json", kAntiDiagonal));
  EXPECT_EQ(fail.code, 1);
  auto j = Json::parse(fail.out);
  EXPECT_EQ(j["verdicts"][1]["claim"], "(2) c-monotone");
  EXPECT_TRUE(j["verdicts"][1]["witness"].contains("cycle"));
  EXPECT_TRUE(j["timings_ms"].contains("strong"));

  auto plan = write("p.json", R"({"plan": [["1/2", 0], [0, "1/2"]]})");
  EXPECT_EQ(otcert("check " + write("a2.json", kAntiDiagonal) + " --plan " + plan).code, 0);
  auto bad_plan = write("bp.json", R"([[1, 0], [0, 0]])");
  EXPECT_EQ(otcert("check " + write("z2.json", kZeroDiagonal) + " --plan " + bad_plan).code, 2);
  EXPECT_EQ(otcert("--z-size 2 --lambda 1 1 1 check " + write("z3.json", kZeroDiagonal)).code, 2);
  EXPECT_EQ(otcert("--z-size 2 --lambda 1/2 1 --trials 10 --seed 3 check " + write("z4.json", kZeroDiagonal)).code, 0);
}

TEST_F(Cli, ImproveTrajectory) {
  auto r = otcert("--json improve " + write("a.json", kAntiDiagonal));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(Json::parse(r.out)["data"]["trajectory"], Json::parse(R"(["1", "0"])"));
  EXPECT_EQ(otcert("improve " + write("z.json", kZeroDiagonal)).code, 2);  // no plan
}

TEST_F(Cli, GenFeedsCheck) {
  auto out = (dir_ / "ap.json").string();
  EXPECT_EQ(otcert("gen ap -N 3 --a 1 --b 2 --plan shift -o " + out).code, 0);
  EXPECT_EQ(otcert("check " + out).code, 1);
  EXPECT_EQ(otcert("gen ap -N 3 --a 2 --b 1 --plan shift -o " + out).code, 0);
  EXPECT_EQ(otcert("check " + out).code, 0);
  EXPECT_EQ(otcert("--float check " + out).code, 0);

  auto gen = otcert("gen zero-one -N 2");
  EXPECT_EQ(gen.code, 0);
  EXPECT_EQ(Json::parse(gen.out)["cost"][0][1], "inf");
  EXPECT_EQ(otcert("gen ap -N 1").code, 2);
}

TEST_F(Cli, Kellerer) {
  auto r = otcert("--json kellerer " +
                  write("k.json", R"({"weights": [["1/2","1/2"],["1/2","1/2"],["1/2","1/2"]],
                                     "B": [[1,0,0],[0,1,0],[0,0,1]]})"));
  EXPECT_EQ(r.code, 0);
  auto j = Json::parse(r.out);
  EXPECT_EQ(j["data"]["P"], "3/4");
  EXPECT_EQ(j["data"]["L"], "1");
  EXPECT_EQ(otcert("kellerer " + write("bad.json", R"({"weights": [[1]], "B": []})")).code, 2);
}

TEST_F(Cli, BatchRunsEveryFile) {
  write("a.json", kAntiDiagonal);
  write("b.json", kZeroDiagonal);
  write("notes.txt", "ignored");
  auto r = otcert("--json --batch " + dir_.string() + " check");
  EXPECT_EQ(r.code, 1);
  auto j = Json::parse(r.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["file"], "a.json");
  EXPECT_EQ(j[0]["report"]["pass"], false);
  EXPECT_EQ(j[1]["report"]["pass"], true);

  write("c.json", "{broken");
  EXPECT_EQ(otcert("--batch " + dir_.string() + " solve").code, 2);
}

}  // namespace
