#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("pdmph_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct RemoveScratch : ::testing::Environment {
  void TearDown() override { fs::remove_all(scratch_dir()); }
};
const auto* const remove_scratch = ::testing::AddGlobalTestEnvironment(new RemoveScratch);

std::string config(const std::string& name) { return std::string(PDMPH_SOURCE_DIR) + "/configs/" + name; }

Invocation run(const std::string& args) {
  const std::string cmd = "cd '" + scratch_dir().string() + "' && PDMPH_NO_COLOR=1 '" PDMPH_CLI "' " + args + " 2>/dev/null";
  Invocation r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

}  // namespace

TEST(Catalog, ListsEveryFamily) {
  const Invocation r = run("catalog list");
  ASSERT_EQ(r.code, 0);
  for (const char* name : {"harmonic3d", "morse", "scarf2", "gen-poschl-teller", "poschl-teller"})
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6);
}

TEST(Catalog, SingleFamilyAndUnknownName) {
  const Invocation one = run("catalog list --family morse");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(std::count(one.out.begin(), one.out.end(), '\n'), 2);
  EXPECT_NE(one.out.find("[-1, 8]"), std::string::npos);
  EXPECT_EQ(run("catalog list --family nope").code, 2);
  EXPECT_EQ(run("catalog").code, 2);
}

// Morse, alpha = 2, U = 1: f = 1, g(0) = 1, so V(0) = 1 - 1 - 2i g'(0) = 4i.
TEST(Generate, MorseDatasetAtOrigin) {
  const fs::path csv = scratch_dir() / "morse.csv";
  const Invocation r = run("generate --family morse --alpha 2 --n 181 --out '" + csv.string() + "'");
  ASSERT_EQ(r.code, 0);
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary["command"], "generate");
  std::ifstream in(csv);
  std::string header, line;
  std::getline(in, header);
  const auto cols = split(header, ',');
  const auto col = [&](const std::string& c) { return std::find(cols.begin(), cols.end(), c) - cols.begin(); };
  int rows = 0;
  bool seen = false;
  while (std::getline(in, line)) {
    const auto cells = split(line, ',');
    ASSERT_EQ(cells.size(), cols.size());
    if (std::stod(cells[0]) == 0.0) {
      EXPECT_NEAR(std::stod(cells[static_cast<std::size_t>(col("V_im"))]), 4.0, 1e-13);
      EXPECT_NEAR(std::stod(cells[static_cast<std::size_t>(col("V_re"))]), 0.0, 1e-12);
      seen = true;
    }
    ++rows;
  }
  EXPECT_EQ(rows, 181);
  EXPECT_TRUE(seen);
}

TEST(Generate, DomainErrors) {
  // harmonic3d needs mu > 0 on the whole grid
  EXPECT_EQ(run("generate --family harmonic3d --xmin -8 --xmax 8 --n 101 --out x.csv").code, 6);
  EXPECT_EQ(run("generate --family scarf2 --xmin 2 --xmax 1 --out x.csv").code, 3);
  EXPECT_EQ(run("generate --family scarf2 --mass constant:m0=-1 --out x.csv").code, 4);
  EXPECT_EQ(run("generate --family scarf2 --mass wobbly --out x.csv").code, 2);
  EXPECT_EQ(run("generate --family scarf2 --n 101 --mass rational:beta=2 --out x.csv").code, 0);
}

TEST(Config, StrictParsing) {
  const fs::path bad = scratch_dir() / "bad.json";
  std::ofstream(bad) << R"({"family": "scarf2", "alphaa": 1.0})";
  EXPECT_EQ(run("verify --config '" + bad.string() + "'").code, 2);
  std::ofstream(bad) << R"({"family": "scarf2", "alpha": 1.0,)";
  EXPECT_EQ(run("verify --config '" + bad.string() + "'").code, 2);
  EXPECT_EQ(run("verify --config '" + (scratch_dir() / "missing.json").string() + "'").code, 10);
  EXPECT_EQ(run("verify --family scarf2 --checks eq25,nonsense").code, 2);
  EXPECT_EQ(run("verify --family scarf2 --refine 101,abc").code, 2);
}

TEST(Verify, HermitianLimitPasses) {
  const fs::path out = scratch_dir() / "hermitian.json";
  const Invocation r = run("verify --config '" + config("hermitian_limit.json") + "' --jobs 4 --out '" + out.string() + "'");
  EXPECT_EQ(r.code, 0);
  const auto report = nlohmann::json::parse(slurp(out));
  for (const auto& c : report["checks"]) {
    const std::string v = c["verdict"];
    EXPECT_TRUE(v == "pass" || v == "reported-only") << c["name"] << " " << v;
  }
  EXPECT_TRUE(fs::exists(out.string() + ".meta.json"));
  EXPECT_EQ(report.dump().find("timestamp"), std::string::npos);
}

TEST(Verify, CorruptedPotentialFails) {
  const Invocation r = run("verify --config '" + config("corrupted_potential.json") + "'");
  EXPECT_EQ(r.code, 1);
  const auto report = nlohmann::json::parse(r.out);
  ASSERT_EQ(report["checks"].size(), 2u);
  for (const auto& c : report["checks"]) EXPECT_EQ(c["verdict"], "fail") << c["name"];
}

TEST(Verify, ReportsAreDeterministic) {
  const std::string args = "verify --family morse --refine 201,401,801 --checks eq25,gauge,tau --jobs 3 --out ";
  const fs::path a = scratch_dir() / "a.json", b = scratch_dir() / "b.json";
  ASSERT_EQ(run(args + "'" + a.string() + "'").code, 0);
  ASSERT_EQ(run(args + "'" + b.string() + "'").code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Spectrum, BudgetAndOutput) {
  EXPECT_EQ(run("spectrum --family scarf2 --n 100000").code, 9);
  const fs::path bin = scratch_dir() / "H.bin";
  const Invocation r = run("spectrum --family scarf2 --alpha 0.5 --n 201 --export '" + bin.string() + "'");
  ASSERT_EQ(r.code, 0);
  const auto s = nlohmann::json::parse(r.out);
  EXPECT_EQ(s["command"], "spectrum");
  EXPECT_TRUE(fs::exists(bin));
  EXPECT_GT(fs::file_size(bin), 199u * 199u * 16u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("verify --jobs 0").code, 2);
  EXPECT_EQ(run("--version").code, 0);
}
