#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "afc/scenario.hpp"

using namespace afc;
namespace fs = std::filesystem;
using config::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("afc-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json load(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

Table read_csv(const fs::path& p) {
  std::ifstream is(p);
  Table t;
  std::string line;
  if (std::getline(is, line)) t.header = split(line);
  while (std::getline(is, line)) t.rows.push_back(split(line));
  return t;
}

config::ScenarioConfig cfg(const json& doc, const fs::path& out) {
  auto d = doc;
  d["output_dir"] = out.string();
  return config::from_json(d);
}

int sim(const std::string& args) {
  const std::string cmd = std::string(AFC_SIM_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Run, RepeatRunsAreByteIdentical) {
  const json doc = {{"preset", "fbc"}, {"scenario", "storage"}};
  const auto a = scratch("rep-a"), b = scratch("rep-b");
  const auto ra = scenario::run(cfg(doc, a)), rb = scenario::run(cfg(doc, b));
  ASSERT_EQ(ra.files.size(), rb.files.size());
  for (const auto& f : ra.files) {
    const auto name = f.filename();
    if (name == "result.json") continue;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  auto ja = load(a / "result.json"), jb = load(b / "result.json");
  ja["inputs"].erase("output_dir");
  jb["inputs"].erase("output_dir");
  EXPECT_EQ(ja, jb);
}

TEST(Run, ResultHasReportKeys) {
  const auto out = scratch("keys");
  scenario::run(cfg({{"preset", "wgc"}, {"scenario", "analytics"}}, out));
  const auto j = load(out / "result.json");
  for (const char* k : {"scenario", "inputs", "efficiencies", "analytic", "checks"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["scenario"], "analytics");
}

TEST(Run, SweepIndependentOfThreads) {
  const json doc = {{"preset", "wgc"}, {"scenario", "sweep"}, {"sweep", {{"bandwidths_hz", {2e6, 4e6, 6e6}}}}};
  const auto a = scratch("sw1"), b = scratch("sw3");
  scenario::RunOptions one, three;
  one.threads = 1;
  three.threads = 3;
  scenario::run(cfg(doc, a), one);
  scenario::run(cfg(doc, b), three);
  const auto s = slurp(a / "sweep.csv");
  EXPECT_EQ(s, slurp(b / "sweep.csv"));
  EXPECT_EQ(s.substr(0, s.find('\n')), "param_value,efficiency,scheme");
}

TEST(Run, HoleburnMatchesGolden) {
  const auto out = scratch("hb");
  scenario::run(cfg({{"preset", "wgc"}, {"scenario", "holeburn"}}, out));
  const fs::path golden = fs::path(AFC_SOURCE_DIR) / "tests" / "golden";
  for (const char* name : {"holeburn_ratios.csv", "holeburn_factors.csv"}) {
    const auto produced = read_csv(out / (std::string(name).substr(9)));
    const auto expected = read_csv(golden / name);
    ASSERT_EQ(produced.header, expected.header) << name;
    ASSERT_EQ(produced.rows.size(), expected.rows.size()) << name;
    for (std::size_t i = 0; i < expected.rows.size(); ++i)
      for (std::size_t j = 0; j < expected.rows[i].size(); ++j) {
        const auto& e = expected.rows[i][j];
        const auto& p = produced.rows[i][j];
        char* end = nullptr;
        const double v = std::strtod(e.c_str(), &end);
        if (end && *end == '\0') EXPECT_NEAR(std::stod(p), v, 1e-9 * std::max(1.0, std::abs(v))) << name << " " << i;
        else EXPECT_EQ(p, e) << name << " " << i;
      }
  }
  // hand sums of the published oscillator-strength factors
  const auto r = read_csv(out / "ratios.csv");
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_NEAR(std::stod(r.rows[0][2]), 2.865, 1e-9);
  EXPECT_NEAR(std::stod(r.rows[1][2]), 2.97, 1e-9);
  EXPECT_NEAR(std::stod(r.rows[2][2]), 2.545, 1e-9);
}

TEST(Run, InvalidConfigThrowsBeforeWriting) {
  const auto out = scratch("bad");
  auto c = cfg({{"preset", "wgc"}}, out);
  c.grid.n_points = 4096;
  EXPECT_THROW(scenario::run(c), config::ConfigError);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Run, MultimodeOverrideAddsSpread) {
  const auto out = scratch("mm");
  scenario::RunOptions opt;
  opt.modes = 4;
  const auto r = scenario::run(cfg({{"preset", "fbc"}}, out), opt);
  EXPECT_EQ(r.result["efficiencies"]["per_mode"].size(), 4u);
  EXPECT_LT(r.result["efficiencies"]["spread"].get<double>(), 0.01);
}

TEST(Report, EmptyDirectoryGivesNothing) {
  const auto d = scratch("empty");
  fs::create_directories(d);
  EXPECT_EQ(scenario::report(d), "");
  EXPECT_EQ(scenario::report(d / "missing"), "");
}

TEST(Report, TableRowsPerRun) {
  const auto d = scratch("report");
  scenario::run(cfg({{"preset", "wgc"}, {"scenario", "analytics"}}, d / "a"));
  scenario::run(cfg({{"preset", "fbc"}, {"scenario", "holeburn"}}, d / "b"));
  const auto md = scenario::report(d);
  EXPECT_EQ(md.rfind("| run | scenario | quantity | simulated | analytic |", 0), 0u);
  EXPECT_NE(md.find("| a | analytics | cavity finesse |"), std::string::npos);
  EXPECT_NE(md.find("| b | holeburn | ratio"), std::string::npos);
  EXPECT_NE(md.find("## Checks"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  EXPECT_EQ(sim("validate --preset wgc"), 0);
  EXPECT_EQ(sim("validate"), 2);
  EXPECT_EQ(sim("run --preset fbc --scenario analytics --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "result.json"));
  EXPECT_EQ(sim("report --in " + out.string()), 0);

  const auto bad = out / "bad.json";
  std::ofstream(bad) << R"({"preset": "wgc", "grid": {"spn_hz": 1}})";
  EXPECT_EQ(sim("validate --config " + bad.string()), 2);
  std::ofstream(out / "broken.json") << "{ not json";
  EXPECT_EQ(sim("run --config " + (out / "broken.json").string()), 2);
}

TEST(Cli, ShippedConfigsValidate) {
  for (const auto& e : fs::directory_iterator(fs::path(AFC_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json") continue;
    EXPECT_EQ(sim("validate --config " + e.path().string()), 0) << e.path();
  }
}
