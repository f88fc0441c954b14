// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "star/metrics.hpp"
#include "star/trial_log.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
  const std::string cmd = std::string(STAR_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string tree_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.string() + "\n" + slurp(dir / f);
  return all;
}

}  // namespace

TEST(Cli, DecodeCentredTaps) {
  const auto dir = star::test::scratch_dir("cli_decode");
  // Centres of t, h, e on the enlarged layout.
  write(dir / "taps.txt", "# the\n32 0\n\n44 8\n16 0\n");
  const auto r = run("decode --taps " + (dir / "taps.txt").string() + " --json");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["literal"], "the");
  EXPECT_EQ(doc["candidates"][0]["letters"], "the");
  EXPECT_EQ(doc["suggestions"][0]["word"], "the");
}

TEST(Cli, DecodeInputErrors) {
  const auto dir = star::test::scratch_dir("cli_decode_errors");
  write(dir / "empty.txt", "# nothing\n");
  const auto empty = run("decode " + (dir / "empty.txt").string());
  EXPECT_EQ(empty.exit_code, 1) << empty.out;
  EXPECT_NE(empty.out.find("no taps"), std::string::npos);

  write(dir / "bad.txt", "1 2\n3 four\n");
  const auto bad = run("decode " + (dir / "bad.txt").string());
  EXPECT_EQ(bad.exit_code, 2) << bad.out;
  EXPECT_NE(bad.out.find("bad.txt:2"), std::string::npos) << bad.out;

  EXPECT_EQ(run("decode " + (dir / "missing.txt").string()).exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 1);
}

TEST(Cli, SimulateIsByteIdenticalAcrossRuns) {
  const auto dir = star::test::scratch_dir("cli_simulate");
  const auto a = run("simulate --seed 5 --out " + (dir / "a").string());
  ASSERT_EQ(a.exit_code, 0) << a.out;
  const auto b = run("simulate --seed 5 --threads 1 --out " + (dir / "b").string());
  ASSERT_EQ(b.exit_code, 0) << b.out;
  EXPECT_EQ(tree_digest(dir / "a"), tree_digest(dir / "b"));
  EXPECT_TRUE(fs::exists(dir / "a" / "summary.csv"));
  EXPECT_NE(a.out.find("70 trials"), std::string::npos) << a.out;
}

TEST(Cli, SimulateRejectsInvalidConfig) {
  const auto dir = star::test::scratch_dir("cli_bad_config");
  auto doc = nlohmann::json::parse(slurp(star::test::data_path("configs/default_experiment.json")));
  doc["conditions"][0]["blocks"] = 0;
  doc["phrases"] = star::test::data_path("phrases.txt");
  doc["lexicon"] = star::test::data_path("lexicon.tsv");
  doc["conditions"][0]["profile"] = star::test::data_path("profiles/star.json");
  doc["conditions"][1]["profile"] = star::test::data_path("profiles/smartphone.json");
  write(dir / "bad.json", doc.dump());
  const auto r = run("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string());
  EXPECT_EQ(r.exit_code, 1) << r.out;
  EXPECT_NE(r.out.find("blocks"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(Cli, MetricsRecomputesTheSimulatedSummary) {
  const auto dir = star::test::scratch_dir("cli_metrics");
  ASSERT_EQ(run("simulate --seed 9 --out " + (dir / "sim").string()).exit_code, 0);
  const auto r = run("metrics " + (dir / "sim" / "logs").string() + " --csv " + (dir / "re.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(slurp(dir / "re.csv"), slurp(dir / "sim" / "summary.csv"));
  EXPECT_NE(r.out.find(slurp(dir / "sim" / "summary.txt")), std::string::npos);

  write(dir / "sim" / "logs" / "zz_corrupt.jsonl", "{\"record\":\"trial\"\n");
  const auto warned = run("metrics " + (dir / "sim" / "logs").string() + " --csv " + (dir / "re2.csv").string());
  EXPECT_EQ(warned.exit_code, 0);
  EXPECT_NE(warned.out.find("warning: "), std::string::npos);
  EXPECT_NE(warned.out.find("zz_corrupt.jsonl"), std::string::npos);
  EXPECT_EQ(slurp(dir / "re2.csv"), slurp(dir / "sim" / "summary.csv"));

  fs::create_directories(dir / "empty");
  EXPECT_EQ(run("metrics " + (dir / "empty").string()).exit_code, 2);
}

TEST(Cli, ValidateAndLayout) {
  const auto lex = run("validate lexicon " + star::test::data_path("lexicon.tsv"));
  EXPECT_EQ(lex.exit_code, 0) << lex.out;
  EXPECT_NE(lex.out.find("(ok)"), std::string::npos);
  const auto ph = run("validate phrases " + star::test::data_path("phrases.txt"));
  EXPECT_EQ(ph.exit_code, 0) << ph.out;
  EXPECT_NE(ph.out.find("163"), std::string::npos);
  EXPECT_EQ(run("validate layout enlarged").exit_code, 0);
  EXPECT_NE(run("validate layout nonsense").exit_code, 0);

  const auto dir = star::test::scratch_dir("cli_layout");
  ASSERT_EQ(run("layout original --out " + (dir / "o.json").string()).exit_code, 0);
  EXPECT_EQ(slurp(dir / "o.json"), slurp(star::test::data_path("layouts/original.json")));
}
