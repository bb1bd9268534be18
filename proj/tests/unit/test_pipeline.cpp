#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "buyback/io.hpp"
#include "buyback/pipeline.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace buyback;
namespace fs = std::filesystem;

namespace {

std::string command(const testing::TempDir& dir, const std::string& args) {
  return std::string(BUYBACK_CLI) + " --quiet --work \"" + (dir / "work").string() + "\" " + args +
         " >/dev/null 2>&1";
}

std::size_t lineCount(const fs::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
  return n;
}

void writeFile(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << text;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config hash is stable FNV-1a") {
    CHECK(cli::configHash("") == "cbf29ce484222325");
    CHECK(cli::configHash("a") == "af63dc4c8601ec8c");
    CHECK(cli::configHash("seed=1").size() == 16);
  }

  TEST_CASE("an empty news file classifies to empty outputs") {
    testing::TempDir dir("pipe-empty");
    writeFile(dir / "empty.jsonl", "");
    REQUIRE(testing::run(command(dir, "classify --input \"" + (dir / "empty.jsonl").string() + "\"")) == 0);
    CHECK(lineCount(dir / "work/classify/classified.jsonl") == 0);
    CHECK(lineCount(dir / "work/classify/announcements.jsonl") == 0);
  }

  TEST_CASE("a malformed rule file exits with 2 and writes nothing") {
    testing::TempDir dir("pipe-rules");
    writeFile(dir / "news.jsonl",
              R"({"id":"n1","companyId":"C1","headline":"Acme announces share buyback","timestamp":"2020-01-02T10:00:00Z"})"
              "\n");
    writeFile(dir / "bad.rules", "[patterns]\nshare (repurchase\n");
    const int code = testing::run(
        command(dir, "classify --input \"" + (dir / "news.jsonl").string() + "\" --rules \"" + (dir / "bad.rules").string() + "\""));
    CHECK(code == 2);
    CHECK_FALSE(fs::exists(dir / "work/classify/classified.jsonl"));
  }

  TEST_CASE("usage errors exit with 2") {
    testing::TempDir dir("pipe-usage");
    CHECK(testing::run(command(dir, "train --mode fastest")) == 2);
    CHECK(testing::run(std::string(BUYBACK_CLI) + " >/dev/null 2>&1") == 2);
    CHECK(testing::run(std::string(BUYBACK_CLI) + " --version >/dev/null 2>&1") == 0);
  }

  TEST_CASE("a missing upstream artifact exits with 3") {
    testing::TempDir dir("pipe-missing");
    CHECK(testing::run(command(dir, "classify")) == 3);
    CHECK(testing::run(command(dir, "dataset")) == 3);
    CHECK(testing::run(command(dir, "train")) == 3);
    CHECK(testing::run(command(dir, "backtest")) == 3);
  }

  TEST_CASE("smoke run through every stage") {
    testing::TempDir dir("pipe-smoke");
    REQUIRE(testing::run(command(dir, "--seed 5 synth --companies 20 --announcements 200")) == 0);
    REQUIRE(testing::run(command(dir, "classify")) == 0);
    REQUIRE(testing::run(command(dir, "dataset")) == 0);
    REQUIRE(testing::run(command(dir, "stats")) == 0);
    REQUIRE(testing::run(command(dir, "train --mode explain --task class-perf-1M --task reg-over-1M")) == 0);
    REQUIRE(testing::run(command(dir, "backtest --approach all")) == 0);
    REQUIRE(testing::run(command(dir, "report")) == 0);

    const fs::path work = dir / "work";
    const io::CsvTable leaderboard = io::readCsv(work / "train/explain/class-perf-1M/leaderboard.csv");
    CHECK(leaderboard.rows.size() == 7);
    CHECK(fs::exists(work / "train/explain/class-perf-1M/model.json"));
    CHECK(io::readCsv(work / "backtest/combos.csv").rows.size() == 378);
    CHECK(io::readCsv(work / "backtest/naive.csv").rows.size() == 6);
    CHECK(fs::exists(work / "report.md"));
    for (const char* cmd : {"synth", "classify", "dataset", "stats", "train-explain", "backtest", "report"}) {
      const auto manifest = nlohmann::json::parse(io::readText(work / "manifests" / (std::string(cmd) + ".json")));
      CHECK(manifest.at("command") == cmd);
      CHECK(manifest.at("configHash").get<std::string>().size() == 16);
    }
  }

  TEST_CASE("an external transformer command is consumed") {
    testing::TempDir dir("pipe-transformer");
    writeFile(dir / "news.jsonl",
              R"({"id":"n1","companyId":"C1","headline":"Acme announces share buyback","timestamp":"2020-01-02T10:00:00Z","label":true})"
              "\n"
              R"({"id":"n2","companyId":"C2","headline":"Beta opens a plant","timestamp":"2020-01-03T10:00:00Z","label":false})"
              "\n");
    // Stand-in model: everything is a buyback with probability 0.9.
    writeFile(dir / "fake.sh",
              "#!/bin/sh\nsed -E 's/.*\"id\":\"([^\"]*)\".*/{\"id\":\"\\1\",\"probBuyback\":0.9,\"isBuyback\":true}/' "
              "\"$1\" > \"$2\"\n");
    fs::permissions(dir / "fake.sh", fs::perms::owner_all);
    REQUIRE(testing::run(command(dir, "classify --classifier transformer --input \"" + (dir / "news.jsonl").string() +
                                      "\" --transformer-cmd \"" + (dir / "fake.sh").string() + "\"")) == 0);
    const auto rows = io::readJsonl(dir / "work/classify/classified.jsonl");
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      CHECK(r.at("isBuyback") == true);
      CHECK(r.at("probBuyback") == 0.9);
    }
    const auto metrics = nlohmann::json::parse(io::readText(dir / "work/classify/metrics.json"));
    CHECK(metrics.at("falsePositives") == 1);
  }

  TEST_CASE("precomputed transformer predictions are consumed") {
    testing::TempDir dir("pipe-predictions");
    writeFile(dir / "news.jsonl",
              R"({"id":"n1","companyId":"C1","headline":"anything","timestamp":"2020-01-02T10:00:00Z"})"
              "\n"
              R"({"id":"n2","companyId":"C1","headline":"anything else","timestamp":"2020-03-02T10:00:00Z"})"
              "\n");
    writeFile(dir / "pred.jsonl", R"({"id":"n2","probBuyback":0.7,"isBuyback":true})"
                                  "\n"
                                  R"({"id":"n1","probBuyback":0.2,"isBuyback":false})"
                                  "\n");
    REQUIRE(testing::run(command(dir, "classify --classifier transformer --input \"" + (dir / "news.jsonl").string() +
                                      "\" --transformer-predictions \"" + (dir / "pred.jsonl").string() + "\"")) == 0);
    const auto announcements = io::readJsonl(dir / "work/classify/announcements.jsonl");
    REQUIRE(announcements.size() == 1);
    CHECK(announcements[0].at("id") == "n2");
    CHECK(testing::run(command(dir, "classify --classifier transformer --input \"" + (dir / "news.jsonl").string() + "\"")) ==
          2);
  }
}
