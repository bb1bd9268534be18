#include <sstream>

#include "buyback/io.hpp"
#include "buyback/news_classifier.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace buyback;
using namespace buyback::news;

namespace {

const CompiledRuleSet& defaults() {
  static const CompiledRuleSet rules(loadRuleSet(defaultRuleSetPath()));
  return rules;
}

NewsItem item(const std::string& id, const std::string& company, const std::string& when) {
  return {id, company, "headline " + id, parseTimestamp(when), std::nullopt};
}

}  // namespace

TEST_SUITE("news_classifier") {
  TEST_CASE("bundled rule set has every list") {
    const RuleSet& r = defaults().rules();
    CHECK_FALSE(r.patterns.empty());
    CHECK_FALSE(r.antiPatterns.empty());
    CHECK_FALSE(r.phrases.empty());
    CHECK_FALSE(r.antiPhrases.empty());
  }

  TEST_CASE("headline examples") {
    CHECK_FALSE(isBuyback("", defaults()));
    CHECK(isBuyback("ACME Corp announces $50 million share repurchase program", defaults()));
    CHECK_FALSE(isBuyback("Opinion: are stock buybacks good or bad for investors?", defaults()));
    CHECK_FALSE(isBuyback("ACME Corp suspends share buyback", defaults()));
    CHECK_FALSE(isBuyback("ACME Corp reports quarterly revenue", defaults()));
  }

  TEST_CASE("matching ignores case and normalization form") {
    CHECK(isBuyback("ACME CORP ANNOUNCES SHARE BUYBACK", defaults()));
    // Decomposed and precomposed e-acute normalize to the same headline.
    const std::string decomposed = "Soci\x65\xcc\x81t\x65\xcc\x81 launches share buyback";
    const std::string composed = "Soci\xc3\xa9t\xc3\xa9 launches share buyback";
    CHECK(isBuyback(decomposed, defaults()) == isBuyback(composed, defaults()));
    CHECK(isBuyback(composed, defaults()));
  }

  TEST_CASE("anti rules veto pro matches") {
    RuleSet r;
    r.phrases = {"share buyback"};
    r.antiPhrases = {"weekly update"};
    const CompiledRuleSet rules(r);
    CHECK(isBuyback("Share buyback approved", rules));
    CHECK_FALSE(isBuyback("Share buyback weekly update", rules));
  }

  TEST_CASE("rule file parsing") {
    std::istringstream in("# comment\n[patterns]\nfoo\\s+bar\n\n[phrases]\nbaz qux\n[antiPatterns]\n[antiPhrases]\n");
    const RuleSet r = parseRuleSet(in);
    CHECK(r.patterns == std::vector<std::string>{"foo\\s+bar"});
    CHECK(r.phrases == std::vector<std::string>{"baz qux"});
    std::istringstream orphan("entry before any section\n");
    CHECK_THROWS_AS(parseRuleSet(orphan), ConfigError);
    std::istringstream unknown("[nonsense]\nx\n");
    CHECK_THROWS_AS(parseRuleSet(unknown), ConfigError);
  }

  TEST_CASE("malformed patterns fail at compile time") {
    RuleSet r;
    r.patterns = {"(unclosed"};
    CHECK_THROWS_AS(CompiledRuleSet{r}, ConfigError);
    CHECK_THROWS_AS(loadRuleSet("/nonexistent/rules.txt"), ConfigError);
  }

  TEST_CASE("dedup window examples") {
    const std::vector<NewsItem> sameCompany10{item("a", "C1", "2021-01-01T10:00:00Z"),
                                              item("b", "C1", "2021-01-11T10:00:00Z")};
    auto kept = dedupWindow(sameCompany10, 30);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].id == "a");

    const std::vector<NewsItem> twoCompanies{item("a", "C1", "2021-01-01T10:00:00Z"),
                                             item("b", "C2", "2021-01-01T11:00:00Z")};
    CHECK(dedupWindow(twoCompanies, 30).size() == 2);

    const std::vector<NewsItem> sameCompany31{item("a", "C1", "2021-01-01T10:00:00Z"),
                                              item("b", "C1", "2021-02-01T10:00:00Z")};
    CHECK(dedupWindow(sameCompany31, 30).size() == 2);

    const std::vector<NewsItem> sameCompany30{item("a", "C1", "2021-01-01T10:00:00Z"),
                                              item("b", "C1", "2021-01-31T10:00:00Z")};
    CHECK(dedupWindow(sameCompany30, 30).size() == 1);
  }

  TEST_CASE("dedup measures from the last kept item") {
    // b is dropped (10 days after a); c is 25 days after b but 35 after a.
    const std::vector<NewsItem> items{item("a", "C1", "2021-01-01T00:00:00Z"),
                                      item("b", "C1", "2021-01-11T00:00:00Z"),
                                      item("c", "C1", "2021-02-05T00:00:00Z")};
    const auto kept = dedupWindow(items, 30);
    REQUIRE(kept.size() == 2);
    CHECK(kept[1].id == "c");
  }

  TEST_CASE("dedup rejects unsorted input") {
    const std::vector<NewsItem> items{item("a", "C1", "2021-02-01T00:00:00Z"),
                                      item("b", "C1", "2021-01-01T00:00:00Z")};
    CHECK_THROWS_AS(dedupWindow(items, 30), DataError);
  }

  TEST_CASE("confusion arithmetic") {
    // 89 correct of 101: 12 false negatives, no false positives.
    std::vector<bool> pred(101, false);
    std::vector<bool> label(101, false);
    for (std::size_t i = 0; i < 40; ++i) label[i] = true;
    for (std::size_t i = 12; i < 40; ++i) pred[i] = true;
    const ConfusionCounts c = score(pred, label);
    CHECK(c.falseNegatives == 12);
    CHECK(c.falsePositives == 0);
    CHECK(c.total() == 101);
    CHECK(c.accuracy() == doctest::Approx(89.0 / 101.0));
    CHECK(c.accuracy() == doctest::Approx(0.8812).epsilon(1e-4));

    const ConfusionCounts perfect = score(label, label);
    CHECK(perfect.accuracy() == 1.0);
    CHECK(perfect.falsePositives + perfect.falseNegatives == 0);
    CHECK_THROWS_AS(score({true}, {true, false}), DataError);
  }

  TEST_CASE("news item json round trip") {
    NewsItem it = item("x", "C9", "2020-05-06T07:08:09Z");
    it.label = true;
    const NewsItem back = newsItemFromJson(toJson(it));
    CHECK(back.id == "x");
    CHECK(back.companyId == "C9");
    CHECK(back.timestamp == it.timestamp);
    CHECK(back.label == std::optional<bool>(true));
    CHECK_THROWS_AS(newsItemFromJson({{"id", "y"}}), DataError);
  }

  TEST_CASE("external predictions feed the score op") {
    testing::TempDir dir("news");
    io::writeJsonl(dir / "p.jsonl", {{{"id", "a"}, {"probBuyback", 0.9}, {"isBuyback", true}},
                                     {{"id", "b"}, {"probBuyback", 0.2}, {"isBuyback", false}}});
    const auto preds = readExternalPredictions(dir / "p.jsonl");
    std::vector<NewsItem> items{item("b", "C1", "2021-01-01T00:00:00Z"), item("a", "C2", "2021-01-01T00:00:00Z")};
    const auto aligned = alignPredictions(items, preds);
    CHECK(aligned == std::vector<bool>{false, true});
    const ConfusionCounts c = score(aligned, {false, true});
    CHECK(c.accuracy() == 1.0);

    items.push_back(item("c", "C3", "2021-01-01T00:00:00Z"));
    CHECK_THROWS_AS(alignPredictions(items, preds), DataError);
    CHECK_THROWS_AS(externalPredictionFromJson({{"id", "a"}, {"probBuyback", 1.5}, {"isBuyback", true}}), DataError);
    CHECK_THROWS_AS(externalPredictionFromJson({{"id", "a"}, {"isBuyback", true}}), DataError);
  }
}
