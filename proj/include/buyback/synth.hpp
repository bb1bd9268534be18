#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "buyback/dataset.hpp"
#include "buyback/dates.hpp"
#include "buyback/event_study.hpp"
#include "buyback/news_classifier.hpp"

namespace buyback::synth {

struct GeneratorConfig {
  std::uint64_t seed = 7;

  // Labeled headline corpus.
  std::size_t corpusSize = 503;
  std::size_t corpusBuybacks = 144;
  std::size_t corpusAdversarial = 119;
  std::size_t corpusEvalSize = 101;

  // Market.
  std::size_t nCompanies = 100;
  std::size_t nAnnouncements = 1200;
  int minAnnouncementGapDays = 60;
  Date start = std::chrono::year{2005} / 1 / 3;
  Date end = std::chrono::year{2022} / 12 / 30;
  double benchmarkAnnualDrift = 0.09;
  double benchmarkDailyVolatility = 0.005;
  double idiosyncraticDailyVolatility = 0.005;

  // Post-announcement log drift reaching log(1 + plantedEffect) at the
  // planted frame's horizon, on rows with transactionSizePct > flagThreshold.
  double plantedEffect = 0.05;
  TimeFrame plantedFrame = TimeFrame::M1;
  double flagThreshold = 3.0;

  // News stream.
  double duplicateRate = 0.25;        // follow-up headlines within the dedup window
  double noisePerAnnouncement = 1.5;  // non-buyback headlines per announcement
  double hardHeadlineRate = 0.05;     // buyback headlines phrased without rule keywords
  double requiredMissingRate = 0.03;  // rows missing one of the four required columns
  double optionalMissingRate = 0.05;  // per-cell missingness elsewhere
};

/// Throws ConfigError on inconsistent counts or negative volatilities.
void validate(const GeneratorConfig& config);

enum class Partition { Buyback, Other, Adversarial };
std::string_view partitionName(Partition p);

struct CorpusItem {
  news::NewsItem item;  // label set
  Partition partition = Partition::Other;
  bool eval = false;  // held-out evaluation split
};

/// Seeded labeled corpus, shuffled; the last corpusEvalSize items form the
/// evaluation split.
std::vector<CorpusItem> generateCorpus(const GeneratorConfig& config);
nlohmann::json toJson(const CorpusItem& item);

struct Announcement {
  std::string newsId;
  std::string companyId;
  Date date;
  bool flagged = false;
};

struct Market {
  event::PriceSeries benchmark;
  event::PriceSeries vix;
  std::vector<event::PriceSeries> stocks;  // instrument id = company id
  std::vector<Announcement> announcements;
  std::vector<news::NewsItem> news;  // sorted by timestamp, labeled
  /// One row per buyback-labeled news item: announcementId, companyId and
  /// fundamentals. Date-derived columns, VIX and returns are added downstream.
  data::FeatureTable fundamentals;
};

Market generateMarket(const GeneratorConfig& config);

/// Writes benchmark.csv, vix.csv, prices/<companyId>.csv, news.jsonl,
/// fundamentals.csv and corpus.jsonl under `dir`.
void writeAll(const std::filesystem::path& dir, const Market& market, const std::vector<CorpusItem>& corpus);

}  // namespace buyback::synth
