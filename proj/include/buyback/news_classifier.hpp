#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buyback/dates.hpp"
#include "json.hpp"

namespace buyback::news {

/// Raw rule lists as read from a rule file.
struct RuleSet {
  std::vector<std::string> patterns;
  std::vector<std::string> antiPatterns;
  std::vector<std::string> phrases;
  std::vector<std::string> antiPhrases;
};

/// Parses the sectioned rule format (`[patterns]`, `[antiPatterns]`,
/// `[phrases]`, `[antiPhrases]`, one entry per line, `#` comments).
RuleSet parseRuleSet(std::istream& in);
RuleSet loadRuleSet(const std::filesystem::path& path);
std::filesystem::path defaultRuleSetPath();

/// A validated rule set with compiled, case-insensitive patterns. Malformed
/// patterns are rejected here with ConfigError, never at query time.
/// Immutable and safe to share between threads.
class CompiledRuleSet {
 public:
  explicit CompiledRuleSet(RuleSet rules);
  ~CompiledRuleSet();
  CompiledRuleSet(const CompiledRuleSet&);
  CompiledRuleSet& operator=(const CompiledRuleSet&);
  CompiledRuleSet(CompiledRuleSet&&) noexcept;
  CompiledRuleSet& operator=(CompiledRuleSet&&) noexcept;

  const RuleSet& rules() const { return rules_; }

  struct Compiled;
  const Compiled& compiled() const { return *compiled_; }

 private:
  RuleSet rules_;
  std::shared_ptr<const Compiled> compiled_;
};

/// Anti-rules are checked first and veto; then any pro pattern or phrase
/// marks the headline as an announcement. Headlines are NFC-normalized and
/// matched case-insensitively.
bool isBuyback(std::string_view headline, const CompiledRuleSet& rules);

struct NewsItem {
  std::string id;
  std::string companyId;
  std::string headline;
  Timestamp timestamp{};
  std::optional<bool> label;  // ground truth when the corpus is labeled
};

NewsItem newsItemFromJson(const nlohmann::json& record);
nlohmann::json toJson(const NewsItem& item);

/// Per-company duplicate suppression over a chronologically sorted stream:
/// an item is dropped when a kept item of the same company lies at most
/// `windowDays` calendar days before it. Throws DataError on unsorted input.
std::vector<NewsItem> dedupWindow(std::span<const NewsItem> items, int windowDays = 30);

struct ConfusionCounts {
  std::size_t truePositives = 0;
  std::size_t falsePositives = 0;
  std::size_t trueNegatives = 0;
  std::size_t falseNegatives = 0;

  std::size_t total() const { return truePositives + falsePositives + trueNegatives + falseNegatives; }
  double accuracy() const;
  double errorRate() const { return 1.0 - accuracy(); }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts score(const std::vector<bool>& predictions, const std::vector<bool>& labels);

/// One row of an external classifier's prediction file:
/// {"id", "probBuyback", "isBuyback"}.
struct ExternalPrediction {
  std::string id;
  double probBuyback = 0.0;
  bool isBuyback = false;
};

/// Throws DataError on a missing field or a probability outside [0, 1].
ExternalPrediction externalPredictionFromJson(const nlohmann::json& record);
std::vector<ExternalPrediction> readExternalPredictions(const std::filesystem::path& path);

/// Predictions in item order, matched by id. Throws DataError when an item
/// has no prediction or an id repeats.
std::vector<bool> alignPredictions(std::span<const NewsItem> items, std::span<const ExternalPrediction> predictions);

}  // namespace buyback::news
