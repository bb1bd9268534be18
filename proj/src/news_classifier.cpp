#include "buyback/news_classifier.hpp"

#include <unicode/normalizer2.h>
#include <unicode/regex.h>
#include <unicode/unistr.h>

#include <fstream>
#include <map>
#include <unordered_map>

#include "buyback/common.hpp"
#include "buyback/io.hpp"

namespace buyback::news {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

icu::UnicodeString normalize(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw ConfigError("ICU NFC normalizer unavailable");
  icu::UnicodeString normalized =
      nfc->normalize(icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))),
                     status);
  if (U_FAILURE(status)) throw DataError("headline is not valid UTF-8 text");
  return normalized;
}

icu::UnicodeString folded(std::string_view text) {
  icu::UnicodeString s = normalize(text);
  s.foldCase(U_FOLD_CASE_DEFAULT);
  return s;
}

}  // namespace

RuleSet parseRuleSet(std::istream& in) {
  RuleSet rules;
  std::vector<std::string>* current = nullptr;
  const std::map<std::string, std::vector<std::string>*, std::less<>> sections{
      {"[patterns]", &rules.patterns},
      {"[antiPatterns]", &rules.antiPatterns},
      {"[phrases]", &rules.phrases},
      {"[antiPhrases]", &rules.antiPhrases},
  };
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    if (entry.front() == '[') {
      auto it = sections.find(entry);
      if (it == sections.end()) {
        throw ConfigError("rule file line " + std::to_string(lineNo) + ": unknown section " + entry);
      }
      current = it->second;
      continue;
    }
    if (current == nullptr) {
      throw ConfigError("rule file line " + std::to_string(lineNo) + ": entry outside of a section");
    }
    current->push_back(entry);
  }
  return rules;
}

RuleSet loadRuleSet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open rule file " + path.string());
  return parseRuleSet(in);
}

std::filesystem::path defaultRuleSetPath() {
  return std::filesystem::path(BUYBACK_DATA_DIR) / "rules" / "default_rules.txt";
}

struct CompiledRuleSet::Compiled {
  std::vector<std::unique_ptr<icu::RegexPattern>> patterns;
  std::vector<std::unique_ptr<icu::RegexPattern>> antiPatterns;
  std::vector<icu::UnicodeString> phrases;
  std::vector<icu::UnicodeString> antiPhrases;
};

namespace {

std::vector<std::unique_ptr<icu::RegexPattern>> compileAll(const std::vector<std::string>& sources,
                                                           std::string_view section) {
  std::vector<std::unique_ptr<icu::RegexPattern>> out;
  for (const auto& src : sources) {
    UErrorCode status = U_ZERO_ERROR;
    UParseError parseError{};
    std::unique_ptr<icu::RegexPattern> pattern(
        icu::RegexPattern::compile(normalize(src), UREGEX_CASE_INSENSITIVE, parseError, status));
    if (U_FAILURE(status) || !pattern) {
      throw ConfigError("invalid " + std::string(section) + " regex '" + src + "': " + u_errorName(status) +
                        " at offset " + std::to_string(parseError.offset));
    }
    out.push_back(std::move(pattern));
  }
  return out;
}

std::vector<icu::UnicodeString> foldAll(const std::vector<std::string>& phrases) {
  std::vector<icu::UnicodeString> out;
  out.reserve(phrases.size());
  for (const auto& p : phrases) out.push_back(folded(p));
  return out;
}

bool anyPatternMatches(const std::vector<std::unique_ptr<icu::RegexPattern>>& patterns,
                       const icu::UnicodeString& text) {
  for (const auto& pattern : patterns) {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> matcher(pattern->matcher(text, status));
    if (U_FAILURE(status)) throw DataError("regex matcher construction failed");
    const bool found = matcher->find(status);
    if (U_FAILURE(status)) throw DataError("regex evaluation failed");
    if (found) return true;
  }
  return false;
}

bool anyPhraseContained(const std::vector<icu::UnicodeString>& phrases, const icu::UnicodeString& text) {
  for (const auto& phrase : phrases) {
    if (text.indexOf(phrase) >= 0) return true;
  }
  return false;
}

}  // namespace

CompiledRuleSet::CompiledRuleSet(RuleSet rules) : rules_(std::move(rules)) {
  auto compiled = std::make_shared<Compiled>();
  compiled->patterns = compileAll(rules_.patterns, "pattern");
  compiled->antiPatterns = compileAll(rules_.antiPatterns, "antiPattern");
  compiled->phrases = foldAll(rules_.phrases);
  compiled->antiPhrases = foldAll(rules_.antiPhrases);
  compiled_ = std::move(compiled);
}

CompiledRuleSet::~CompiledRuleSet() = default;
CompiledRuleSet::CompiledRuleSet(const CompiledRuleSet&) = default;
CompiledRuleSet& CompiledRuleSet::operator=(const CompiledRuleSet&) = default;
CompiledRuleSet::CompiledRuleSet(CompiledRuleSet&&) noexcept = default;
CompiledRuleSet& CompiledRuleSet::operator=(CompiledRuleSet&&) noexcept = default;

bool isBuyback(std::string_view headline, const CompiledRuleSet& rules) {
  const auto& c = rules.compiled();
  const icu::UnicodeString text = normalize(headline);
  icu::UnicodeString lowered = text;
  lowered.foldCase(U_FOLD_CASE_DEFAULT);

  if (anyPatternMatches(c.antiPatterns, text) || anyPhraseContained(c.antiPhrases, lowered)) return false;
  return anyPatternMatches(c.patterns, text) || anyPhraseContained(c.phrases, lowered);
}

NewsItem newsItemFromJson(const nlohmann::json& record) {
  NewsItem item;
  try {
    item.companyId = record.at("companyId").get<std::string>();
    item.headline = record.at("headline").get<std::string>();
    item.timestamp = parseTimestamp(record.at("timestamp").get<std::string>());
    if (record.contains("id")) item.id = record.at("id").get<std::string>();
    if (record.contains("label") && !record.at("label").is_null()) item.label = record.at("label").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad news record: ") + e.what());
  }
  if (item.companyId.empty()) throw DataError("news record with empty companyId");
  return item;
}

nlohmann::json toJson(const NewsItem& item) {
  nlohmann::json j;
  if (!item.id.empty()) j["id"] = item.id;
  j["companyId"] = item.companyId;
  j["headline"] = item.headline;
  j["timestamp"] = formatTimestamp(item.timestamp);
  if (item.label) j["label"] = *item.label;
  return j;
}

std::vector<NewsItem> dedupWindow(std::span<const NewsItem> items, int windowDays) {
  if (windowDays < 0) throw DomainError("dedup window must be non-negative");
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].timestamp < items[i - 1].timestamp) {
      throw DataError("dedupWindow: input is not sorted by timestamp (item " + std::to_string(i) + ")");
    }
  }
  std::unordered_map<std::string, Date> lastKept;
  std::vector<NewsItem> kept;
  for (const auto& item : items) {
    const Date day = dateOf(item.timestamp);
    auto it = lastKept.find(item.companyId);
    if (it != lastKept.end() && (day - it->second).count() <= windowDays) continue;
    lastKept[item.companyId] = day;
    kept.push_back(item);
  }
  return kept;
}

double ConfusionCounts::accuracy() const {
  if (total() == 0) throw DataError("accuracy of an empty confusion table");
  return static_cast<double>(truePositives + trueNegatives) / static_cast<double>(total());
}

ConfusionCounts score(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  if (predictions.size() != labels.size()) {
    throw DataError("score: " + std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) throw DataError("score: empty input");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] && labels[i]) ++counts.truePositives;
    else if (predictions[i]) ++counts.falsePositives;
    else if (labels[i]) ++counts.falseNegatives;
    else ++counts.trueNegatives;
  }
  return counts;
}

ExternalPrediction externalPredictionFromJson(const nlohmann::json& record) {
  ExternalPrediction p;
  try {
    p.id = record.at("id").get<std::string>();
    p.probBuyback = record.at("probBuyback").get<double>();
    p.isBuyback = record.at("isBuyback").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad prediction record: ") + e.what());
  }
  if (!(p.probBuyback >= 0.0 && p.probBuyback <= 1.0)) {
    throw DataError("prediction " + p.id + ": probBuyback outside [0, 1]");
  }
  return p;
}

std::vector<ExternalPrediction> readExternalPredictions(const std::filesystem::path& path) {
  std::vector<ExternalPrediction> out;
  for (const auto& record : io::readJsonl(path)) out.push_back(externalPredictionFromJson(record));
  return out;
}

std::vector<bool> alignPredictions(std::span<const NewsItem> items, std::span<const ExternalPrediction> predictions) {
  std::unordered_map<std::string, bool> byId;
  for (const auto& p : predictions) {
    if (!byId.emplace(p.id, p.isBuyback).second) throw DataError("duplicate prediction id " + p.id);
  }
  std::vector<bool> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const auto it = byId.find(item.id);
    if (it == byId.end()) throw DataError("no prediction for news item '" + item.id + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace buyback::news
