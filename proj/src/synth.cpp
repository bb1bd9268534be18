#include "buyback/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "buyback/common.hpp"
#include "buyback/io.hpp"

namespace buyback::synth {

namespace {

using std::chrono::days;

constexpr std::array<std::string_view, 10> kBuybackTemplates{
    "{c} announces share buyback of up to {amt}",
    "{c} board approves {amt} stock repurchase program",
    "{c} to buy back up to {n} million shares",
    "{c} launches {amt} share repurchase",
    "{c} unveils new buyback programme worth {amt}",
    "{c} authorises repurchase of up to {pct}% of share capital",
    "{c} initiates equity buyback",
    "{c} plans {amt} stock buyback",
    "{c} commences share buy-back programme",
    "{c} to repurchase {amt} of its common stock",
};

// Buyback news phrased without any rule keyword.
constexpr std::array<std::string_view, 4> kHardBuybackTemplates{
    "{c} sets aside {amt} to return capital through open-market purchases of its own shares",
    "{c} will retire {n} million shares via tender offer",
    "{c} adds {amt} to capital return plan, targeting its own float",
    "{c} to shrink share count with {amt} open-market purchases",
};

constexpr std::array<std::string_view, 14> kOtherTemplates{
    "{c} reports third-quarter earnings above estimates",
    "{c} names new chief financial officer",
    "{c} raises quarterly dividend to {cents} cents per share",
    "{c} completes acquisition of regional rival",
    "{c} shares rise after analyst upgrade",
    "{c} to issue {amt} in senior notes",
    "{c} opens new plant in {city}",
    "{c} guides full-year revenue higher",
    "{c} wins {amt} government contract",
    "{c} cuts {n} hundred jobs in restructuring",
    "{c} files for secondary offering of common stock",
    "{c} agrees to sell consumer unit for {amt}",
    "{c} chief executive to step down at year end",
    "{c} second-quarter profit falls on weaker demand",
};

// Mention buybacks without announcing one.
constexpr std::array<std::string_view, 12> kAdversarialTemplates{
    "Opinion: {c}'s buyback program is a waste of cash",
    "Is {c} about to announce a share buyback?",
    "{c} suspends share repurchase program amid downturn",
    "{c} completes stock buyback program",
    "Buyback ETF adds {c} to holdings",
    "Why {c} announced a share buyback now",
    "Investors sue {c} over share repurchase plan",
    "Top 10 stock buybacks of the week include {c}",
    "{c} transaction report: buyback transactions for week {n}",
    "Analysts question {c}'s share buyback timing",
    "{c} cancels planned share buyback",
    "Analysis: what {c}'s stock repurchase plan means for investors",
};

constexpr std::array<std::string_view, 26> kNamePrefixes{
    "Acme",     "Borealis", "Cobalt",  "Delta",   "Everest",   "Fjord",     "Granite", "Helix",  "Ionic",
    "Juniper",  "Keystone", "Lumen",   "Meridian", "Northway", "Orion",     "Pinnacle", "Quasar", "Redwood",
    "Summit",   "Tidewater", "Umbra",  "Vertex",  "Westbrook", "Xenon",     "Yarrow",  "Zephyr"};
constexpr std::array<std::string_view, 10> kNameSuffixes{"Holdings", "Industries", "Group",  "Systems", "Energy",
                                                          "Pharma",   "Capital",    "Foods", "Technologies",
                                                          "Motors"};
constexpr std::array<std::string_view, 6> kCities{"Austin", "Lyon", "Osaka", "Leipzig", "Calgary", "Perth"};
constexpr std::array<std::string_view, 10> kCountries{"US", "US", "US", "US", "GB", "DE", "JP", "CA", "FR", "CH"};
constexpr std::array<std::string_view, 10> kIndustries{"Industrials",  "Financials", "Information Technology",
                                                        "Health Care",  "Energy",     "Consumer Discretionary",
                                                        "Consumer Staples", "Materials", "Utilities",
                                                        "Communication Services"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& values, Rng& rng) {
  return values[rng.below(N)];
}

std::string replaceAll(std::string text, std::string_view key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::string fillTemplate(std::string_view pattern, const std::string& company, Rng& rng) {
  std::string text(pattern);
  const int amount = 50 + static_cast<int>(rng.below(40)) * 25;
  text = replaceAll(std::move(text), "{c}", company);
  text = replaceAll(std::move(text), "{amt}",
                    amount >= 1000 ? "$" + io::formatNumber(amount / 1000.0) + " billion"
                                   : "$" + std::to_string(amount) + " million");
  text = replaceAll(std::move(text), "{n}", std::to_string(2 + rng.below(40)));
  text = replaceAll(std::move(text), "{pct}", std::to_string(2 + rng.below(9)));
  text = replaceAll(std::move(text), "{cents}", std::to_string(5 + rng.below(90)));
  text = replaceAll(std::move(text), "{city}", std::string(pick(kCities, rng)));
  return text;
}

std::vector<std::string> companyNames(std::size_t n, Rng& rng) {
  std::vector<std::string> all;
  for (auto p : kNamePrefixes) {
    for (auto s : kNameSuffixes) all.push_back(std::string(p) + " " + std::string(s));
  }
  rng.shuffle(all);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name = all[i % all.size()];
    if (i >= all.size()) name += " " + std::to_string(i / all.size() + 1);
    out.push_back(std::move(name));
  }
  return out;
}

std::string companyId(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "C%03zu", i + 1);
  return buf;
}

Timestamp timestampOn(Date d, Rng& rng) {
  return Timestamp{d.time_since_epoch()} + std::chrono::hours{7 + rng.below(13)} +
         std::chrono::minutes{rng.below(60)};
}

std::vector<Date> weekdays(Date start, Date end) {
  std::vector<Date> out;
  for (Date d = start; d <= end; d += days{1}) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
  }
  return out;
}

// Index of the last trading day at or before d; dates must not precede the first day.
std::size_t dayIndexAtOrBefore(const std::vector<Date>& tradingDays, Date d) {
  const auto it = std::upper_bound(tradingDays.begin(), tradingDays.end(), d);
  return static_cast<std::size_t>(it - tradingDays.begin()) - 1;
}

struct Company {
  std::string id;
  std::string name;
  std::string country;
  std::string industry;
  double yearFounded = 0.0;
  double beta = 1.0;
  double sharesMillions = 0.0;
  double salesToCap = 0.0;
  double grossMargin = 0.0;
  double ebitMargin = 0.0;
  double leverage = 0.0;
  double cashShare = 0.0;
  double assetsToCap = 0.0;
  double shortInterest = 0.0;
  double floatPct = 0.0;
  double insiderPct = 0.0;
  double institutionalPct = 0.0;
};

}  // namespace

void validate(const GeneratorConfig& c) {
  if (c.corpusBuybacks + c.corpusAdversarial > c.corpusSize) {
    throw ConfigError("synth: corpus partitions exceed the corpus size");
  }
  if (c.corpusEvalSize > c.corpusSize) throw ConfigError("synth: evaluation split exceeds the corpus size");
  if (c.nCompanies == 0 || c.nAnnouncements == 0) throw ConfigError("synth: need companies and announcements");
  if (c.benchmarkDailyVolatility < 0.0 || c.idiosyncraticDailyVolatility < 0.0) {
    throw ConfigError("synth: volatility must be >= 0");
  }
  if (c.plantedEffect <= -1.0) throw ConfigError("synth: planted effect must be > -1");
  if (c.start + days{400} >= c.end) throw ConfigError("synth: date range too short");
  if (c.minAnnouncementGapDays < 1) throw ConfigError("synth: announcement gap must be >= 1 day");
  for (double rate : {c.duplicateRate, c.hardHeadlineRate, c.requiredMissingRate, c.optionalMissingRate}) {
    if (rate < 0.0 || rate > 1.0) throw ConfigError("synth: rates must lie in [0, 1]");
  }
  if (c.noisePerAnnouncement < 0.0) throw ConfigError("synth: noise rate must be >= 0");
}

std::string_view partitionName(Partition p) {
  switch (p) {
    case Partition::Buyback: return "buyback";
    case Partition::Other: return "other";
    case Partition::Adversarial: return "adversarial";
  }
  return "other";
}

std::vector<CorpusItem> generateCorpus(const GeneratorConfig& config) {
  validate(config);
  Rng rng(deriveSeed(config.seed, 1));
  const auto names = companyNames(std::max<std::size_t>(config.nCompanies, 1), rng);
  const auto span = static_cast<std::size_t>((config.end - config.start).count());
  const auto hard = static_cast<std::size_t>(std::llround(config.hardHeadlineRate * config.corpusBuybacks));
  std::vector<CorpusItem> out;
  for (std::size_t i = 0; i < config.corpusSize; ++i) {
    CorpusItem c;
    const std::size_t company = rng.below(names.size());
    std::string_view pattern;
    if (i < config.corpusBuybacks) {
      c.partition = Partition::Buyback;
      pattern = i < hard ? pick(kHardBuybackTemplates, rng) : pick(kBuybackTemplates, rng);
    } else if (i < config.corpusBuybacks + config.corpusAdversarial) {
      c.partition = Partition::Adversarial;
      pattern = pick(kAdversarialTemplates, rng);
    } else {
      c.partition = Partition::Other;
      pattern = pick(kOtherTemplates, rng);
    }
    c.item.companyId = companyId(company);
    c.item.headline = fillTemplate(pattern, names[company], rng);
    c.item.timestamp = timestampOn(config.start + days{static_cast<int>(rng.below(span + 1))}, rng);
    c.item.label = c.partition == Partition::Buyback;
    out.push_back(std::move(c));
  }
  rng.shuffle(out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "H%04zu", i + 1);
    out[i].item.id = buf;
    out[i].eval = i >= out.size() - config.corpusEvalSize;
  }
  return out;
}

nlohmann::json toJson(const CorpusItem& item) {
  nlohmann::json j = news::toJson(item.item);
  j["partition"] = partitionName(item.partition);
  j["split"] = item.eval ? "eval" : "train";
  return j;
}

Market generateMarket(const GeneratorConfig& config) {
  validate(config);
  const std::vector<Date> tradingDays = weekdays(config.start, config.end);
  const std::size_t nDays = tradingDays.size();
  Market market;

  // Benchmark and VIX: log-AR(1) volatility index scaling benchmark volatility.
  Rng marketRng(deriveSeed(config.seed, 2));
  std::vector<double> benchLog(nDays, 0.0);
  std::vector<event::PricePoint> benchPoints;
  std::vector<event::PricePoint> vixPoints;
  double logVix = std::log(18.0);
  double benchClose = 1000.0;
  for (std::size_t t = 0; t < nDays; ++t) {
    if (t > 0) {
      logVix += 0.02 * (std::log(18.0) - logVix) + 0.06 * marketRng.normal();
      const double sigma = config.benchmarkDailyVolatility * std::exp(logVix) / 18.0;
      benchLog[t] = config.benchmarkAnnualDrift / 252.0 - 0.5 * sigma * sigma + sigma * marketRng.normal();
      benchClose *= std::exp(benchLog[t]);
    }
    benchPoints.push_back({tradingDays[t], benchClose});
    vixPoints.push_back({tradingDays[t], std::exp(logVix)});
  }
  market.benchmark = event::PriceSeries("benchmark", std::move(benchPoints));
  market.vix = event::PriceSeries("vix", std::move(vixPoints));

  // Companies.
  Rng companyRng(deriveSeed(config.seed, 3));
  const auto names = companyNames(config.nCompanies, companyRng);
  std::vector<Company> companies;
  std::vector<double> startPrice;
  for (std::size_t i = 0; i < config.nCompanies; ++i) {
    Company c;
    c.id = companyId(i);
    c.name = names[i];
    c.country = std::string(pick(kCountries, companyRng));
    c.industry = std::string(pick(kIndustries, companyRng));
    c.yearFounded = 1850.0 + static_cast<double>(companyRng.below(161));
    c.beta = companyRng.uniform(0.7, 1.3);
    const double capMillions = std::pow(10.0, companyRng.uniform(1.3, 5.6));
    startPrice.push_back(std::exp(companyRng.uniform(std::log(5.0), std::log(300.0))));
    c.sharesMillions = capMillions / startPrice.back();
    c.salesToCap = std::exp(companyRng.normal(std::log(0.8), 0.5));
    c.grossMargin = companyRng.uniform(0.2, 0.7);
    c.ebitMargin = companyRng.normal(0.12, 0.08);
    c.leverage = companyRng.uniform(0.0, 1.0);
    c.cashShare = companyRng.uniform(0.02, 0.2);
    c.assetsToCap = companyRng.uniform(0.5, 2.5);
    c.shortInterest = companyRng.uniform(0.5, 15.0);
    c.floatPct = companyRng.uniform(50.0, 100.0);
    c.insiderPct = companyRng.uniform(0.0, 30.0);
    c.institutionalPct = companyRng.uniform(20.0, 95.0);
    companies.push_back(std::move(c));
  }

  // Announcement dates: per company, sorted trading days at least the minimum gap apart.
  Rng annRng(deriveSeed(config.seed, 4));
  std::vector<std::vector<std::size_t>> companyDays(config.nCompanies);
  for (std::size_t c = 0; c < config.nCompanies; ++c) {
    const std::size_t count = config.nAnnouncements / config.nCompanies + (c < config.nAnnouncements % config.nCompanies);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw ConfigError("synth: cannot space announcements; lower the count or the gap");
      std::vector<std::size_t> idx(count);
      for (auto& v : idx) v = 260 + annRng.below(nDays - 260);  // a year of history for trailing features
      std::sort(idx.begin(), idx.end());
      bool ok = true;
      for (std::size_t k = 1; k < idx.size(); ++k) {
        if ((tradingDays[idx[k]] - tradingDays[idx[k - 1]]).count() < config.minAnnouncementGapDays) ok = false;
      }
      if (ok) {
        companyDays[c] = std::move(idx);
        break;
      }
    }
  }

  struct Planned {
    std::size_t company;
    std::size_t day;
    double sizePct;
    bool hard;
    std::optional<int> duplicateOffset;
  };
  std::vector<Planned> planned;
  for (std::size_t c = 0; c < config.nCompanies; ++c) {
    for (std::size_t day : companyDays[c]) {
      Planned p{c, day, std::exp(annRng.normal(std::log(3.0), 0.8)), annRng.uniform() < config.hardHeadlineRate,
                std::nullopt};
      if (annRng.uniform() < config.duplicateRate) p.duplicateOffset = 1 + static_cast<int>(annRng.below(20));
      planned.push_back(p);
    }
  }

  // Stock paths with the planted ramp after flagged announcements.
  Rng pathRng(deriveSeed(config.seed, 5));
  std::vector<std::vector<double>> closes(config.nCompanies);
  const double plantedLog = std::log1p(config.plantedEffect);
  for (std::size_t c = 0; c < config.nCompanies; ++c) {
    std::vector<double> ramp(nDays, 0.0);
    for (const auto& p : planned) {
      if (p.company != c || !(p.sizePct > config.flagThreshold) || plantedLog == 0.0) continue;
      const Date horizon = addFrame(tradingDays[p.day], config.plantedFrame);
      if (horizon > tradingDays.back()) continue;
      const std::size_t last = dayIndexAtOrBefore(tradingDays, horizon);
      if (last <= p.day) continue;
      const double step = plantedLog / static_cast<double>(last - p.day);
      for (std::size_t t = p.day + 1; t <= last; ++t) ramp[t] += step;
    }
    std::vector<double>& path = closes[c];
    path.resize(nDays);
    path[0] = startPrice[c];
    const double idio = config.idiosyncraticDailyVolatility;
    for (std::size_t t = 1; t < nDays; ++t) {
      const double r = companies[c].beta * benchLog[t] - 0.5 * idio * idio + idio * pathRng.normal() + ramp[t];
      path[t] = path[t - 1] * std::exp(r);
    }
    std::vector<event::PricePoint> points(nDays);
    for (std::size_t t = 0; t < nDays; ++t) points[t] = {tradingDays[t], path[t]};
    market.stocks.emplace_back(companies[c].id, std::move(points));
  }

  // News stream: primaries, follow-ups and unrelated headlines.
  struct Draft {
    news::NewsItem item;
    std::optional<std::size_t> planned;
  };
  Rng newsRng(deriveSeed(config.seed, 6));
  std::vector<Draft> drafts;
  for (std::size_t i = 0; i < planned.size(); ++i) {
    const auto& p = planned[i];
    const auto& company = companies[p.company];
    const Date date = tradingDays[p.day];
    Draft primary;
    primary.item.companyId = company.id;
    primary.item.headline = fillTemplate(
        p.hard ? pick(kHardBuybackTemplates, newsRng) : pick(kBuybackTemplates, newsRng), company.name, newsRng);
    primary.item.timestamp = timestampOn(date, newsRng);
    primary.item.label = true;
    primary.planned = i;
    drafts.push_back(std::move(primary));
    if (p.duplicateOffset) {
      Draft dup;
      dup.item.companyId = company.id;
      dup.item.headline = fillTemplate(pick(kBuybackTemplates, newsRng), company.name, newsRng);
      dup.item.timestamp = timestampOn(date + days{*p.duplicateOffset}, newsRng);
      dup.item.label = true;
      dup.planned = i;
      drafts.push_back(std::move(dup));
    }
  }
  const auto noiseCount =
      static_cast<std::size_t>(std::llround(config.noisePerAnnouncement * static_cast<double>(planned.size())));
  for (std::size_t i = 0; i < noiseCount; ++i) {
    const auto& company = companies[newsRng.below(companies.size())];
    Draft d;
    d.item.companyId = company.id;
    const bool adversarial = newsRng.uniform() < 0.3;
    d.item.headline = fillTemplate(adversarial ? pick(kAdversarialTemplates, newsRng) : pick(kOtherTemplates, newsRng),
                                   company.name, newsRng);
    d.item.timestamp = timestampOn(tradingDays[newsRng.below(nDays)], newsRng);
    d.item.label = false;
    drafts.push_back(std::move(d));
  }
  std::stable_sort(drafts.begin(), drafts.end(),
                   [](const Draft& a, const Draft& b) { return a.item.timestamp < b.item.timestamp; });
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "N%06zu", i + 1);
    drafts[i].item.id = buf;
  }

  // Fundamentals for every buyback-labeled item, from prices up to its date.
  Rng featRng(deriveSeed(config.seed, 7));
  std::vector<std::string> ids;
  std::vector<std::string> companyCol;
  std::vector<std::string> country;
  std::vector<std::string> industry;
  std::map<std::string, std::vector<double>> num;
  static constexpr std::array<std::string_view, 29> kNumeric{
      "marketCap",          "lastSalePrice",         "totalEnterpriseValue",  "ebit",
      "revenue",            "grossProfit",           "shortInterestPct",      "floatPct",
      "returnOnCapitalPct", "priceEarnings",         "totalDebtToAssetsPct",  "yearFounded",
      "sharesOutstanding",  "basicEps",              "beta1Y",                "beta2Y",
      "beta5Y",             "bookValuePerShare",     "relativeStrengthIndex", "totalTransactionValue",
      "transactionSizePct", "priceVolatility3M",     "low52WeekPct",          "high52WeekPct",
      "insiderOwnershipPct", "institutionalOwnershipPct", "cashAndEquivalents", "longTermDebt",
      "totalDebtToEquityPct"};
  for (const auto& d : drafts) {
    if (!d.planned) continue;
    const auto& p = planned[*d.planned];
    const auto& co = companies[p.company];
    const std::vector<double>& path = closes[p.company];
    const std::size_t t = dayIndexAtOrBefore(tradingDays, dateOf(d.item.timestamp));
    const double price = path[t];
    const double cap = price * co.sharesMillions;
    const double revenue = cap * co.salesToCap * std::exp(featRng.normal(0.0, 0.1));
    const double ebit = revenue * (co.ebitMargin + featRng.normal(0.0, 0.02));
    const double debt = cap * co.leverage;
    const double cash = cap * co.cashShare;
    const double assets = cap * co.assetsToCap;
    const double equity = std::max(assets - debt, 0.05 * assets);
    const double eps = ebit * 0.625 / co.sharesMillions;

    std::vector<double> window;  // trailing log returns
    for (std::size_t k = t >= 63 ? t - 62 : 1; k <= t; ++k) window.push_back(std::log(path[k] / path[k - 1]));
    double gain = 0.0;
    double loss = 0.0;
    for (std::size_t k = t >= 14 ? t - 13 : 1; k <= t; ++k) {
      const double move = path[k] - path[k - 1];
      (move > 0 ? gain : loss) += std::abs(move);
    }
    const std::size_t from52 = t >= 252 ? t - 252 : 0;
    const double low = *std::min_element(path.begin() + static_cast<std::ptrdiff_t>(from52),
                                         path.begin() + static_cast<std::ptrdiff_t>(t) + 1);
    const double high = *std::max_element(path.begin() + static_cast<std::ptrdiff_t>(from52),
                                          path.begin() + static_cast<std::ptrdiff_t>(t) + 1);

    const std::map<std::string_view, double> row{
        {"marketCap", cap},
        {"lastSalePrice", price},
        {"totalEnterpriseValue", cap + debt - cash},
        {"ebit", ebit},
        {"revenue", revenue},
        {"grossProfit", revenue * co.grossMargin},
        {"shortInterestPct", co.shortInterest * std::exp(featRng.normal(0.0, 0.2))},
        {"floatPct", co.floatPct},
        {"returnOnCapitalPct", ebit * 0.625 / (debt + equity) * 100.0},
        {"priceEarnings", eps != 0.0 ? price / eps : 0.0},
        {"totalDebtToAssetsPct", debt / assets * 100.0},
        {"yearFounded", co.yearFounded},
        {"sharesOutstanding", co.sharesMillions},
        {"basicEps", eps},
        {"beta1Y", co.beta + featRng.normal(0.0, 0.15)},
        {"beta2Y", co.beta + featRng.normal(0.0, 0.1)},
        {"beta5Y", co.beta + featRng.normal(0.0, 0.05)},
        {"bookValuePerShare", equity / co.sharesMillions},
        {"relativeStrengthIndex", gain + loss > 0.0 ? 100.0 * gain / (gain + loss) : 50.0},
        {"totalTransactionValue", p.sizePct / 100.0 * cap},
        {"transactionSizePct", p.sizePct},
        {"priceVolatility3M", stats::sampleStd(window) * std::sqrt(252.0) * 100.0},
        {"low52WeekPct", price / low * 100.0},
        {"high52WeekPct", price / high * 100.0},
        {"insiderOwnershipPct", co.insiderPct},
        {"institutionalOwnershipPct", co.institutionalPct},
        {"cashAndEquivalents", cash},
        {"longTermDebt", 0.7 * debt},
        {"totalDebtToEquityPct", debt / equity * 100.0},
    };
    const bool dropRequired = featRng.uniform() < config.requiredMissingRate;
    const std::size_t requiredHole = featRng.below(data::kRequiredColumns.size());
    for (auto name : kNumeric) {
      double v = row.at(name);
      const auto required = std::find(data::kRequiredColumns.begin(), data::kRequiredColumns.end(), name);
      const bool isRequired = required != data::kRequiredColumns.end();
      const bool isSignal = name == "transactionSizePct" || name == "totalTransactionValue";
      if (isRequired) {
        if (dropRequired && static_cast<std::size_t>(required - data::kRequiredColumns.begin()) == requiredHole) {
          v = std::nan("");
        }
      } else if (!isSignal && featRng.uniform() < config.optionalMissingRate) {
        v = std::nan("");
      }
      num[std::string(name)].push_back(v);
    }
    ids.push_back(d.item.id);
    companyCol.push_back(co.id);
    country.push_back(co.country);
    industry.push_back(co.industry);
  }
  market.fundamentals.addCategorical("announcementId", std::move(ids));
  market.fundamentals.addCategorical("companyId", std::move(companyCol));
  market.fundamentals.addCategorical("country", std::move(country));
  market.fundamentals.addCategorical("primaryIndustry", std::move(industry));
  for (auto name : kNumeric) market.fundamentals.addNumeric(std::string(name), std::move(num[std::string(name)]));

  for (const auto& d : drafts) market.news.push_back(d.item);
  for (const auto& d : drafts) {
    if (!d.planned) continue;
    const auto& p = planned[*d.planned];
    if (dateOf(d.item.timestamp) != tradingDays[p.day]) continue;  // follow-up
    market.announcements.push_back({d.item.id, companies[p.company].id, tradingDays[p.day],
                                    p.sizePct > config.flagThreshold});
  }
  return market;
}

void writeAll(const std::filesystem::path& dir, const Market& market, const std::vector<CorpusItem>& corpus) {
  std::filesystem::create_directories(dir / "prices");
  event::writePriceCsv(dir / "benchmark.csv", market.benchmark);
  event::writePriceCsv(dir / "vix.csv", market.vix);
  for (const auto& s : market.stocks) event::writePriceCsv(dir / "prices" / (s.instrumentId() + ".csv"), s);
  std::vector<nlohmann::json> news;
  for (const auto& n : market.news) news.push_back(news::toJson(n));
  io::writeJsonl(dir / "news.jsonl", news);
  io::writeCsv(dir / "fundamentals.csv", market.fundamentals.toCsv());
  std::vector<nlohmann::json> items;
  for (const auto& c : corpus) items.push_back(toJson(c));
  io::writeJsonl(dir / "corpus.jsonl", items);
}

}  // namespace buyback::synth
