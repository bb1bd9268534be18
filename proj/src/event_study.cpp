#include "buyback/event_study.hpp"

#include <algorithm>
#include <cmath>

#include "buyback/common.hpp"
#include "buyback/io.hpp"

namespace buyback::event {

PriceSeries::PriceSeries(std::string instrumentId, std::vector<PricePoint> points)
    : instrumentId_(std::move(instrumentId)), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].close > 0.0) || !std::isfinite(points_[i].close)) {
      throw DataError("price series " + instrumentId_ + ": non-positive close on " + formatDate(points_[i].date));
    }
    if (i > 0 && points_[i].date <= points_[i - 1].date) {
      throw DataError("price series " + instrumentId_ + ": dates not strictly increasing at " +
                      formatDate(points_[i].date));
    }
  }
}

std::optional<PricePoint> PriceSeries::atOrBefore(Date date) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), date,
                             [](Date d, const PricePoint& p) { return d < p.date; });
  if (it == points_.begin()) return std::nullopt;
  return *std::prev(it);
}

PriceSeries readPriceCsv(const std::filesystem::path& path, std::string instrumentId) {
  const io::CsvTable csv = io::readCsv(path);
  const std::size_t dateCol = csv.columnIndex("date");
  const std::size_t closeCol = csv.columnIndex("close");
  std::vector<PricePoint> points;
  points.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    points.push_back({parseDate(row[dateCol]), io::parseNumber(row[closeCol])});
  }
  return PriceSeries(std::move(instrumentId), std::move(points));
}

void writePriceCsv(const std::filesystem::path& path, const PriceSeries& series) {
  io::CsvTable csv;
  csv.header = {"date", "close"};
  csv.rows.reserve(series.points().size());
  for (const auto& p : series.points()) csv.rows.push_back({formatDate(p.date), io::formatNumber(p.close)});
  io::writeCsv(path, csv);
}

std::optional<double> horizonReturn(const PriceSeries& series, Date announceDate, TimeFrame frame,
                                    int maxStalenessDays) {
  if (series.empty()) throw DataError("horizonReturn: empty price series " + series.instrumentId());
  const Date target = addFrame(announceDate, frame);
  if (target > series.points().back().date) return std::nullopt;

  const auto base = series.atOrBefore(announceDate);
  const auto horizon = series.atOrBefore(target);
  if (!base || !horizon) return std::nullopt;
  if ((announceDate - base->date).count() > maxStalenessDays) return std::nullopt;
  if ((target - horizon->date).count() > maxStalenessDays) return std::nullopt;
  return horizon->close / base->close - 1.0;
}

double annualize(double r, TimeFrame frame) {
  if (!(r > -1.0)) throw DomainError("annualize: return must exceed -1");
  if (periodsPerYear(frame) == 1.0) return r;  // exact fixed point
  return std::pow(1.0 + r, periodsPerYear(frame)) - 1.0;
}

double deannualize(double annualized, TimeFrame frame) {
  if (!(annualized > -1.0)) throw DomainError("deannualize: value must exceed -1");
  if (periodsPerYear(frame) == 1.0) return annualized;
  return std::pow(1.0 + annualized, 1.0 / periodsPerYear(frame)) - 1.0;
}

MarketCapClass classifyMarketCap(double capUsd) {
  if (!(capUsd >= 0.0)) throw DomainError("market cap must be non-negative");
  if (capUsd < 50e6) return MarketCapClass::Nano;
  if (capUsd < 300e6) return MarketCapClass::Micro;
  if (capUsd < 2e9) return MarketCapClass::Small;
  if (capUsd < 10e9) return MarketCapClass::Mid;
  if (capUsd < 200e9) return MarketCapClass::Large;
  return MarketCapClass::Mega;
}

std::string_view capClassLabel(MarketCapClass c) {
  static constexpr std::array<std::string_view, 6> labels{"Nano", "Micro", "Small", "Mid", "Large", "Mega"};
  return labels[static_cast<std::size_t>(c)];
}

HorizonStats summarize(std::span<const double> returns, TimeFrame frame) {
  if (returns.empty()) throw DataError("summarize: empty sample");
  std::vector<double> sorted(returns.begin(), returns.end());
  std::sort(sorted.begin(), sorted.end());
  HorizonStats s;
  s.frame = frame;
  s.count = returns.size();
  s.mean = stats::mean(returns);
  s.standardDeviation = stats::sampleStd(returns);
  s.percentile25 = stats::percentileSorted(sorted, 0.25);
  s.median = stats::percentileSorted(sorted, 0.5);
  s.percentile75 = stats::percentileSorted(sorted, 0.75);
  return s;
}

AnnualizedSummary annualizedSummary(std::span<const double> returns, TimeFrame frame) {
  if (returns.empty()) throw DataError("annualizedSummary: empty sample");
  AnnualizedSummary out;
  out.frame = frame;
  out.count = returns.size();
  if (periodsPerYear(frame) > 1.0) {
    out.mean = annualize(stats::mean(returns), frame);
    out.median = annualize(stats::median(returns), frame);
  } else {
    std::vector<double> annual(returns.size());
    std::transform(returns.begin(), returns.end(), annual.begin(), [frame](double r) { return annualize(r, frame); });
    out.mean = stats::mean(annual);
    out.median = stats::median(annual);
  }
  return out;
}

RegimeSplit regimeSplit(std::span<const RegimeSample> samples, TimeFrame frame, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("regime threshold must be positive");
  std::vector<double> bear;
  std::vector<double> bull;
  for (const auto& s : samples) (s.vix > threshold ? bear : bull).push_back(s.value);
  RegimeSplit split;
  split.threshold = threshold;
  if (!bear.empty()) split.bear = summarize(bear, frame);
  if (!bull.empty()) split.bull = summarize(bull, frame);
  if (split.bear && split.bull) {
    split.deltaMean = split.bear->mean - split.bull->mean;
    split.deltaMedian = split.bear->median - split.bull->median;
  }
  return split;
}

}  // namespace buyback::event
