#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buyback/dates.hpp"

namespace buyback::event {

struct PricePoint {
  Date date;
  double close = 0.0;
};

/// Dated closes for one instrument; dates strictly increasing, closes > 0.
class PriceSeries {
 public:
  PriceSeries() = default;
  PriceSeries(std::string instrumentId, std::vector<PricePoint> points);

  const std::string& instrumentId() const { return instrumentId_; }
  std::span<const PricePoint> points() const { return points_; }
  bool empty() const { return points_.empty(); }

  /// Last point dated at or before `date`.
  std::optional<PricePoint> atOrBefore(Date date) const;

 private:
  std::string instrumentId_;
  std::vector<PricePoint> points_;
};

/// Reads a `date,close` CSV.
PriceSeries readPriceCsv(const std::filesystem::path& path, std::string instrumentId);
void writePriceCsv(const std::filesystem::path& path, const PriceSeries& series);

inline constexpr int kMaxStalenessDays = 7;

/// Close-to-close return from the last close at or before the announcement to
/// the last close at or before announcement + frame offset. Missing when an
/// anchor is absent, staler than `maxStalenessDays`, or the horizon date lies
/// beyond the series.
std::optional<double> horizonReturn(const PriceSeries& series, Date announceDate, TimeFrame frame,
                                    int maxStalenessDays = kMaxStalenessDays);

/// Excess return in percentage points (fraction delta).
inline double overperformance(double stockReturn, double benchmarkReturn) { return stockReturn - benchmarkReturn; }

/// Compound annualization (1 + r)^periodsPerYear - 1. Requires r > -1.
double annualize(double r, TimeFrame frame);
/// Inverse of annualize.
double deannualize(double annualized, TimeFrame frame);

enum class MarketCapClass { Nano, Micro, Small, Mid, Large, Mega };

inline constexpr std::array<MarketCapClass, 6> kAllCapClasses{MarketCapClass::Nano,  MarketCapClass::Micro,
                                                             MarketCapClass::Small, MarketCapClass::Mid,
                                                             MarketCapClass::Large, MarketCapClass::Mega};

/// Lower bound inclusive, upper exclusive: 50M, 300M, 2B, 10B, 200B USD.
MarketCapClass classifyMarketCap(double capUsd);
std::string_view capClassLabel(MarketCapClass c);

struct HorizonStats {
  TimeFrame frame = TimeFrame::W1;
  std::size_t count = 0;
  double mean = 0.0;
  double standardDeviation = 0.0;
  double percentile25 = 0.0;
  double median = 0.0;
  double percentile75 = 0.0;
};

/// Sample statistics; std uses n - 1 (0 for a single sample), percentiles
/// interpolate linearly. Throws DataError on an empty sample.
HorizonStats summarize(std::span<const double> returns, TimeFrame frame);

/// Mean and median after annualization. Frames shorter than a year annualize
/// the aggregate; longer frames annualize each sample and aggregate after.
struct AnnualizedSummary {
  TimeFrame frame = TimeFrame::W1;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
};
AnnualizedSummary annualizedSummary(std::span<const double> returns, TimeFrame frame);

struct RegimeSample {
  double vix = 0.0;
  double value = 0.0;
};

/// Bear side: vix strictly above the threshold; bull side: at or below.
struct RegimeSplit {
  double threshold = 25.0;
  std::optional<HorizonStats> bear;
  std::optional<HorizonStats> bull;
  std::optional<double> deltaMean;    // bear.mean - bull.mean
  std::optional<double> deltaMedian;  // bear.median - bull.median
};

RegimeSplit regimeSplit(std::span<const RegimeSample> samples, TimeFrame frame, double threshold = 25.0);

}  // namespace buyback::event
