#include "buyback/backtest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "buyback/common.hpp"

namespace buyback::backtest {

bool gateSignal(const GateOutputs& o) {
  if (!o.classPerf || !o.classOver || !o.regPerf || !o.regOver) return false;
  return *o.classPerf == 1 && *o.classOver == 1 && *o.regPerf >= 0.0 && *o.regOver >= 0.0;
}

std::optional<double> sharpeFromMoments(double mean, double std) {
  if (!(std > 0.0) || !std::isfinite(std) || !std::isfinite(mean)) return std::nullopt;
  return mean / std;
}

std::optional<double> sharpe(std::span<const double> excess) {
  if (excess.size() < 2) return std::nullopt;
  return sharpeFromMoments(stats::mean(excess), stats::sampleStd(excess));
}

double valueAtRisk(std::span<const double> excess, double p) {
  if (excess.empty()) throw DataError("value at risk of an empty list");
  return stats::percentile(excess, p);
}

BacktestStats computeStats(std::span<const TradeRecord> trades) {
  if (trades.empty()) throw DataError("backtest statistics need at least one trade");
  std::vector<double> excess;
  excess.reserve(trades.size());
  for (const auto& t : trades) excess.push_back(t.excess());
  BacktestStats s;
  s.trades = excess.size();
  s.sum = stats::sum(excess);
  s.mean = stats::mean(excess);
  s.std = stats::sampleStd(excess);
  s.median = stats::median(excess);
  const auto winners = std::count_if(excess.begin(), excess.end(), [](double e) { return e > 0.0; });
  s.accuracy = static_cast<double>(winners) / static_cast<double>(excess.size());
  s.sharpe = sharpe(excess);
  s.valueAtRisk = valueAtRisk(excess);
  return s;
}

namespace {

TradeRecord tradeOf(const TestRow& row, TimeFrame f) {
  return {row.id, f, *row.stockReturn[frameIndex(f)], *row.benchmarkReturn[frameIndex(f)]};
}

}  // namespace

BacktestStats runNaive(std::span<const TestRow> rows, TimeFrame frame) {
  std::vector<TradeRecord> trades;
  for (const auto& row : rows) {
    if (row.hasReturn(frame)) trades.push_back(tradeOf(row, frame));
  }
  if (trades.empty()) throw DataError("naive backtest: no test row has " + std::string(frameLabel(frame)) + " returns");
  return computeStats(trades);
}

std::size_t StrategyCombo::gateCount() const { return static_cast<std::size_t>(std::popcount(gating)); }

std::vector<TimeFrame> StrategyCombo::gatingFrames() const {
  std::vector<TimeFrame> out;
  for (TimeFrame f : kAllFrames) {
    if (gates(f)) out.push_back(f);
  }
  return out;
}

std::string StrategyCombo::build() const {
  std::string out;
  for (TimeFrame f : gatingFrames()) {
    if (!out.empty()) out += ' ';
    out += frameLabel(f);
  }
  return out;
}

bool gatingOrder(const StrategyCombo& a, const StrategyCombo& b) {
  if (a.gateCount() != b.gateCount()) return a.gateCount() < b.gateCount();
  const auto fa = a.gatingFrames();
  const auto fb = b.gatingFrames();
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end());
}

ComboEnumeration enumerateCombos() {
  constexpr std::size_t kSlots = 6;
  ComboEnumeration out;
  std::set<std::pair<std::size_t, std::uint8_t>> seen;  // (target, gating)
  std::array<std::size_t, kSlots + 1> digits{};
  const std::uint64_t total = 279936;  // 6^7
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    for (auto& d : digits) {
      d = rest % 6;
      rest /= 6;
    }
    std::uint8_t gating = 0;
    for (std::size_t s = 0; s < kSlots; ++s) gating |= static_cast<std::uint8_t>(1U << digits[s]);
    ++out.rawCount;
    seen.emplace(digits[kSlots], gating);
  }
  for (const auto& [target, gating] : seen) out.combos.push_back({gating, kAllFrames[target]});
  std::stable_sort(out.combos.begin(), out.combos.end(), [](const StrategyCombo& a, const StrategyCombo& b) {
    if (a.target != b.target) return frameIndex(a.target) < frameIndex(b.target);
    return gatingOrder(a, b);
  });
  return out;
}

std::vector<std::size_t> comboTrades(std::span<const TestRow> rows, const GateSignals& signals,
                                     const StrategyCombo& combo) {
  if (signals.size() != rows.size()) throw DataError("gate signals and test rows differ in length");
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].hasReturn(combo.target)) continue;
    bool all = true;
    for (TimeFrame f : kAllFrames) {
      if (combo.gates(f) && !signals[r][frameIndex(f)]) {
        all = false;
        break;
      }
    }
    if (all) out.push_back(r);
  }
  return out;
}

std::optional<BacktestStats> runCombo(std::span<const TestRow> rows, const GateSignals& signals,
                                      const StrategyCombo& combo) {
  const auto picked = comboTrades(rows, signals, combo);
  if (picked.empty()) return std::nullopt;
  std::vector<TradeRecord> trades;
  trades.reserve(picked.size());
  for (std::size_t r : picked) trades.push_back(tradeOf(rows[r], combo.target));
  return computeStats(trades);
}

std::vector<BestCombo> optimizeStrategies(std::span<const ComboResult> results, Criterion criterion) {
  auto score = [criterion](const ComboResult& r) -> std::optional<double> {
    if (!r.stats) return std::nullopt;
    if (criterion == Criterion::Sharpe) return r.stats->sharpe;
    return r.stats->valueAtRisk;
  };
  std::vector<BestCombo> out;
  for (TimeFrame target : kAllFrames) {
    BestCombo best{target, std::nullopt};
    std::optional<double> bestScore;
    for (const auto& r : results) {
      if (r.combo.target != target) continue;
      const auto s = score(r);
      if (!s) continue;
      const bool better = !bestScore || *s > *bestScore ||
                          (*s == *bestScore && gatingOrder(r.combo, best.best->combo));
      if (better) {
        bestScore = s;
        best.best = r;
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

const std::vector<std::string>& reportHeader() {
  static const std::vector<std::string> header{"timeFrame", "build", "trades",      "mean",       "std",
                                               "median",    "accuracy", "sum", "sharpeRatio", "valueAtRisk"};
  return header;
}

std::vector<std::string> reportRow(TimeFrame frame, const std::string& build,
                                   const std::optional<BacktestStats>& s) {
  std::vector<std::string> row{std::string(frameLabel(frame)), build};
  if (!s) {
    row.push_back("0");
    row.resize(reportHeader().size());
    return row;
  }
  row.push_back(std::to_string(s->trades));
  for (double v : {s->mean, s->std, s->median, s->accuracy, s->sum}) row.push_back(io::formatFixed(v, 6));
  row.push_back(s->sharpe ? io::formatFixed(*s->sharpe, 6) : "");
  row.push_back(io::formatFixed(s->valueAtRisk, 6));
  return row;
}

}  // namespace buyback::backtest
