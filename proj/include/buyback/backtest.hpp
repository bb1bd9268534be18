#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "buyback/dates.hpp"
#include "buyback/io.hpp"

namespace buyback::backtest {

/// The four model outputs for one announcement and frame. Regression outputs
/// are in raw return units.
struct GateOutputs {
  std::optional<int> classPerf;
  std::optional<int> classOver;
  std::optional<double> regPerf;
  std::optional<double> regOver;
};

/// True iff both classifiers say 1 and both regressors are >= 0. Any missing
/// output yields false.
bool gateSignal(const GateOutputs& outputs);

/// mean / std; missing when std is zero or not finite.
std::optional<double> sharpeFromMoments(double mean, double std);
/// Mean over sample std (n - 1); missing for fewer than two values or zero std.
std::optional<double> sharpe(std::span<const double> excess);
/// p-th percentile of excess, linear interpolation. Throws DataError when empty.
double valueAtRisk(std::span<const double> excess, double p = 0.05);

struct TradeRecord {
  std::string id;
  TimeFrame target = TimeFrame::W1;
  double stockReturn = 0.0;
  double benchmarkReturn = 0.0;
  double excess() const { return stockReturn - benchmarkReturn; }
};

struct BacktestStats {
  std::size_t trades = 0;
  double mean = 0.0;
  double std = 0.0;  // sample std; 0 for one trade
  double median = 0.0;
  double accuracy = 0.0;  // fraction with excess > 0
  double sum = 0.0;
  std::optional<double> sharpe;
  double valueAtRisk = 0.0;
};

/// Throws DataError on an empty trade list.
BacktestStats computeStats(std::span<const TradeRecord> trades);

/// One test announcement with realized returns per frame.
struct TestRow {
  std::string id;
  std::array<std::optional<double>, 6> stockReturn;
  std::array<std::optional<double>, 6> benchmarkReturn;
  bool hasReturn(TimeFrame f) const {
    return stockReturn[frameIndex(f)].has_value() && benchmarkReturn[frameIndex(f)].has_value();
  }
};

/// Buys every announcement with returns for the frame. Throws DataError when
/// no row qualifies.
BacktestStats runNaive(std::span<const TestRow> rows, TimeFrame frame);

/// Gating frames as a bit set over frame indices plus the holding frame.
struct StrategyCombo {
  std::uint8_t gating = 0;
  TimeFrame target = TimeFrame::W1;

  bool gates(TimeFrame f) const { return (gating >> frameIndex(f)) & 1U; }
  std::size_t gateCount() const;
  std::vector<TimeFrame> gatingFrames() const;
  /// Gating frame labels in frame order, e.g. "1W 1M 6M 1Y".
  std::string build() const;
  bool operator==(const StrategyCombo&) const = default;
};

/// Fewer gates first, then the gating frame lists lexicographically.
bool gatingOrder(const StrategyCombo& a, const StrategyCombo& b);

struct ComboEnumeration {
  std::uint64_t rawCount = 0;
  std::vector<StrategyCombo> combos;  // by target, then gatingOrder
};

/// Walks every assignment of a frame to each of six gate slots and a target
/// (6^7 tuples) and keeps one combo per (gating set, target).
ComboEnumeration enumerateCombos();

/// Per announcement, the gate signal of each frame.
using GateSignals = std::vector<std::array<bool, 6>>;

/// Rows that trade: every gating frame signals and the target has returns.
std::vector<std::size_t> comboTrades(std::span<const TestRow> rows, const GateSignals& signals,
                                     const StrategyCombo& combo);
/// Stats of the combo's trades; missing when nothing trades.
std::optional<BacktestStats> runCombo(std::span<const TestRow> rows, const GateSignals& signals,
                                      const StrategyCombo& combo);

enum class Criterion { Sharpe, ValueAtRisk };

struct ComboResult {
  StrategyCombo combo;
  std::optional<BacktestStats> stats;
};

struct BestCombo {
  TimeFrame target = TimeFrame::W1;
  std::optional<ComboResult> best;  // missing when no combo for the target has the criterion
};

/// Per target frame, the combo with the highest criterion value; ties go to
/// fewer gates, then gatingOrder.
std::vector<BestCombo> optimizeStrategies(std::span<const ComboResult> results, Criterion criterion);

/// timeFrame, build, trades, mean, std, median, accuracy, sum, sharpeRatio, valueAtRisk
const std::vector<std::string>& reportHeader();
/// A report row; missing stats leave the numeric cells empty.
std::vector<std::string> reportRow(TimeFrame frame, const std::string& build,
                                   const std::optional<BacktestStats>& stats);

}  // namespace buyback::backtest
