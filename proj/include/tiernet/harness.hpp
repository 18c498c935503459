#pragma once

#include "tiernet/config.hpp"
#include "tiernet/transport.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tiernet {

/// Points of a sweep: every (n, ap_scale) pair, each with `seeds` seeds
/// starting at seed0.
struct SweepPlan
{
  std::vector<double> nValues{64, 128, 256, 512, 1024};
  std::vector<double> apScales{1.0};
  int seeds = 5;
  std::uint64_t seed0 = 1;
  SimConfig base; ///< beta, alpha, frames, warmup and simulation controls

  void Validate () const;
  std::vector<SimConfig> Points () const;
};

struct ExperimentResult
{
  SimConfig config;
  double m = 0.0;
  double ap = 0.0; ///< realized 1/k_p^2
  double as = 0.0; ///< realized 1/k_s^2
  int kp = 0;
  int ks = 0;
  std::uint32_t relayCount = 0;

  double lambdaP = 0.0;
  double throughputP = 0.0;
  double delayP = 0.0;
  double lambdaS = 0.0;
  double throughputS = 0.0;
  double delayS = 0.0;
  double minSinrPrimary = 0.0;
  double minSinrDelivery = 0.0;
  double minSinrSecondary = 0.0;
  double dropRate = 0.0;
  bool valid = true;
  std::vector<std::string> flags;

  std::uint64_t primaryPairs = 0;
  std::uint64_t secondaryPairs = 0;
  std::uint64_t sampledFlows = 0;
  double captureFraction = 0.0;
  RawMetrics raw;
  InvariantCounters invariants;
  std::uint64_t auditExclusionViolations = 0;
  std::uint64_t auditedSlots = 0;
  std::vector<PacketRecord> records; ///< filled only on request
};

struct RunOptions
{
  bool audit = true;
  bool keepRecords = false;
};

/// Deployment, schedule, transport and PHY audit for one configuration.
/// Deterministic for a given config. Configuration errors propagate.
ExperimentResult RunPoint (const SimConfig &config, const RunOptions &options = {});

/// Runs every point of the plan on up to `threads` workers (0 picks the
/// hardware concurrency). Results come back ordered by (n, ap_scale, seed).
std::vector<ExperimentResult> RunSweep (const SweepPlan &plan, unsigned threads = 0, const RunOptions &options = {});

struct Fit
{
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0; ///< max absolute residual
  std::size_t points = 0;
};

/// Least squares on (ln x, ln y). Needs >= 3 points with distinct x;
/// throws std::domain_error on non-positive values.
Fit FitExponent (std::span<const std::pair<double, double>> points);

/// Least squares on (x, y) in natural units.
Fit FitLinear (std::span<const std::pair<double, double>> points);

enum class Verdict
{
  Pass,
  Fail,
  Inconclusive
};

const char *ToString (Verdict v);

struct Tolerances
{
  double slope = 0.15;
  double constFactor = 2.0;
};

enum class CheckKind
{
  Exponent,
  Constancy,
  Linear
};

struct TheoremCheck
{
  std::string name;
  CheckKind kind = CheckKind::Exponent;
  double expected = 1.0; ///< exponent, or reference slope for Linear
  std::optional<Fit> fit;
  double spread = 0.0; ///< max/min ratio for Constancy
  std::size_t points = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::string detail;
};

struct FitReport
{
  Tolerances tolerances;
  std::vector<TheoremCheck> checks;

  bool AllPass () const;
  const TheoremCheck *Find (const std::string &name) const;
};

namespace checks {
inline constexpr const char *kLambdaS = "lambda_s ~ 1/(m sqrt(a_s))";
inline constexpr const char *kThroughputS = "T_s ~ 1/sqrt(a_s)";
inline constexpr const char *kDelayS = "D_s ~ 1/sqrt(a_s)";
inline constexpr const char *kTradeoffS = "D_s ~ m lambda_s";
inline constexpr const char *kLambdaP = "lambda_p ~ 1/(n a_p)";
inline constexpr const char *kThroughputP = "T_p ~ 1/a_p";
inline constexpr const char *kDelayP = "D_p ~ sqrt(m ln m)/(n a_p)";
inline constexpr const char *kTradeoffP = "D_p ~ sqrt(n^beta ln n) lambda_p";
inline constexpr const char *kDelayRelation = "D_p = (3/64) D_s + C";
inline constexpr const char *kLambdaPConst = "lambda_p n a_p constant";
inline constexpr const char *kLambdaPLog = "lambda_p ln n constant (ap_scale = 1)";
} // namespace checks

/// Per-point means over seeds of valid results, keyed by (n, beta, ap_scale).
struct AggregatePoint
{
  double n = 0.0;
  double beta = 0.0;
  double apScale = 0.0;
  double m = 0.0;
  double ap = 0.0;
  double as = 0.0;
  double lambdaP = 0.0;
  double throughputP = 0.0;
  double delayP = 0.0;
  double lambdaS = 0.0;
  double throughputS = 0.0;
  double delayS = 0.0;
  std::size_t runs = 0;
};

std::vector<AggregatePoint> Aggregate (std::span<const ExperimentResult> results);

/// Fits every scaling law over the valid results.
FitReport CheckTheorems (std::span<const ExperimentResult> results, const Tolerances &tolerances = {});

// Output. Every writer throws std::runtime_error naming the path when the
// file cannot be written; empty result sets are rejected before any file is
// created.
inline constexpr int kCsvColumns = 20;
std::string CsvHeader ();
std::string CsvRow (const ExperimentResult &r);
void WriteCsv (std::span<const ExperimentResult> results, const std::string &path);
void WriteJson (std::span<const ExperimentResult> results, const FitReport &report, const std::string &path);
std::string FormatFitReport (const FitReport &report);
void WriteFitReport (const FitReport &report, const std::string &path);
/// Per-packet rows: id, tier, creation_slot, delivery_slot, path_length, segments.
void WriteTrace (std::span<const ExperimentResult> results, const std::string &path);

/// Shortest decimal string that parses back to the same double.
std::string FormatNumber (double v);

/// Reads a sweep plan from JSON text using SimConfig/SweepPlan field names.
/// Keys absent from the text keep the values already in `plan`.
void ApplyPlanJson (const std::string &text, SweepPlan &plan);

} // namespace tiernet
