#include "tiernet/harness.hpp"

#include "tiernet/geometry.hpp"
#include "tiernet/phy.hpp"
#include "tiernet/rng.hpp"
#include "tiernet/routing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace tiernet {

void
SweepPlan::Validate () const
{
  if (nValues.empty ())
    throw ConfigError ("sweep needs at least one n value");
  if (!std::is_sorted (nValues.begin (), nValues.end ())
      || std::adjacent_find (nValues.begin (), nValues.end ()) != nValues.end ())
    throw ConfigError ("n values must be strictly increasing");
  if (apScales.empty ())
    throw ConfigError ("sweep needs at least one ap_scale value");
  if (seeds <= 0)
    throw ConfigError ("seeds must be positive");
  for (const SimConfig &c : Points ())
    c.Validate ();
}

std::vector<SimConfig>
SweepPlan::Points () const
{
  std::vector<SimConfig> points;
  for (double n : nValues)
    for (double ap : apScales)
      for (int s = 0; s < seeds; ++s)
        {
          SimConfig c = base;
          c.n = n;
          c.apScale = ap;
          c.seed = seed0 + static_cast<std::uint64_t> (s);
          points.push_back (c);
        }
  return points;
}

ExperimentResult
RunPoint (const SimConfig &config, const RunOptions &options)
{
  config.Validate ();
  const Deployment d = BuildDeployment (config);
  const RelayAssignment relays = SelectRelays (d, DeriveSeed (config.seed, Stream::Relays));

  ExperimentResult r;
  r.config = config;
  r.m = config.M ();
  r.ap = d.PrimaryGrid ().CellArea ();
  r.as = d.SecondaryGrid ().CellArea ();
  r.kp = d.PrimaryGrid ().SideCount ();
  r.ks = d.SecondaryGrid ().SideCount ();
  r.relayCount = RelayCount (r.m);
  r.primaryPairs = d.primaryPairs.size ();
  r.secondaryPairs = d.secondaryPairs.size ();
  r.captureFraction = relays.SecondaryCaptureFraction (d);

  const OccupancyReport occupancy = CellOccupancy (d, r.relayCount);
  if (occupancy.emptyPrimaryCell)
    r.flags.push_back ("empty_primary_cell");
  if (occupancy.emptySecondaryCell)
    r.flags.push_back ("empty_secondary_cell");
  if (occupancy.primaryCellBelowRelayCount)
    r.flags.push_back ("relay_shortage");

  Simulation sim (d, relays, {options.audit});
  sim.Run ();
  r.raw = sim.Measure ();
  r.invariants = sim.State ().Invariants ();
  r.sampledFlows = sim.State ().Flows ().size ();

  r.lambdaP = r.raw.lambdaP;
  r.lambdaS = r.raw.lambdaS;
  r.throughputP = r.lambdaP * static_cast<double> (r.primaryPairs);
  r.throughputS = r.lambdaS * static_cast<double> (r.secondaryPairs);
  r.delayP = r.raw.delayP;
  r.delayS = r.raw.delayS;
  r.dropRate = r.raw.dropRate;

  const double nan = std::numeric_limits<double>::quiet_NaN ();
  r.minSinrPrimary = r.minSinrDelivery = r.minSinrSecondary = nan;
  if (options.audit)
    {
      AuditOptions ao;
      ao.stride = config.auditStride;
      ao.alpha = config.alpha;
      ao.powerConst = config.powerConst;
      ao.noise = config.noise;
      // Intra-secondary receptions are audited over the first frame only.
      const auto &slots = sim.AuditSlots ();
      ao.includeSecondary = false;
      RateReport rates = MinRateAudit (d, relays, slots, ao);
      ao.includeSecondary = true;
      const std::size_t head = std::min<std::size_t> (slots.size (), kSlotsPerFrame);
      const RateReport first = MinRateAudit (d, relays, std::span (slots).first (head), ao);
      rates.secondary = first.secondary;
      auto pick = [nan] (const CategoryMin &c) { return c.links == 0 ? nan : c.minSinr; };
      r.minSinrPrimary = pick (rates.primary);
      r.minSinrDelivery = pick (rates.delivery);
      r.minSinrSecondary = pick (rates.secondary);
      r.auditExclusionViolations = rates.exclusionViolations;
      r.auditedSlots = rates.slotsAudited;
    }

  if (r.dropRate > 0.01)
    r.flags.push_back ("drop_rate");
  if (r.raw.lowConfidence)
    r.flags.push_back ("low_confidence");
  if (r.raw.undrained)
    r.flags.push_back ("undrained");
  if (r.raw.delayUndefinedP || r.raw.delayUndefinedS)
    r.flags.push_back ("delay_undefined");
  if (!r.invariants.AllClear () || r.auditExclusionViolations != 0)
    r.flags.push_back ("invariant_violation");
  r.valid = r.flags.empty ();

  if (options.keepRecords)
    r.records = sim.State ().Records ();
  return r;
}

std::vector<ExperimentResult>
RunSweep (const SweepPlan &plan, unsigned threads, const RunOptions &options)
{
  plan.Validate ();
  const std::vector<SimConfig> points = plan.Points ();
  if (threads == 0)
    threads = std::max (1u, std::thread::hardware_concurrency ());
  threads = std::min<unsigned> (threads, static_cast<unsigned> (points.size ()));

  std::vector<ExperimentResult> results (points.size ());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size (); i = next++)
      {
        try
          {
            results[i] = RunPoint (points[i], options);
          }
        catch (...)
          {
            std::lock_guard lock (failureMutex);
            if (!failure)
              failure = std::current_exception ();
          }
      }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t)
    pool.emplace_back (worker);
  worker ();
  for (auto &t : pool)
    t.join ();
  if (failure)
    std::rethrow_exception (failure);

  std::sort (results.begin (), results.end (), [] (const ExperimentResult &a, const ExperimentResult &b) {
    return std::tie (a.config.n, a.config.apScale, a.config.seed) < std::tie (b.config.n, b.config.apScale, b.config.seed);
  });
  return results;
}

namespace {

void
CheckFitInput (std::span<const std::pair<double, double>> points)
{
  if (points.size () < 3)
    throw std::invalid_argument ("fit needs at least 3 points");
  const double x0 = points.front ().first;
  if (std::all_of (points.begin (), points.end (), [x0] (const auto &p) { return p.first == x0; }))
    throw std::invalid_argument ("fit needs at least two distinct x values");
}

Fit
LeastSquares (const std::vector<double> &x, const std::vector<double> &y)
{
  const double n = static_cast<double> (x.size ());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size (); ++i)
    {
      mx += x[i];
      my += y[i];
    }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size (); ++i)
    {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
  Fit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = x.size ();
  for (std::size_t i = 0; i < x.size (); ++i)
    f.residual = std::max (f.residual, std::abs (y[i] - (f.intercept + f.slope * x[i])));
  return f;
}

} // namespace

Fit
FitExponent (std::span<const std::pair<double, double>> points)
{
  CheckFitInput (points);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto &[px, py] : points)
    {
      if (!(px > 0.0) || !(py > 0.0))
        throw std::domain_error ("log-log fit needs positive values");
      x.push_back (std::log (px));
      y.push_back (std::log (py));
    }
  return LeastSquares (x, y);
}

Fit
FitLinear (std::span<const std::pair<double, double>> points)
{
  CheckFitInput (points);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto &[px, py] : points)
    {
      x.push_back (px);
      y.push_back (py);
    }
  return LeastSquares (x, y);
}

const char *
ToString (Verdict v)
{
  switch (v)
    {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    default:
      return "inconclusive";
    }
}

bool
FitReport::AllPass () const
{
  return !checks.empty ()
         && std::all_of (checks.begin (), checks.end (), [] (const TheoremCheck &c) { return c.verdict == Verdict::Pass; });
}

const TheoremCheck *
FitReport::Find (const std::string &name) const
{
  for (const auto &c : checks)
    {
      if (c.name == name)
        return &c;
    }
  return nullptr;
}

std::vector<AggregatePoint>
Aggregate (std::span<const ExperimentResult> results)
{
  std::map<std::tuple<double, double, double>, AggregatePoint> groups;
  for (const auto &r : results)
    {
      if (!r.valid)
        continue;
      AggregatePoint &a = groups[{r.config.n, r.config.beta, r.config.apScale}];
      a.n = r.config.n;
      a.beta = r.config.beta;
      a.apScale = r.config.apScale;
      a.m = r.m;
      a.ap = r.ap;
      a.as = r.as;
      a.lambdaP += r.lambdaP;
      a.throughputP += r.throughputP;
      a.delayP += r.delayP;
      a.lambdaS += r.lambdaS;
      a.throughputS += r.throughputS;
      a.delayS += r.delayS;
      ++a.runs;
    }
  std::vector<AggregatePoint> out;
  for (auto &[key, a] : groups)
    {
      const double k = static_cast<double> (a.runs);
      a.lambdaP /= k;
      a.throughputP /= k;
      a.delayP /= k;
      a.lambdaS /= k;
      a.throughputS /= k;
      a.delayS /= k;
      out.push_back (a);
    }
  return out;
}

namespace {

using Extract = double (*) (const AggregatePoint &);

TheoremCheck
ExponentCheck (const std::string &name, std::span<const AggregatePoint> pts, Extract x, Extract y, double tol)
{
  TheoremCheck c;
  c.name = name;
  c.kind = CheckKind::Exponent;
  c.expected = 1.0;
  std::vector<std::pair<double, double>> xy;
  for (const auto &p : pts)
    {
      const double px = x (p);
      const double py = y (p);
      if (px > 0.0 && py > 0.0 && std::isfinite (px) && std::isfinite (py))
        xy.emplace_back (px, py);
    }
  c.points = xy.size ();
  std::vector<double> xs;
  for (const auto &p : xy)
    xs.push_back (p.first);
  std::sort (xs.begin (), xs.end ());
  if (xy.size () < 3 || std::unique (xs.begin (), xs.end ()) - xs.begin () < 2)
    {
      c.detail = "fewer than 3 usable points";
      return c;
    }
  c.fit = FitExponent (xy);
  c.verdict = std::abs (c.fit->slope - c.expected) <= tol ? Verdict::Pass : Verdict::Fail;
  std::ostringstream os;
  os << "slope " << FormatNumber (c.fit->slope) << " vs " << FormatNumber (c.expected) << " +/- "
     << FormatNumber (tol);
  c.detail = os.str ();
  return c;
}

TheoremCheck
ConstancyCheck (const std::string &name, std::span<const AggregatePoint> pts, Extract y, double factor)
{
  TheoremCheck c;
  c.name = name;
  c.kind = CheckKind::Constancy;
  std::vector<double> ys;
  for (const auto &p : pts)
    {
      const double v = y (p);
      if (v > 0.0 && std::isfinite (v))
        ys.push_back (v);
    }
  c.points = ys.size ();
  if (ys.size () < 3)
    {
      c.detail = "fewer than 3 usable points";
      return c;
    }
  const auto [lo, hi] = std::minmax_element (ys.begin (), ys.end ());
  c.spread = *hi / *lo;
  c.verdict = c.spread <= factor ? Verdict::Pass : Verdict::Fail;
  std::ostringstream os;
  os << "max/min " << FormatNumber (c.spread) << " vs factor " << FormatNumber (factor);
  c.detail = os.str ();
  return c;
}

} // namespace

FitReport
CheckTheorems (std::span<const ExperimentResult> results, const Tolerances &tolerances)
{
  FitReport report;
  report.tolerances = tolerances;
  const std::vector<AggregatePoint> pts = Aggregate (results);
  const double tol = tolerances.slope;

  auto invSqrtAs = [] (const AggregatePoint &p) { return 1.0 / std::sqrt (p.as); };
  report.checks.push_back (ExponentCheck (
      checks::kLambdaS, pts, [] (const AggregatePoint &p) { return 1.0 / (p.m * std::sqrt (p.as)); },
      [] (const AggregatePoint &p) { return p.lambdaS; }, tol));
  report.checks.push_back (
      ExponentCheck (checks::kThroughputS, pts, invSqrtAs, [] (const AggregatePoint &p) { return p.throughputS; }, tol));
  report.checks.push_back (
      ExponentCheck (checks::kDelayS, pts, invSqrtAs, [] (const AggregatePoint &p) { return p.delayS; }, tol));
  report.checks.push_back (ExponentCheck (
      checks::kTradeoffS, pts, [] (const AggregatePoint &p) { return p.m * p.lambdaS; },
      [] (const AggregatePoint &p) { return p.delayS; }, tol));
  report.checks.push_back (ExponentCheck (
      checks::kLambdaP, pts, [] (const AggregatePoint &p) { return 1.0 / (p.n * p.ap); },
      [] (const AggregatePoint &p) { return p.lambdaP; }, tol));
  report.checks.push_back (ExponentCheck (
      checks::kThroughputP, pts, [] (const AggregatePoint &p) { return 1.0 / p.ap; },
      [] (const AggregatePoint &p) { return p.throughputP; }, tol));
  report.checks.push_back (ExponentCheck (
      checks::kDelayP, pts, [] (const AggregatePoint &p) { return std::sqrt (p.m * std::log (p.m)) / (p.n * p.ap); },
      [] (const AggregatePoint &p) { return p.delayP; }, tol));
  report.checks.push_back (ExponentCheck (
      checks::kTradeoffP, pts,
      [] (const AggregatePoint &p) { return std::sqrt (std::pow (p.n, p.beta) * std::log (p.n)) * p.lambdaP; },
      [] (const AggregatePoint &p) { return p.delayP; }, tol));

  {
    TheoremCheck c;
    c.name = checks::kDelayRelation;
    c.kind = CheckKind::Linear;
    c.expected = 3.0 / 64.0;
    std::vector<std::pair<double, double>> xy;
    for (const auto &p : pts)
      {
        if (p.delayS > 0.0 && p.delayP > 0.0)
          xy.emplace_back (p.delayS, p.delayP);
      }
    c.points = xy.size ();
    if (xy.size () < 3)
      c.detail = "fewer than 3 usable points";
    else
      {
        c.fit = FitLinear (xy);
        const bool slopeOk = c.fit->slope >= 0.5 * c.expected && c.fit->slope <= 2.0 * c.expected;
        c.verdict = slopeOk && c.fit->intercept > 0.0 ? Verdict::Pass : Verdict::Fail;
        std::ostringstream os;
        os << "slope " << FormatNumber (c.fit->slope) << " in [" << FormatNumber (0.5 * c.expected) << ", "
           << FormatNumber (2.0 * c.expected) << "], C " << FormatNumber (c.fit->intercept);
        c.detail = os.str ();
      }
    report.checks.push_back (c);
  }

  report.checks.push_back (ConstancyCheck (
      checks::kLambdaPConst, pts, [] (const AggregatePoint &p) { return p.lambdaP * p.n * p.ap; },
      tolerances.constFactor));
  std::vector<AggregatePoint> unitScale;
  for (const auto &p : pts)
    {
      if (p.apScale == 1.0)
        unitScale.push_back (p);
    }
  report.checks.push_back (ConstancyCheck (
      checks::kLambdaPLog, unitScale, [] (const AggregatePoint &p) { return p.lambdaP * std::log (p.n); },
      tolerances.constFactor));
  return report;
}

} // namespace tiernet
