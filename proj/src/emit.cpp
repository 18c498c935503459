#include "tiernet/harness.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tiernet {

std::string
FormatNumber (double v)
{
  if (std::isnan (v))
    return "nan";
  if (std::isinf (v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars (buf, buf + sizeof buf, v);
  return std::string (buf, res.ptr);
}

namespace {

std::ofstream
OpenOutput (const std::string &path)
{
  std::ofstream out (path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error ("cannot write " + path);
  return out;
}

void
Finish (std::ofstream &out, const std::string &path)
{
  out.flush ();
  if (!out)
    throw std::runtime_error ("write failed for " + path);
}

void
RequireResults (std::span<const ExperimentResult> results)
{
  if (results.empty ())
    throw std::invalid_argument ("no results to emit");
}

nlohmann::json
NumberOrNull (double v)
{
  return std::isfinite (v) ? nlohmann::json (v) : nlohmann::json (nullptr);
}

const char *
KindName (CheckKind k)
{
  switch (k)
    {
    case CheckKind::Exponent:
      return "exponent";
    case CheckKind::Constancy:
      return "constancy";
    default:
      return "linear";
    }
}

} // namespace

std::string
CsvHeader ()
{
  return "n,beta,m,a_p,a_s,k_p,k_s,N,lambda_p,T_p,D_p,lambda_s,T_s,D_s,"
         "min_sinr_primary,min_sinr_delivery,min_sinr_secondary,drop_rate,valid,seed";
}

std::string
CsvRow (const ExperimentResult &r)
{
  std::ostringstream os;
  const char sep = ',';
  os << FormatNumber (r.config.n) << sep << FormatNumber (r.config.beta) << sep << FormatNumber (r.m) << sep
     << FormatNumber (r.ap) << sep << FormatNumber (r.as) << sep << r.kp << sep << r.ks << sep << r.relayCount << sep
     << FormatNumber (r.lambdaP) << sep << FormatNumber (r.throughputP) << sep << FormatNumber (r.delayP) << sep
     << FormatNumber (r.lambdaS) << sep << FormatNumber (r.throughputS) << sep << FormatNumber (r.delayS) << sep
     << FormatNumber (r.minSinrPrimary) << sep << FormatNumber (r.minSinrDelivery) << sep
     << FormatNumber (r.minSinrSecondary) << sep << FormatNumber (r.dropRate) << sep << (r.valid ? 1 : 0) << sep
     << r.config.seed;
  return os.str ();
}

void
WriteCsv (std::span<const ExperimentResult> results, const std::string &path)
{
  RequireResults (results);
  std::ofstream out = OpenOutput (path);
  out << CsvHeader () << '\n';
  for (const auto &r : results)
    out << CsvRow (r) << '\n';
  Finish (out, path);
}

void
WriteJson (std::span<const ExperimentResult> results, const FitReport &report, const std::string &path)
{
  RequireResults (results);
  nlohmann::json doc;
  doc["results"] = nlohmann::json::array ();
  for (const auto &r : results)
    {
      nlohmann::json j;
      j["n"] = r.config.n;
      j["beta"] = r.config.beta;
      j["alpha"] = r.config.alpha;
      j["ap_scale"] = r.config.apScale;
      j["seed"] = r.config.seed;
      j["frames"] = r.config.frames;
      j["warmup_frames"] = r.config.warmupFrames;
      j["m"] = r.m;
      j["a_p"] = r.ap;
      j["a_s"] = r.as;
      j["k_p"] = r.kp;
      j["k_s"] = r.ks;
      j["N"] = r.relayCount;
      j["lambda_p"] = r.lambdaP;
      j["T_p"] = r.throughputP;
      j["D_p"] = r.delayP;
      j["lambda_s"] = r.lambdaS;
      j["T_s"] = r.throughputS;
      j["D_s"] = r.delayS;
      j["min_sinr_primary"] = NumberOrNull (r.minSinrPrimary);
      j["min_sinr_delivery"] = NumberOrNull (r.minSinrDelivery);
      j["min_sinr_secondary"] = NumberOrNull (r.minSinrSecondary);
      j["drop_rate"] = r.dropRate;
      j["valid"] = r.valid;
      j["flags"] = r.flags;
      j["capture_fraction"] = r.captureFraction;
      j["overhead_c"] = r.raw.meanOverheadC;
      j["max_segment_gap"] = r.raw.maxSegmentGap;
      j["bundles"] = r.raw.bundlesMeasured;
      j["bundles_within_frame_gap"] = r.raw.bundlesWithinFrameGap;
      doc["results"].push_back (j);
    }
  nlohmann::json fits = nlohmann::json::array ();
  for (const auto &c : report.checks)
    {
      nlohmann::json j;
      j["name"] = c.name;
      j["kind"] = KindName (c.kind);
      j["expected"] = c.expected;
      j["points"] = c.points;
      j["verdict"] = ToString (c.verdict);
      j["detail"] = c.detail;
      if (c.fit)
        {
          j["slope"] = c.fit->slope;
          j["intercept"] = c.fit->intercept;
          j["residual"] = c.fit->residual;
        }
      if (c.kind == CheckKind::Constancy)
        j["spread"] = c.spread;
      fits.push_back (j);
    }
  doc["fits"] = fits;
  doc["tolerances"] = {{"slope", report.tolerances.slope}, {"const_factor", report.tolerances.constFactor}};
  std::ofstream out = OpenOutput (path);
  out << doc.dump (2) << '\n';
  Finish (out, path);
}

std::string
FormatFitReport (const FitReport &report)
{
  std::ostringstream os;
  os << "tolerance.slope = " << FormatNumber (report.tolerances.slope) << '\n';
  os << "tolerance.const_factor = " << FormatNumber (report.tolerances.constFactor) << '\n';
  for (const auto &c : report.checks)
    {
      os << '\n' << "[" << c.name << "]\n";
      os << "kind = " << KindName (c.kind) << '\n';
      os << "points = " << c.points << '\n';
      if (c.fit)
        {
          os << "slope = " << FormatNumber (c.fit->slope) << '\n';
          os << "intercept = " << FormatNumber (c.fit->intercept) << '\n';
          os << "residual = " << FormatNumber (c.fit->residual) << '\n';
        }
      if (c.kind == CheckKind::Constancy && c.verdict != Verdict::Inconclusive)
        os << "spread = " << FormatNumber (c.spread) << '\n';
      os << "verdict = " << ToString (c.verdict) << '\n';
      if (!c.detail.empty ())
        os << "detail = " << c.detail << '\n';
    }
  return os.str ();
}

void
WriteFitReport (const FitReport &report, const std::string &path)
{
  std::ofstream out = OpenOutput (path);
  out << FormatFitReport (report);
  Finish (out, path);
}

void
WriteTrace (std::span<const ExperimentResult> results, const std::string &path)
{
  RequireResults (results);
  std::ofstream out = OpenOutput (path);
  out << "n,ap_scale,seed,id,tier,creation_slot,delivery_slot,path_length,segments\n";
  for (const auto &r : results)
    {
      for (const auto &rec : r.records)
        {
          out << FormatNumber (r.config.n) << ',' << FormatNumber (r.config.apScale) << ',' << r.config.seed << ','
              << rec.id << ',' << (rec.tier == Tier::Primary ? "primary" : "secondary") << ',' << rec.creationSlot
              << ',';
          if (rec.deliverySlot)
            out << *rec.deliverySlot;
          out << ',' << rec.pathLength << ',' << rec.segments << '\n';
        }
    }
  Finish (out, path);
}

void
ApplyPlanJson (const std::string &text, SweepPlan &plan)
{
  nlohmann::json j;
  try
    {
      j = nlohmann::json::parse (text);
    }
  catch (const nlohmann::json::exception &e)
    {
      throw ConfigError (std::string ("config is not valid JSON: ") + e.what ());
    }
  if (!j.is_object ())
    throw ConfigError ("config must be a JSON object");

  auto list = [] (const nlohmann::json &v) {
    std::vector<double> out;
    if (v.is_array ())
      out = v.get<std::vector<double>> ();
    else
      out.push_back (v.get<double> ());
    return out;
  };
  SimConfig &c = plan.base;
  try
    {
      for (const auto &[key, v] : j.items ())
        {
          if (key == "n")
            plan.nValues = list (v);
          else if (key == "ap_scale")
            plan.apScales = list (v);
          else if (key == "seeds")
            plan.seeds = v.get<int> ();
          else if (key == "seed0" || key == "seed")
            plan.seed0 = v.get<std::uint64_t> ();
          else if (key == "beta")
            c.beta = v.get<double> ();
          else if (key == "alpha")
            c.alpha = v.get<double> ();
          else if (key == "power_const")
            c.powerConst = v.get<double> ();
          else if (key == "noise")
            c.noise = v.get<double> ();
          else if (key == "frames")
            c.frames = v.get<int> ();
          else if (key == "warmup_frames" || key == "warmup")
            c.warmupFrames = v.get<int> ();
          else if (key == "cluster_aligned_grid")
            c.clusterAlignedGrid = v.get<bool> ();
          else if (key == "primary_load")
            c.primaryLoad = v.get<double> ();
          else if (key == "secondary_load")
            c.secondaryLoad = v.get<double> ();
          else if (key == "sampled_flows")
            c.sampledFlows = v.get<int> ();
          else if (key == "drain_frames")
            c.drainFrames = v.get<int> ();
          else if (key == "audit_frames")
            c.auditFrames = v.get<int> ();
          else if (key == "audit_stride")
            c.auditStride = v.get<int> ();
          else
            throw ConfigError ("unknown config key: " + key);
        }
    }
  catch (const nlohmann::json::exception &e)
    {
      throw ConfigError (std::string ("bad config value: ") + e.what ());
    }
}

} // namespace tiernet
