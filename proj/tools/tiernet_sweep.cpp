// Sweep driver: runs (n, ap_scale, seed) points, writes results and the fit
// report, and exits non-zero when a scaling check does not pass.

#include "tiernet/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace tiernet;

int
main (int argc, char **argv)
{
  CLI::App app{"Two-tier network scaling sweep"};

  std::string configPath;
  std::vector<double> nValues;
  std::vector<double> apScales;
  std::optional<double> beta;
  std::optional<double> alpha;
  std::optional<int> seeds;
  std::optional<std::uint64_t> seed0;
  std::optional<int> frames;
  std::optional<int> warmup;
  std::string out = "results.csv";
  std::string format = "csv";
  std::string tracePath;
  std::string reportPath;
  Tolerances tol;
  bool noVerdict = false;
  bool clusterAligned = false;
  unsigned threads = 0;

  app.add_option ("--config", configPath, "JSON file with SimConfig/SweepPlan fields")->check (CLI::ExistingFile);
  app.add_option ("--n", nValues, "primary densities (strictly increasing)");
  app.add_option ("--beta", beta, "secondary density exponent");
  app.add_option ("--alpha", alpha, "pathloss exponent");
  app.add_option ("--ap-scale", apScales, "primary cell area multipliers");
  app.add_option ("--seeds", seeds, "seeds per point");
  app.add_option ("--seed0", seed0, "first seed");
  app.add_option ("--frames", frames, "simulated primary frames");
  app.add_option ("--warmup", warmup, "warmup frames");
  app.add_option ("--out", out, "output path");
  app.add_option ("--format", format, "output format")->check (CLI::IsMember ({"csv", "json"}));
  app.add_option ("--trace", tracePath, "per-packet trace CSV");
  app.add_option ("--report", reportPath, "fit report path (default: <out>.fit.txt for csv)");
  app.add_option ("--tolerance-slope", tol.slope, "allowed deviation of fitted exponents");
  app.add_option ("--tolerance-const", tol.constFactor, "allowed max/min ratio of constant quantities");
  app.add_flag ("--no-verdict", noVerdict, "exit 0 regardless of fit verdicts");
  app.add_flag ("--cluster-aligned", clusterAligned, "round k_p down to a multiple of 8");
  app.add_option ("--threads", threads, "worker threads (0 = hardware concurrency)");
  CLI11_PARSE (app, argc, argv);

  SweepPlan plan;
  try
    {
      if (!configPath.empty ())
        {
          std::ifstream in (configPath);
          std::stringstream text;
          text << in.rdbuf ();
          ApplyPlanJson (text.str (), plan);
        }
      if (!nValues.empty ())
        plan.nValues = nValues;
      if (!apScales.empty ())
        plan.apScales = apScales;
      if (beta)
        plan.base.beta = *beta;
      if (alpha)
        plan.base.alpha = *alpha;
      if (seeds)
        plan.seeds = *seeds;
      if (seed0)
        plan.seed0 = *seed0;
      if (frames)
        plan.base.frames = *frames;
      if (warmup)
        plan.base.warmupFrames = *warmup;
      if (clusterAligned)
        plan.base.clusterAlignedGrid = true;
      plan.Validate ();

      RunOptions options;
      options.keepRecords = !tracePath.empty ();
      const auto results = RunSweep (plan, threads, options);
      const FitReport report = CheckTheorems (results, tol);

      if (format == "json")
        WriteJson (results, report, out);
      else
        {
          WriteCsv (results, out);
          WriteFitReport (report, reportPath.empty () ? out + ".fit.txt" : reportPath);
        }
      if (!tracePath.empty ())
        WriteTrace (results, tracePath);

      std::cout << FormatFitReport (report);
      if (noVerdict)
        return 0;
      return report.AllPass () ? 0 : 1;
    }
  catch (const ConfigError &e)
    {
      std::cerr << "configuration error: " << e.what () << '\n';
      return 2;
    }
  catch (const std::exception &e)
    {
      std::cerr << "error: " << e.what () << '\n';
      return 3;
    }
}
