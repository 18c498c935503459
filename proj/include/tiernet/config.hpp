#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tiernet {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Parameters of one simulated network. The secondary density m = n^beta is
/// always derived through M().
struct SimConfig
{
  double n = 1024.0;      ///< primary density (nodes per unit area)
  double beta = 2.0;      ///< secondary density exponent
  double alpha = 4.0;     ///< pathloss exponent
  double powerConst = 1.0;
  double noise = 1.0;
  double apScale = 1.0;   ///< multiplier on the minimum primary cell area
  int frames = 12;        ///< simulated primary frames (64 primary slots each)
  int warmupFrames = 4;
  std::uint64_t seed = 1;

  // Simulation controls beyond the network model.
  bool clusterAlignedGrid = false; ///< round k_p down to a multiple of 8
  double primaryLoad = 0.25;       ///< per-frame injection probability of a primary source
  double secondaryLoad = 0.5;      ///< per-frame injection probability of a secondary source
  int sampledFlows = 2048;         ///< secondary S-D flows simulated at packet level
  int drainFrames = 16;            ///< cap on post-window frames used to finish tracked packets
  int auditFrames = 0;             ///< primary frames covered by the SINR audit, 0 = whole window
  int auditStride = 4;             ///< secondary-slot stride inside audited primary slots

  double M () const { return std::pow (n, beta); }

  void
  Validate () const
  {
    if (!(n > 1.0))
      throw ConfigError ("n must exceed 1, got " + std::to_string (n));
    if (!(beta >= 2.0))
      throw ConfigError ("beta must be >= 2, got " + std::to_string (beta));
    if (!(alpha > 2.0))
      throw ConfigError ("alpha must exceed 2, got " + std::to_string (alpha));
    if (!(powerConst > 0.0))
      throw ConfigError ("power_const must be positive");
    if (!(noise >= 0.0))
      throw ConfigError ("noise must be non-negative");
    if (!(apScale >= 1.0))
      throw ConfigError ("ap_scale must be >= 1, got " + std::to_string (apScale));
    if (frames <= 0)
      throw ConfigError ("frames must be positive");
    if (warmupFrames < 0 || warmupFrames >= frames)
      throw ConfigError ("warmup_frames must lie in [0, frames)");
    if (!(primaryLoad > 0.0 && primaryLoad <= 1.0))
      throw ConfigError ("primary_load must lie in (0, 1]");
    if (!(secondaryLoad > 0.0 && secondaryLoad <= 1.0))
      throw ConfigError ("secondary_load must lie in (0, 1]");
    if (sampledFlows <= 0)
      throw ConfigError ("sampled_flows must be positive");
    if (drainFrames < 0 || auditFrames < 0 || auditStride <= 0)
      throw ConfigError ("drain_frames, audit_frames must be >= 0 and audit_stride > 0");
  }
};

} // namespace tiernet
