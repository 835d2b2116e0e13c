#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ddlf/channel.hpp"
#include "ddlf/config.hpp"
#include "ddlf/link.hpp"
#include "ddlf/piloting.hpp"

namespace ddlf {

enum class SweepAxis { snr, velocity, pilots };
std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

// Per-estimator metrics of one received frame; ordered like cfg.estimators.
struct TrialResult {
  std::vector<FrameMetrics> metrics;
};

// Everything that stays fixed across the trials of one sweep point: grid,
// pulse, pilots, precoder and the prefactored estimators.
class PointRunner {
 public:
  PointRunner(const ExperimentConfig& cfg, double snr_db);

  TrialResult run(std::uint64_t trial_seed) const;

  const ExperimentConfig& config() const { return cfg_; }
  const GaborGrid& grid() const { return grid_; }
  const PilotPlacement& placement() const { return placement_; }
  const Pulse& pulse() const { return pulse_; }
  double sigma2() const { return sigma2_; }
  double sigma_z2() const { return sigma_z2_; }
  ReconstructionGrid reconstruction_grid() const { return grid_k_; }

  // Channel drawn for a trial (exposed for dumps and tests).
  DDChannel channel(std::uint64_t trial_seed) const;

 private:
  struct Slot;
  ExperimentConfig cfg_;
  GaborGrid grid_;
  Pulse pulse_;
  PilotPlacement placement_;
  PilotSequence pilots_;
  Precoder precoder_;
  ReconstructionGrid grid_k_;
  double sigma2_ = 0.0;
  double sigma_z2_ = 0.0;
  std::vector<std::shared_ptr<const Slot>> slots_;
};

// Seed of trial `index`. Independent of the sweep point, so every point sees
// the same channels, bits and noise draws.
std::uint64_t trial_seed(std::uint64_t master, int index);

// Channel drawn for trial `trial_seed`.
DDChannel trial_channel(const ExperimentConfig& cfg, std::uint64_t trial_seed);

// Mean self-interference power of the configured channel model, averaged
// over `draws` channels.
double calibrate_sigma_z2(const ExperimentConfig& cfg, int draws = 8);

// One trial at cfg.snr_db.front().
TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed);

// Worker count: cfg.threads (or hardware concurrency when 0), capped by the
// DDLF_THREADS environment variable.
int resolve_threads(int requested);

// All trials of one point, indexed [trial].
std::vector<TrialResult> run_point(const ExperimentConfig& cfg, double snr_db);

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};
Summary summarize(const std::vector<double>& values);

struct ResultRow {
  double snr_db = 0.0;
  double velocity_kmh = 0.0;
  int pilots = 0;
  std::string estimator;
  std::string precoder;
  int subframes = 1;
  int trials = 0;
  Summary rel_mse_db;
  Summary uncoded_ber;
  double uncoded_ber_db = 0.0;
  bool coded = false;
  Summary coded_ber;
  double coded_ber_db = 0.0;
  Summary nmsed_db;
};

std::vector<ResultRow> summarize_point(const ExperimentConfig& cfg, double snr_db,
                                       const std::vector<TrialResult>& trials);

// Applies one sweep coordinate to a config. For the pilot axis the value is
// the total pilot count P = M' P'; the data frame stays M' x N' and the
// transmit frame widens to N = N' + P'.
ExperimentConfig at_sweep_value(const ExperimentConfig& cfg, SweepAxis axis, double value);

// Points in the order given, crossed with cfg.snr_db unless the axis is snr.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values);
std::vector<ResultRow> run_simulation(const ExperimentConfig& cfg);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::string csv_field(const std::string& text);

}  // namespace ddlf
