#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddlf/estimation.hpp"
#include "ddlf/grid.hpp"
#include "ddlf/transforms.hpp"

namespace ddlf {

inline constexpr double kSpeedOfLight = 299792458.0;

// Everything one Monte-Carlo experiment needs. Zero or negative values of
// the optional numeric knobs select the derived default noted beside them.
struct ExperimentConfig {
  // data frame M' x N' and accordion pilots per row P'
  int data_rows = 16;
  int data_cols = 16;
  int pilots_per_row = 1;

  double subcarrier_spacing = 15e3;  // Hz
  double tf = 1.25;
  double pulse_spread = 1.0;

  PrecoderKind precoder = PrecoderKind::fwht2d;
  int subframes = 1;

  // Any of perfect, lmmse, srh, srh-na, srh-ma, srh-mna.
  std::vector<std::string> estimators = {"perfect", "lmmse", "srh", "srh-na", "srh-ma", "srh-mna"};
  double omega = 0.0;  // <= 0: 1 / P
  double alpha = 0.0;  // <= 0 (either): derived from tau_max and nu_max
  double beta = 0.0;
  int Q = -1;  // < 0: derived from the spread
  int W = -1;
  int Wn = -1;
  std::optional<double> sigma_z2;  // empty: calibrated per sweep point
  SrhSolver solver = SrhSolver::direct;

  int scatterers = 16;
  double tau_max = 0.0;  // s; <= 0: four delay bins, 4 / (M' F)
  double velocity_kmh = 100.0;
  double carrier_hz = 5.9e9;
  double power_profile = 0.0;
  bool fractional = true;

  std::vector<double> snr_db = {15.0};
  int trials = 200;
  std::uint64_t seed = 1;
  bool coded = false;
  int threads = 0;  // 0: hardware concurrency

  int frame_cols() const { return data_cols + pilots_per_row; }
  int pilot_count() const { return data_rows * pilots_per_row; }
  GaborGrid grid() const;
  double resolved_tau_max() const;
  // nu_max = v f_c / c
  double nu_max() const;
  ReconstructionGrid reconstruction_grid() const;
  void validate() const;

  // 64 x 64 data frame at 78.125 kHz spacing with 4 pilots per row.
  static ExperimentConfig paper_scale();
};

double velocity_to_doppler(double velocity_kmh, double carrier_hz);

// Flat "key = value" text. '#' starts a comment; blank lines are ignored.
// Unknown keys and malformed values throw ConfigError naming the line.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void write_config(std::ostream& out, const ExperimentConfig& cfg);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace ddlf
