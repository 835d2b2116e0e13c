#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>

#include <CLI11.hpp>

#include "ddlf/harness.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  bool paper_scale = false;
  std::string out = "-";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value experiment file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--trials", c.trials, "trials per sweep point (overrides the config)");
  cmd->add_flag("--paper-scale", c.paper_scale, "start from the 64 x 64 preset instead of the desk defaults");
  cmd->add_option("--out", c.out, "output CSV ('-' for stdout)");
}

ddlf::ExperimentConfig resolve(const Common& c) {
  ddlf::ExperimentConfig cfg = c.paper_scale ? ddlf::ExperimentConfig::paper_scale() : ddlf::ExperimentConfig{};
  if (!c.config_path.empty()) cfg = ddlf::load_config(c.config_path, cfg);
  if (c.seed) cfg.seed = *c.seed;
  if (c.trials) cfg.trials = *c.trials;
  cfg.validate();
  return cfg;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ddlf::ConfigError("cannot write '" + path + "'");
  fn(out);
}

std::pair<int, int> parse_shape(const std::string& text) {
  static const std::regex re(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ddlf::ConfigError("shape must look like 16x16, got '" + text + "'");
  return {std::stoi(m[1]), std::stoi(m[2])};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-level simulation of pulse-shaped multicarrier systems over doubly dispersive channels"};
  app.require_subcommand(1);

  Common sim;
  auto* simulate = app.add_subcommand("simulate", "run every SNR of a config and write the result table");
  add_common(simulate, sim);

  Common swp;
  std::string axis = "snr";
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "sweep one axis and write the result table");
  add_common(sweep, swp);
  sweep->add_option("--axis", axis, "snr, velocity (km/h) or pilots (total count)")
      ->check(CLI::IsMember({"snr", "velocity", "pilots"}));
  sweep->add_option("--values", values, "sweep values (space or comma separated)")->required();

  std::string data_shape = "16x16";
  int pilots_per_row = 1;
  std::string mask_out = "-";
  auto* place = app.add_subcommand("place-pilots", "write the accordion pilot mask");
  place->add_option("--data-shape", data_shape, "M'xN'")->required();
  place->add_option("--pilots-per-row", pilots_per_row, "P'")->required();
  place->add_option("--out", mask_out, "output CSV ('-' for stdout)");

  Common amb;
  double tau_span = 0.0;
  double nu_span = 0.0;
  int points = 41;
  auto* ambiguity = app.add_subcommand("ambiguity", "dump |A(tau, nu)| of the transmit pulse on a raster");
  add_common(ambiguity, amb);
  ambiguity->add_option("--tau-span", tau_span, "delay half-width in seconds (default T)");
  ambiguity->add_option("--nu-span", nu_span, "Doppler half-width in hertz (default F)");
  ambiguity->add_option("--points", points, "raster points per axis")->check(CLI::Range(1, 100000));

  Common chn;
  int trial = 0;
  auto* channel = app.add_subcommand("channel", "dump the scatterers drawn for one trial");
  add_common(channel, chn);
  channel->add_option("--trial", trial, "trial index")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const auto cfg = resolve(sim);
      const auto rows = ddlf::run_simulation(cfg);
      with_output(sim.out, [&](std::ostream& o) { ddlf::write_results_csv(o, rows); });
    } else if (*sweep) {
      const auto cfg = resolve(swp);
      std::vector<double> parsed;
      for (const auto& v : values)
        for (double x : ddlf::parse_number_list(v)) parsed.push_back(x);
      const auto rows = ddlf::run_sweep(cfg, ddlf::parse_sweep_axis(axis), parsed);
      with_output(swp.out, [&](std::ostream& o) { ddlf::write_results_csv(o, rows); });
    } else if (*place) {
      const auto [rows, cols] = parse_shape(data_shape);
      const auto pl = ddlf::accordion_placement(rows, cols, pilots_per_row);
      with_output(mask_out, [&](std::ostream& o) { ddlf::write_placement_csv(o, pl); });
    } else if (*ambiguity) {
      const auto cfg = resolve(amb);
      const auto grid = cfg.grid();
      const auto pulse = ddlf::default_pulse(grid, cfg.pulse_spread);
      const double ts = tau_span > 0.0 ? tau_span : grid.T();
      const double ns = nu_span > 0.0 ? nu_span : grid.F();
      with_output(amb.out, [&](std::ostream& o) {
        o << "tau_s,nu_hz,abs,re,im\n";
        char line[160];
        for (int i = 0; i < points; ++i) {
          const double tau = points == 1 ? 0.0 : -ts + 2.0 * ts * i / (points - 1);
          for (int k = 0; k < points; ++k) {
            const double nu = points == 1 ? 0.0 : -ns + 2.0 * ns * k / (points - 1);
            const auto A = ddlf::cross_ambiguity(pulse, pulse, tau, nu, grid);
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", tau, nu, std::abs(A), A.real(),
                          A.imag());
            o << line;
          }
        }
      });
    } else if (*channel) {
      const auto cfg = resolve(chn);
      const auto ch = ddlf::trial_channel(cfg, ddlf::trial_seed(cfg.seed, trial));
      with_output(chn.out, [&](std::ostream& o) { ddlf::write_channel_csv(o, ch); });
    }
  } catch (const ddlf::Error& e) {
    std::cerr << "ddlf: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
