#include "ddlf/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ddlf {

GaborGrid ExperimentConfig::grid() const {
  return GaborGrid::make(data_rows, frame_cols(), subcarrier_spacing, tf);
}

double ExperimentConfig::resolved_tau_max() const {
  return tau_max > 0.0 ? tau_max : 4.0 / (data_rows * subcarrier_spacing);
}

double velocity_to_doppler(double velocity_kmh, double carrier_hz) {
  return velocity_kmh / 3.6 * carrier_hz / kSpeedOfLight;
}

double ExperimentConfig::nu_max() const { return velocity_to_doppler(velocity_kmh, carrier_hz); }

ReconstructionGrid ExperimentConfig::reconstruction_grid() const {
  const auto g = grid();
  ReconstructionGrid k = reconstruction_grid_for(resolved_tau_max(), nu_max(), g);
  if (Q >= 0) k.Q = Q;
  if (W >= 0) k.W = W;
  if (Wn >= 0) k.Wn = Wn;
  k.validate(g);
  return k;
}

void ExperimentConfig::validate() const {
  if (data_rows < 1 || data_cols < 1) throw ConfigError("config: data frame must be at least 1 x 1");
  if (pilots_per_row < 1 || pilots_per_row >= data_cols + pilots_per_row)
    throw ConfigError("config: pilots-per-row must be positive");
  if (!(subcarrier_spacing > 0.0) || !(tf >= 1.0) || !(pulse_spread > 0.0))
    throw ConfigError("config: subcarrier-spacing, tf >= 1 and pulse-spread must be positive");
  if (subframes < 1 || data_cols % subframes != 0)
    throw ConfigError("config: subframes must divide the data columns");
  if (estimators.empty()) throw ConfigError("config: no estimator selected");
  for (const auto& e : estimators)
    if (e != "perfect") parse_estimator_variant(e);
  if (scatterers < 1) throw ConfigError("config: scatterers must be positive");
  if (velocity_kmh < 0.0 || !(carrier_hz > 0.0)) throw ConfigError("config: bad velocity or carrier");
  if (snr_db.empty()) throw ConfigError("config: empty snr list");
  if (trials < 1) throw ConfigError("config: trials must be at least 1");
  if (threads < 0) throw ConfigError("config: threads must be non-negative");
  if (sigma_z2 && *sigma_z2 < 0.0) throw ConfigError("config: sigma-z2 must be non-negative");
  grid().validate();
}

ExperimentConfig ExperimentConfig::paper_scale() {
  ExperimentConfig c;
  c.data_rows = 64;
  c.data_cols = 64;
  c.pilots_per_row = 4;
  c.subcarrier_spacing = 78.125e3;
  c.trials = 50;
  return c;
}

namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long x = to_long(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError("config: '" + key + "' out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(to_double("list", item));
  if (out.empty()) throw ConfigError("config: empty value list");
  return out;
}

void apply_config_value(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string v = trim(raw_value);
  if (key == "data-rows" || key == "M'") c.data_rows = to_int(key, v);
  else if (key == "data-cols" || key == "N'") c.data_cols = to_int(key, v);
  else if (key == "pilots-per-row" || key == "P'") c.pilots_per_row = to_int(key, v);
  else if (key == "subcarrier-spacing") c.subcarrier_spacing = to_double(key, v);
  else if (key == "tf") c.tf = to_double(key, v);
  else if (key == "pulse-spread") c.pulse_spread = to_double(key, v);
  else if (key == "precoder") c.precoder = parse_precoder_kind(v);
  else if (key == "subframes") c.subframes = to_int(key, v);
  else if (key == "estimator" || key == "estimators") {
    auto names = split_list(v);
    for (auto& n : names) {
      std::replace(n.begin(), n.end(), '_', '-');
      if (n != "perfect") n = std::string(to_string(parse_estimator_variant(n)));
    }
    c.estimators = std::move(names);
  } else if (key == "omega") c.omega = to_double(key, v);
  else if (key == "alpha") c.alpha = to_double(key, v);
  else if (key == "beta") c.beta = to_double(key, v);
  else if (key == "Q") c.Q = to_int(key, v);
  else if (key == "W") c.W = to_int(key, v);
  else if (key == "Wn") c.Wn = to_int(key, v);
  else if (key == "sigma-z2") {
    if (v == "auto") c.sigma_z2.reset();
    else c.sigma_z2 = to_double(key, v);
  } else if (key == "solver") {
    if (v == "direct") c.solver = SrhSolver::direct;
    else if (v == "cg") c.solver = SrhSolver::conjugate_gradient;
    else throw ConfigError("config: solver must be direct or cg");
  } else if (key == "scatterers") c.scatterers = to_int(key, v);
  else if (key == "tau-max") c.tau_max = to_double(key, v);
  else if (key == "velocity") c.velocity_kmh = to_double(key, v);
  else if (key == "carrier") c.carrier_hz = to_double(key, v);
  else if (key == "power-profile") c.power_profile = to_double(key, v);
  else if (key == "fractional") c.fractional = to_bool(key, v);
  else if (key == "snr") c.snr_db = parse_number_list(v);
  else if (key == "trials") c.trials = to_int(key, v);
  else if (key == "seed") {
    const long s = to_long(key, v);
    if (s < 0) throw ConfigError("config: seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "coded") c.coded = to_bool(key, v);
  else if (key == "threads") c.threads = to_int(key, v);
  else throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    if (trim(line.substr(0, eq)) == "paper-scale") {
      if (to_bool("paper-scale", trim(line.substr(eq + 1)))) base = ExperimentConfig::paper_scale();
      continue;
    }
    try {
      apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  auto join = [](const auto& items) {
    std::ostringstream s;
    for (size_t i = 0; i < items.size(); ++i) s << (i ? "," : "") << items[i];
    return s.str();
  };
  out << "data-rows = " << c.data_rows << "\n"
      << "data-cols = " << c.data_cols << "\n"
      << "pilots-per-row = " << c.pilots_per_row << "\n"
      << "subcarrier-spacing = " << c.subcarrier_spacing << "\n"
      << "tf = " << c.tf << "\n"
      << "pulse-spread = " << c.pulse_spread << "\n"
      << "precoder = " << to_string(c.precoder) << "\n"
      << "subframes = " << c.subframes << "\n"
      << "estimator = " << join(c.estimators) << "\n"
      << "omega = " << c.omega << "\n"
      << "alpha = " << c.alpha << "\n"
      << "beta = " << c.beta << "\n"
      << "Q = " << c.Q << "\n"
      << "W = " << c.W << "\n"
      << "Wn = " << c.Wn << "\n"
      << "sigma-z2 = " << (c.sigma_z2 ? std::to_string(*c.sigma_z2) : std::string("auto")) << "\n"
      << "solver = " << (c.solver == SrhSolver::direct ? "direct" : "cg") << "\n"
      << "scatterers = " << c.scatterers << "\n"
      << "tau-max = " << c.tau_max << "\n"
      << "velocity = " << c.velocity_kmh << "\n"
      << "carrier = " << c.carrier_hz << "\n"
      << "power-profile = " << c.power_profile << "\n"
      << "fractional = " << (c.fractional ? "true" : "false") << "\n"
      << "snr = " << join(c.snr_db) << "\n"
      << "trials = " << c.trials << "\n"
      << "seed = " << c.seed << "\n"
      << "coded = " << (c.coded ? "true" : "false") << "\n"
      << "threads = " << c.threads << "\n";
}

}  // namespace ddlf
