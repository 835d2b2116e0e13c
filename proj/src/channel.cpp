#include "ddlf/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ddlf/fft.hpp"

namespace ddlf {
namespace {

long wrap(long i, long n) { return ((i % n) + n) % n; }

// Snaps u in [lo, hi] to the nearest multiple of step that stays inside.
double snap(double u, double step, double lo, double hi) {
  double v = std::round(u / step) * step;
  if (v > hi) v -= step;
  if (v < lo) v += step;
  return std::clamp(v, lo, hi);
}

}  // namespace

void DDChannel::validate() const {
  if (tau_max < 0.0 || nu_max < 0.0) throw ConfigError("channel: spread bounds must be non-negative");
  if (!(spread() < 0.1)) {
    std::ostringstream err;
    err << "channel: not underspread (2 tau_max nu_max = " << spread() << ")";
    throw ConfigError(err.str());
  }
  const double tol = 1e-12;
  for (const auto& s : scatterers) {
    if (s.tau < -tol * (1.0 + tau_max) || s.tau > tau_max * (1.0 + tol) + tol ||
        std::abs(s.nu) > nu_max * (1.0 + tol) + tol) {
      std::ostringstream err;
      err << "channel: scatterer (" << s.tau << ", " << s.nu << ") outside the spreading region";
      throw ConfigError(err.str());
    }
  }
}

DDChannel single_scatterer(double tau, double nu, cplx eta) {
  DDChannel ch;
  ch.scatterers.push_back({tau, nu, eta});
  ch.tau_max = std::abs(tau);
  ch.nu_max = std::abs(nu);
  return ch;
}

double default_power_profile(double tau_max) {
  if (!(tau_max > 0.0)) return 0.0;
  return std::log(100.0) / (0.5 * tau_max);
}

DDChannel generate_channel(const ChannelConfig& cfg, const GaborGrid& grid) {
  if (cfg.R < 1) throw ConfigError("generate_channel: R must be at least 1");
  if (cfg.tau_max < 0.0 || cfg.nu_max < 0.0) throw ConfigError("generate_channel: negative spread");
  if (!(2.0 * cfg.tau_max * cfg.nu_max < 0.1)) {
    std::ostringstream err;
    err << "generate_channel: not underspread (2 tau_max nu_max = " << 2.0 * cfg.tau_max * cfg.nu_max << ")";
    throw ConfigError(err.str());
  }
  const double rate = cfg.power_profile > 0.0 ? cfg.power_profile : default_power_profile(cfg.tau_max);
  const double delay_step = 1.0 / (grid.M * grid.F());
  const double doppler_step = 1.0 / (grid.N * grid.T());

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

  DDChannel ch;
  ch.tau_max = cfg.tau_max;
  ch.nu_max = cfg.nu_max;
  double power = 0.0;
  for (int r = 0; r < cfg.R; ++r) {
    Scatterer s;
    s.tau = cfg.tau_max * unit(rng);
    s.nu = cfg.nu_max * (2.0 * unit(rng) - 1.0);
    if (!cfg.fractional) {
      s.tau = snap(s.tau, delay_step, 0.0, cfg.tau_max);
      s.nu = snap(s.nu, doppler_step, -cfg.nu_max, cfg.nu_max);
    }
    const double re = normal(rng);
    const double im = normal(rng);
    s.eta = cplx(re, im) * std::sqrt(std::exp(-s.tau * rate));
    power += std::norm(s.eta);
    ch.scatterers.push_back(s);
  }
  if (power > 0.0) {
    const double scale = 1.0 / std::sqrt(power);
    for (auto& s : ch.scatterers) s.eta *= scale;
  }
  return ch;
}

Signal apply_channel(const Signal& f, const DDChannel& ch, const GaborGrid& grid) {
  if (f.size() != grid.L) {
    std::ostringstream err;
    err << "apply_channel: signal length " << f.size() << " does not match L=" << grid.L;
    throw DimensionError(err.str());
  }
  const long L = grid.L;
  for (const auto& s : ch.scatterers) {
    if (std::abs(s.tau) * grid.fs >= static_cast<double>(L))
      throw ConfigError("apply_channel: scatterer delay exceeds the frame duration");
  }
  CVector spectrum;
  Signal out = Signal::Zero(L);
  const long start = grid.first_sample();
  for (const auto& s : ch.scatterers) {
    const double shift = s.tau * grid.fs;
    CVector delayed;
    if (std::abs(shift - std::round(shift)) < 1e-12) {
      delayed = fft::delay(f, shift, grid.first_bin());
    } else {
      if (spectrum.size() == 0) spectrum = fft::forward(f);
      delayed = fft::delay_spectrum(spectrum, shift, grid.first_bin());
    }
    for (long t = 0; t < L; ++t) {
      const long ts = start + wrap(t - start, L);
      out[t] += s.eta * delayed[t] * expj(kTwoPi * s.nu * static_cast<double>(ts) / grid.fs);
    }
  }
  return out;
}

Signal add_noise(const Signal& f, double sigma2, Rng& rng) {
  if (sigma2 < 0.0) throw ConfigError("add_noise: negative variance");
  if (sigma2 == 0.0) return f;
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * sigma2));
  Signal out = f;
  for (Eigen::Index t = 0; t < out.size(); ++t) {
    const double re = normal(rng);
    const double im = normal(rng);
    out[t] += cplx(re, im);
  }
  return out;
}

Frame true_cmd(const DDChannel& ch, const Pulse& gamma, const Pulse& g, const GaborGrid& grid) {
  Frame h = Frame::Zero(grid.M, grid.N);
  const double T = grid.T();
  const double F = grid.F();
  for (const auto& s : ch.scatterers) {
    const cplx amp = s.eta * cross_ambiguity(gamma, g, s.tau, s.nu, grid);
    for (int n = 0; n < grid.N; ++n)
      for (int m = 0; m < grid.M; ++m) h(m, n) += amp * expj(kTwoPi * (n * T * s.nu - m * F * s.tau));
  }
  return h;
}

cplx dirichlet(int K, double t) {
  const double nearest = std::round(t);
  if (std::abs(t - nearest) < 1e-13) return cplx(static_cast<double>(K), 0.0);
  return expj(kPi * (K - 1) * t) * (std::sin(kPi * K * t) / std::sin(kPi * t));
}

Frame dd_leakage_response(double tau, double nu, const Pulse& gamma, const Pulse& g, const GaborGrid& grid) {
  const cplx amp = cross_ambiguity(gamma, g, tau, nu, grid);
  const double doppler_bins = grid.N * grid.T() * nu;
  const double delay_bins = grid.M * grid.F() * tau;
  Frame H(grid.N, grid.M);
  for (int l = 0; l < grid.N; ++l) {
    const cplx dn = dirichlet(grid.N, (l + doppler_bins) / grid.N);
    for (int k = 0; k < grid.M; ++k) H(l, k) = amp * dn * dirichlet(grid.M, (-k - delay_bins) / grid.M);
  }
  return H;
}

double self_interference_power(const Frame& x, const DDChannel& ch, const Pulse& gamma, const Pulse& g,
                               const GaborGrid& grid) {
  if (x.size() == 0) return 0.0;
  const Frame y = analyze(apply_channel(synthesize(x, gamma, grid), ch, grid), g, grid);
  const Frame h = true_cmd(ch, gamma, g, grid);
  const Frame z = y - x.cwiseProduct(h);
  return z.squaredNorm() / static_cast<double>(z.size());
}

void write_channel_csv(std::ostream& out, const DDChannel& ch) {
  out << "r,tau_s,nu_hz,eta_re,eta_im\n";
  char line[160];
  for (size_t r = 0; r < ch.scatterers.size(); ++r) {
    const auto& s = ch.scatterers[r];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", r, s.tau, s.nu, s.eta.real(),
                  s.eta.imag());
    out << line;
  }
}

DDChannel read_channel_csv(std::istream& in) {
  DDChannel ch;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("read_channel_csv: empty input");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double v[5];
    for (double& value : v) {
      if (!std::getline(row, cell, ',')) throw ConfigError("read_channel_csv: short row: " + line);
      value = std::stod(cell);
    }
    Scatterer s{v[1], v[2], cplx(v[3], v[4])};
    ch.tau_max = std::max(ch.tau_max, std::abs(s.tau));
    ch.nu_max = std::max(ch.nu_max, std::abs(s.nu));
    ch.scatterers.push_back(s);
  }
  return ch;
}

}  // namespace ddlf
