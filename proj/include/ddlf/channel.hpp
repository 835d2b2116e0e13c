#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ddlf/gabor.hpp"
#include "ddlf/grid.hpp"
#include "ddlf/rng.hpp"
#include "ddlf/types.hpp"

namespace ddlf {

struct Scatterer {
  double tau = 0.0;  // delay, seconds
  double nu = 0.0;   // Doppler, hertz
  cplx eta{1.0, 0.0};
};

// Point scatterers in the continuous delay-Doppler plane.
struct DDChannel {
  std::vector<Scatterer> scatterers;
  double tau_max = 0.0;
  double nu_max = 0.0;

  // Throws ConfigError unless every scatterer lies in [0, tau_max] x
  // [-nu_max, nu_max] and 2 tau_max nu_max < 0.1.
  void validate() const;

  double spread() const { return 2.0 * tau_max * nu_max; }
};

// Single scatterer channel with the given spread bounds (defaulting to the
// scatterer itself).
DDChannel single_scatterer(double tau, double nu, cplx eta);

struct ChannelConfig {
  int R = 16;
  double tau_max = 0.0;
  double nu_max = 0.0;
  // Exponential power-delay decay rate (1/s). Non-positive selects the
  // default ln(100) / (tau_max / 2).
  double power_profile = 0.0;
  std::uint64_t seed = 0;
  bool fractional = true;
};

double default_power_profile(double tau_max);

// Synthetic WSSUS channel: uniform delays and Dopplers (snapped to the 1/(MF)
// and 1/(NT) grids unless cfg.fractional), circular Gaussian gains with an
// exponential power-delay profile, renormalized to unit total power.
DDChannel generate_channel(const ChannelConfig& cfg, const GaborGrid& grid);

// f_rx[t] = sum_r eta_r f[t - tau_r] exp(2 pi j nu_r t / fs). Delays are
// cyclic (block cyclic prefix) and band-limited; Doppler time t runs over
// the window starting at grid.first_sample().
Signal apply_channel(const Signal& f, const DDChannel& ch, const GaborGrid& grid);

// Adds circular Gaussian noise of variance sigma2 per sample. With unit-norm
// analysis pulses this is also the variance per analyzed TF symbol.
Signal add_noise(const Signal& f, double sigma2, Rng& rng);

// h(m,n) = sum_r eta_r exp(2 pi j (n T nu_r - m F tau_r)) A(tau_r, nu_r)
Frame true_cmd(const DDChannel& ch, const Pulse& gamma, const Pulse& g, const GaborGrid& grid);

// D_K(t) = sum_{k<K} exp(2 pi j k t).
cplx dirichlet(int K, double t);

// Delay-Doppler image of a single unit scatterer's CMD, indexed (l, k) over
// the adjoint grid Z_N x Z_M (an N x M array):
//   H(l, k) = A(tau, nu) D_N((l + N T nu) / N) D_M((-k - M F tau) / M).
Frame dd_leakage_response(double tau, double nu, const Pulse& gamma, const Pulse& g,
                          const GaborGrid& grid);

// Mean power of y - x .* h where y is the noiseless received frame and h the
// true CMD.
double self_interference_power(const Frame& x, const DDChannel& ch, const Pulse& gamma, const Pulse& g,
                               const GaborGrid& grid);

// CSV with header r,tau_s,nu_hz,eta_re,eta_im. Values are written with 17
// significant digits so a dump reads back bit-exact. The reader takes the
// spread bounds from the largest |tau| and |nu| in the file.
void write_channel_csv(std::ostream& out, const DDChannel& ch);
DDChannel read_channel_csv(std::istream& in);

}  // namespace ddlf
