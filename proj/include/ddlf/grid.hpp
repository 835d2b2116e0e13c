#pragma once

#include "ddlf/types.hpp"

namespace ddlf {

// Discrete Gabor lattice on a cyclic signal of L samples.
//
// Atoms are shifted by `a` samples in time and `b` DFT bins in frequency.
// The full cyclic lattice has N time slots (L = a N) and K = L / b frequency
// slots; the transmit frame occupies the first M <= K of them. The sampling
// rate is fs = K F, so T = a / fs and the time-frequency product is
// T F = a / K = b / N.
struct GaborGrid {
  int M = 0;
  int N = 0;
  int a = 0;
  int b = 0;
  int L = 0;
  double fs = 0.0;

  // Builds the smallest grid with M x N active cells whose time-frequency
  // product is round(tf N) / N and whose subcarrier spacing is F.
  static GaborGrid make(int M, int N, double subcarrier_spacing, double tf = 1.25);

  int channels() const { return L / b; }
  double T() const { return a / fs; }
  double F() const { return fs / channels(); }
  double tf() const { return static_cast<double>(b) / N; }
  double frame_duration() const { return N * T(); }

  // First DFT bin of the frequency window used for band-limited delays: the
  // cut sits in the middle of the unused band (or between the top and the
  // bottom subcarrier when every slot is active).
  long first_bin() const;

  // First sample of the time window used for Doppler phases: the cut sits
  // half a time step before the end of the frame.
  long first_sample() const;

  void validate() const;
};

bool operator==(const GaborGrid& lhs, const GaborGrid& rhs);

}  // namespace ddlf
