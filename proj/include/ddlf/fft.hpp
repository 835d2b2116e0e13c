#pragma once

#include "ddlf/types.hpp"

namespace ddlf::fft {

// Unnormalized DFT: X[k] = sum_t x[t] exp(-2 pi j k t / L). Any length.
CVector forward(const CVector& x);

// Unnormalized inverse: x[t] = sum_k X[k] exp(+2 pi j k t / L). Callers
// divide by L themselves.
CVector backward(const CVector& x);

// Circularly delays x by `shift` samples (may be fractional). The shift is
// applied as a phase ramp exp(-2 pi j k shift / L) where the DFT bins are read
// as the integers first_bin, ..., first_bin + L - 1. Integer shifts reduce to
// an exact rotation.
CVector delay(const CVector& x, double shift, long first_bin);

// Same as delay() but starting from an already computed spectrum.
CVector delay_spectrum(const CVector& spectrum, double shift, long first_bin);

// Symmetric bin window [-L/2, L/2).
inline long centered_first_bin(long length) { return -(length / 2); }

}  // namespace ddlf::fft
