#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ddlf/types.hpp"

namespace ddlf {

using Bits = std::vector<std::uint8_t>;

// x_hat = conj(h) y / (|h|^2 + sigma2), cell by cell.
Frame mmse_equalize(const Frame& y, const Frame& h_tilde, double sigma2);

// Gray-mapped QPSK with unit symbol energy: (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2).
// Symbols fill the frame in row-major order, two bits per symbol.
Frame qpsk_modulate(const Bits& bits, int rows, int cols);
// Hard decision by quadrant, same ordering as qpsk_modulate.
Bits qpsk_demodulate(const Frame& symbols);
cplx qpsk_symbol(std::uint8_t b0, std::uint8_t b1);

// Rate 1/3, constraint length 7, generators 133, 171, 165 (octal). The
// encoder appends six zero tail bits, so n info bits give 3 (n + 6) coded bits.
inline constexpr int kConstraintLength = 7;
inline constexpr int kCodeTail = kConstraintLength - 1;
Bits conv_code_encode(const Bits& info);
// Hard-decision Viterbi decoding of a zero-terminated codeword. Throws
// DimensionError when the length is not 3 (n + 6).
Bits conv_code_decode_hard(const Bits& coded);
// Largest info length whose codeword fits in `coded_capacity` bits.
int info_bits_for(int coded_capacity);

struct FrameMetrics {
  double rel_symbol_mse_db = 0.0;
  double uncoded_ber = 0.0;
  std::optional<double> coded_ber;
  double nmsed_db = 0.0;
};

inline constexpr double kMseFloorDb = -120.0;

double bit_error_rate(const Bits& tx, const Bits& rx);

// 10 log10(ber), floored at 10 log10(1 / (2 total_bits)) when no error was
// seen.
double ber_db(double ber, long total_bits);

// rel_symbol_mse = 10 log10(|x_hat - x|^2 / |x|^2), nmsed = 10 log10(max /
// mean of the per-symbol squared error). Both are 0-error safe: the MSE
// floors at kMseFloorDb and nmsed is 0 dB.
FrameMetrics compute_metrics(const Frame& x_hat, const Frame& x, const Bits& bits_tx, const Bits& bits_rx);

}  // namespace ddlf
