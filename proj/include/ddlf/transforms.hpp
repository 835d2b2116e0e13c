#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ddlf/rng.hpp"
#include "ddlf/types.hpp"

namespace ddlf {

enum class PrecoderKind { none, dsft2d, fft1d, fft2d, fwht1d, fwht2d, random };

std::string_view to_string(PrecoderKind kind);
PrecoderKind parse_precoder_kind(std::string_view name);

// 2D discrete symplectic Fourier transform. The input is a delay-Doppler
// array indexed (l, k) over Z_P x Z_Q; the output is the TF array indexed
// (m, n) over Z_Q x Z_P:
//   x(m, n) = 1/sqrt(PQ) sum_{l,k} X(l, k) exp(-2 pi j (n l / P - m k / Q)).
// Applying it twice returns the input.
Frame dsft2d(const Frame& X);

// Orthonormal Walsh-Hadamard transform (self-inverse). Length must be a
// power of two.
CVector fwht(const CVector& v);

bool is_power_of_two(long n);

// Orthogonal data precoder. The data frame (rows x cols) is split along time
// into `subframes` equal blocks that are transformed independently. 1D kinds
// act on the column-major vectorization of a block.
class Precoder {
 public:
  Precoder() = default;
  Precoder(PrecoderKind kind, int rows, int cols, int subframes = 1, std::uint64_t seed = 0);

  PrecoderKind kind() const { return kind_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int subframes() const { return subframes_; }

  Frame encode(const Frame& X) const;
  Frame decode(const Frame& x) const;

 private:
  Frame apply(const Frame& in, bool inverse) const;
  Frame transform_block(const Frame& block, bool inverse) const;

  PrecoderKind kind_ = PrecoderKind::none;
  int rows_ = 0;
  int cols_ = 0;
  int subframes_ = 1;
  RMatrix random_;  // orthogonal matrix for PrecoderKind::random
};

inline Frame encode(const Frame& X, const Precoder& p) { return p.encode(X); }
inline Frame decode(const Frame& x, const Precoder& p) { return p.decode(x); }

}  // namespace ddlf
