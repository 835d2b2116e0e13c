#include "ddlf/transforms.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/QR>

#include "ddlf/fft.hpp"

namespace ddlf {

std::string_view to_string(PrecoderKind kind) {
  switch (kind) {
    case PrecoderKind::none: return "none";
    case PrecoderKind::dsft2d: return "dsft2d";
    case PrecoderKind::fft1d: return "fft1d";
    case PrecoderKind::fft2d: return "fft2d";
    case PrecoderKind::fwht1d: return "fwht1d";
    case PrecoderKind::fwht2d: return "fwht2d";
    case PrecoderKind::random: return "random";
  }
  return "none";
}

PrecoderKind parse_precoder_kind(std::string_view name) {
  for (auto kind : {PrecoderKind::none, PrecoderKind::dsft2d, PrecoderKind::fft1d, PrecoderKind::fft2d,
                    PrecoderKind::fwht1d, PrecoderKind::fwht2d, PrecoderKind::random}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown precoder '" + std::string(name) + "'");
}

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

Frame dsft2d(const Frame& X) {
  const long P = X.rows();
  const long Q = X.cols();
  Frame out(Q, P);
  if (P == 0 || Q == 0) return out;
  // along l with exp(-2 pi j n l / P)
  Eigen::MatrixXcd Y(P, Q);
  for (long k = 0; k < Q; ++k) Y.col(k) = fft::forward(X.col(k));
  // along k with exp(+2 pi j m k / Q)
  for (long n = 0; n < P; ++n) {
    CVector row = Y.row(n).transpose();
    out.col(n) = fft::backward(row);
  }
  out /= std::sqrt(static_cast<double>(P * Q));
  return out;
}

CVector fwht(const CVector& v) {
  const long n = v.size();
  if (!is_power_of_two(n)) {
    std::ostringstream err;
    err << "fwht: length " << n << " is not a power of two";
    throw DimensionError(err.str());
  }
  CVector out = v;
  for (long h = 1; h < n; h <<= 1) {
    for (long i = 0; i < n; i += 2 * h) {
      for (long j = i; j < i + h; ++j) {
        const cplx x = out[j];
        const cplx y = out[j + h];
        out[j] = x + y;
        out[j + h] = x - y;
      }
    }
  }
  out /= std::sqrt(static_cast<double>(n));
  return out;
}

namespace {

CVector unitary_dft(const CVector& v, bool inverse) {
  CVector out = inverse ? fft::backward(v) : fft::forward(v);
  out /= std::sqrt(static_cast<double>(v.size()));
  return out;
}

Frame unitary_dft2(const Frame& in, bool inverse) {
  Frame tmp(in.rows(), in.cols());
  for (long c = 0; c < in.cols(); ++c) tmp.col(c) = unitary_dft(in.col(c), inverse);
  Frame out(in.rows(), in.cols());
  for (long r = 0; r < in.rows(); ++r) out.row(r) = unitary_dft(tmp.row(r).transpose(), inverse).transpose();
  return out;
}

CVector vectorize(const Frame& f) { return Eigen::Map<const CVector>(f.data(), f.size()); }

Frame unvectorize(const CVector& v, long rows, long cols) { return Eigen::Map<const Frame>(v.data(), rows, cols); }

}  // namespace

Precoder::Precoder(PrecoderKind kind, int rows, int cols, int subframes, std::uint64_t seed)
    : kind_(kind), rows_(rows), cols_(cols), subframes_(subframes) {
  if (rows <= 0 || cols <= 0) throw ConfigError("precoder: shape must be positive");
  if (subframes != 1 && subframes != 2 && subframes != 4 && subframes != 8)
    throw ConfigError("precoder: subframes must be 1, 2, 4 or 8");
  if (cols % subframes != 0) {
    std::ostringstream err;
    err << "precoder: " << cols << " time steps do not split into " << subframes << " sub-frames";
    throw ConfigError(err.str());
  }
  const long block_cols = cols / subframes;
  const long block_size = static_cast<long>(rows) * block_cols;
  if (kind == PrecoderKind::fwht1d && !is_power_of_two(block_size))
    throw ConfigError("precoder: fwht1d needs a power-of-two block size");
  if (kind == PrecoderKind::fwht2d && !(is_power_of_two(rows) && is_power_of_two(block_cols)))
    throw ConfigError("precoder: fwht2d needs power-of-two block dimensions");
  if (kind == PrecoderKind::random) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RMatrix G(block_size, block_size);
    for (long j = 0; j < block_size; ++j)
      for (long i = 0; i < block_size; ++i) G(i, j) = normal(rng);
    Eigen::HouseholderQR<RMatrix> qr(G);
    RMatrix Q = qr.householderQ() * RMatrix::Identity(block_size, block_size);
    const RMatrix& R = qr.matrixQR();
    for (long j = 0; j < block_size; ++j)
      if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    random_ = std::move(Q);
  }
}

Frame Precoder::transform_block(const Frame& block, bool inverse) const {
  switch (kind_) {
    case PrecoderKind::none: return block;
    case PrecoderKind::dsft2d:
      // Data symbols are laid out as the transposed delay-Doppler array so
      // the precoded block keeps the data-frame shape.
      return inverse ? Frame(dsft2d(block).transpose()) : dsft2d(block.transpose());
    case PrecoderKind::fft1d:
      return unvectorize(unitary_dft(vectorize(block), inverse), block.rows(), block.cols());
    case PrecoderKind::fft2d: return unitary_dft2(block, inverse);
    case PrecoderKind::fwht1d: return unvectorize(fwht(vectorize(block)), block.rows(), block.cols());
    case PrecoderKind::fwht2d: {
      Frame tmp(block.rows(), block.cols());
      for (long c = 0; c < block.cols(); ++c) tmp.col(c) = fwht(block.col(c));
      Frame out(block.rows(), block.cols());
      for (long r = 0; r < block.rows(); ++r) out.row(r) = fwht(tmp.row(r).transpose()).transpose();
      return out;
    }
    case PrecoderKind::random: {
      const CVector v = vectorize(block);
      CVector w = inverse ? CVector(random_.transpose().cast<cplx>() * v) : CVector(random_.cast<cplx>() * v);
      return unvectorize(w, block.rows(), block.cols());
    }
  }
  return block;
}

Frame Precoder::apply(const Frame& in, bool inverse) const {
  if (in.rows() != rows_ || in.cols() != cols_) {
    std::ostringstream err;
    err << "precoder: frame is " << in.rows() << "x" << in.cols() << ", expected " << rows_ << "x" << cols_;
    throw DimensionError(err.str());
  }
  const int block_cols = cols_ / subframes_;
  Frame out(rows_, cols_);
  for (int s = 0; s < subframes_; ++s) {
    out.middleCols(s * block_cols, block_cols) =
        transform_block(in.middleCols(s * block_cols, block_cols), inverse);
  }
  return out;
}

Frame Precoder::encode(const Frame& X) const { return apply(X, false); }

Frame Precoder::decode(const Frame& x) const { return apply(x, true); }

}  // namespace ddlf
