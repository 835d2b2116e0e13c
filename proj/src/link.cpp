#include "ddlf/link.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

namespace ddlf {

Frame mmse_equalize(const Frame& y, const Frame& h_tilde, double sigma2) {
  if (y.rows() != h_tilde.rows() || y.cols() != h_tilde.cols())
    throw DimensionError("mmse_equalize: shape mismatch");
  if (sigma2 < 0.0) throw ConfigError("mmse_equalize: negative noise variance");
  Frame x(y.rows(), y.cols());
  for (long n = 0; n < y.cols(); ++n) {
    for (long m = 0; m < y.rows(); ++m) {
      const cplx h = h_tilde(m, n);
      const double den = std::norm(h) + sigma2;
      if (den == 0.0) throw SolverError("mmse_equalize: zero channel coefficient with sigma2 = 0");
      x(m, n) = std::conj(h) * y(m, n) / den;
    }
  }
  return x;
}

cplx qpsk_symbol(std::uint8_t b0, std::uint8_t b1) {
  static const double s = 1.0 / std::sqrt(2.0);
  return {(b0 ? -s : s), (b1 ? -s : s)};
}

Frame qpsk_modulate(const Bits& bits, int rows, int cols) {
  if (rows < 0 || cols < 0 || bits.size() != 2 * static_cast<size_t>(rows) * cols)
    throw DimensionError("qpsk_modulate: need exactly 2 bits per symbol");
  Frame x(rows, cols);
  size_t i = 0;
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n, i += 2) x(m, n) = qpsk_symbol(bits[i], bits[i + 1]);
  return x;
}

Bits qpsk_demodulate(const Frame& symbols) {
  Bits bits;
  bits.reserve(2 * static_cast<size_t>(symbols.size()));
  for (long m = 0; m < symbols.rows(); ++m) {
    for (long n = 0; n < symbols.cols(); ++n) {
      bits.push_back(symbols(m, n).real() < 0.0 ? 1 : 0);
      bits.push_back(symbols(m, n).imag() < 0.0 ? 1 : 0);
    }
  }
  return bits;
}

namespace {

constexpr std::array<unsigned, 3> kGenerators = {0133, 0171, 0165};
constexpr int kStates = 1 << (kConstraintLength - 1);

// Output triple for the register value (newest bit in the MSB of 7 bits).
std::array<std::uint8_t, 3> branch_output(unsigned reg) {
  std::array<std::uint8_t, 3> out{};
  for (int g = 0; g < 3; ++g) out[g] = static_cast<std::uint8_t>(std::popcount(reg & kGenerators[g]) & 1);
  return out;
}

}  // namespace

Bits conv_code_encode(const Bits& info) {
  Bits out;
  out.reserve(3 * (info.size() + kCodeTail));
  unsigned state = 0;  // previous six inputs, most recent in bit 5
  auto push = [&](std::uint8_t bit) {
    const unsigned reg = (static_cast<unsigned>(bit & 1) << 6) | state;
    for (auto o : branch_output(reg)) out.push_back(o);
    state = reg >> 1;
  };
  for (auto b : info) push(b);
  for (int i = 0; i < kCodeTail; ++i) push(0);
  return out;
}

Bits conv_code_decode_hard(const Bits& coded) {
  if (coded.size() % 3 != 0 || coded.size() < 3 * static_cast<size_t>(kCodeTail))
    throw DimensionError("conv_code_decode_hard: length is not 3 (n + 6)");
  const size_t steps = coded.size() / 3;
  const size_t n_info = steps - kCodeTail;

  std::array<std::array<std::uint8_t, 3>, 2 * kStates> outputs;
  for (unsigned reg = 0; reg < 2 * kStates; ++reg) outputs[reg] = branch_output(reg);

  constexpr int kInf = std::numeric_limits<int>::max() / 2;
  std::vector<int> metric(kStates, kInf), next(kStates);
  metric[0] = 0;
  // survivor[t][s]: input bit that led into state s at step t (state s keeps
  // the input in bit 5, so the predecessor is ((s << 1) & 63) | dropped bit).
  std::vector<std::array<std::uint8_t, kStates>> survivor(steps);
  for (size_t t = 0; t < steps; ++t) {
    std::fill(next.begin(), next.end(), kInf);
    const std::uint8_t* r = &coded[3 * t];
    for (int s = 0; s < kStates; ++s) {
      if (metric[s] >= kInf) continue;
      const int max_bit = t < n_info ? 1 : 0;
      for (int bit = 0; bit <= max_bit; ++bit) {
        const unsigned reg = (static_cast<unsigned>(bit) << 6) | static_cast<unsigned>(s);
        const auto& o = outputs[reg];
        const int d = (o[0] != (r[0] & 1)) + (o[1] != (r[1] & 1)) + (o[2] != (r[2] & 1));
        const int ns = static_cast<int>(reg >> 1);
        const int cand = metric[s] + d;
        // The dropped register bit (s & 1) identifies the predecessor.
        if (cand < next[ns]) {
          next[ns] = cand;
          survivor[t][ns] = static_cast<std::uint8_t>(s & 1);
        }
      }
    }
    metric.swap(next);
  }

  Bits info(n_info);
  int s = 0;
  for (size_t t = steps; t-- > 0;) {
    const int bit = (s >> 5) & 1;
    if (t < n_info) info[t] = static_cast<std::uint8_t>(bit);
    s = ((s << 1) & (kStates - 1)) | survivor[t][s];
  }
  return info;
}

int info_bits_for(int coded_capacity) { return std::max(0, coded_capacity / 3 - kCodeTail); }

double bit_error_rate(const Bits& tx, const Bits& rx) {
  if (tx.size() != rx.size()) throw DimensionError("bit_error_rate: length mismatch");
  if (tx.empty()) return 0.0;
  long errors = 0;
  for (size_t i = 0; i < tx.size(); ++i) errors += (tx[i] & 1) != (rx[i] & 1);
  return static_cast<double>(errors) / static_cast<double>(tx.size());
}

double ber_db(double ber, long total_bits) {
  if (ber > 0.0) return 10.0 * std::log10(ber);
  if (total_bits <= 0) throw DimensionError("ber_db: no bits");
  return 10.0 * std::log10(1.0 / (2.0 * static_cast<double>(total_bits)));
}

FrameMetrics compute_metrics(const Frame& x_hat, const Frame& x, const Bits& bits_tx, const Bits& bits_rx) {
  if (x_hat.rows() != x.rows() || x_hat.cols() != x.cols()) throw DimensionError("compute_metrics: shape mismatch");
  const double energy = x.squaredNorm();
  if (!(energy > 0.0)) throw DimensionError("compute_metrics: zero transmit energy");
  const Eigen::ArrayXXd err = (x_hat - x).cwiseAbs2().array();
  const double total = err.sum();
  FrameMetrics fm;
  fm.rel_symbol_mse_db = total > 0.0 ? std::max(kMseFloorDb, 10.0 * std::log10(total / energy)) : kMseFloorDb;
  const double mean = total / static_cast<double>(err.size());
  fm.nmsed_db = mean > 0.0 ? 10.0 * std::log10(err.maxCoeff() / mean) : 0.0;
  fm.uncoded_ber = bit_error_rate(bits_tx, bits_rx);
  return fm;
}

}  // namespace ddlf
