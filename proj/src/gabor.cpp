#include "ddlf/gabor.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ddlf/fft.hpp"

namespace ddlf {
namespace {

long wrap(long i, long n) { return ((i % n) + n) % n; }

void require_pulse(const Pulse& p, const GaborGrid& grid, const char* what) {
  if (p.size() != grid.L) {
    std::ostringstream err;
    err << what << ": pulse length " << p.size() << " does not match L=" << grid.L;
    throw DimensionError(err.str());
  }
}

}  // namespace

Pulse gaussian_prototype(const GaborGrid& grid, double spread) {
  if (grid.L <= 0) throw ConfigError("gaussian_prototype: grid has no samples");
  if (!(spread > 0.0)) throw ConfigError("gaussian_prototype: spread must be positive");
  const long L = grid.L;
  const double width = spread * std::sqrt(static_cast<double>(grid.a) * grid.channels());
  Pulse p{Signal::Zero(L)};
  const int periods = 2 + static_cast<int>(std::ceil(4.0 * width / L));
  for (long t = 0; t < L; ++t) {
    double v = 0.0;
    for (int k = -periods; k <= periods; ++k) {
      const double s = (static_cast<double>(t) + static_cast<double>(k) * L) / width;
      v += std::exp(-kPi * s * s);
    }
    p.samples[t] = v;
  }
  p.samples /= p.samples.norm();
  return p;
}

Pulse tight_orthogonalize(const Pulse& prototype, const GaborGrid& grid) {
  grid.validate();
  require_pulse(prototype, grid, "tight_orthogonalize");
  const long L = grid.L;
  const long K = grid.channels();  // adjoint time step in samples
  const long slots = grid.b;       // adjoint time slots, L / K
  const long classes = grid.a;     // adjoint channel count, L / N
  const long block = grid.N;       // L / classes

  const Signal& g = prototype.samples;
  Pulse out{Signal::Zero(L)};
  double eig_min = std::numeric_limits<double>::infinity();
  double eig_max = 0.0;

  for (long r = 0; r < classes; ++r) {
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(block, block);
    for (long i = 0; i < block; ++i) {
      for (long k = 0; k <= i; ++k) {
        cplx acc = 0.0;
        for (long n = 0; n < slots; ++n) {
          acc += g[wrap(r + i * classes - n * K, L)] * std::conj(g[wrap(r + k * classes - n * K, L)]);
        }
        acc *= static_cast<double>(classes);
        S(i, k) = acc;
        S(k, i) = std::conj(acc);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(S);
    if (eig.info() != Eigen::Success) throw FrameError("tight_orthogonalize: eigendecomposition failed");
    const auto& values = eig.eigenvalues();
    eig_min = std::min(eig_min, values.minCoeff());
    eig_max = std::max(eig_max, values.maxCoeff());
    if (!(values.minCoeff() > 0.0)) break;

    Eigen::VectorXd inv_sqrt = values.array().rsqrt();
    Eigen::MatrixXcd root = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().adjoint();
    CVector local(block);
    for (long i = 0; i < block; ++i) local[i] = g[r + i * classes];
    CVector mapped = root * local;
    for (long i = 0; i < block; ++i) out.samples[r + i * classes] = mapped[i];
  }

  if (!(eig_min > 0.0) || eig_max / eig_min > 1e12) {
    std::ostringstream err;
    err << "tight_orthogonalize: adjoint frame operator is ill-conditioned (eigenvalues in [" << eig_min
        << ", " << eig_max << "])";
    throw FrameError(err.str());
  }
  out.samples /= out.samples.norm();
  return out;
}

Signal synthesize(const Frame& x, const Pulse& gamma, const GaborGrid& grid) {
  require_pulse(gamma, grid, "synthesize");
  if (x.rows() != grid.M || x.cols() != grid.N) {
    std::ostringstream err;
    err << "synthesize: frame is " << x.rows() << "x" << x.cols() << ", grid expects " << grid.M << "x"
        << grid.N;
    throw DimensionError(err.str());
  }
  const long L = grid.L;
  const long K = grid.channels();
  // e^{2 pi j m t / K} is K-periodic in t, so each column reduces to a
  // length-K inverse DFT.
  Eigen::MatrixXcd twiddle(K, grid.M);
  for (long r = 0; r < K; ++r)
    for (long m = 0; m < grid.M; ++m) twiddle(r, m) = expj(kTwoPi * static_cast<double>((m * r) % K) / K);

  Signal f = Signal::Zero(L);
  for (long n = 0; n < grid.N; ++n) {
    CVector u = twiddle * x.col(n);
    const long shift = n * grid.a;
    for (long t = 0; t < L; ++t) f[t] += gamma.samples[wrap(t - shift, L)] * u[t % K];
  }
  return f;
}

Frame analyze(const Signal& f, const Pulse& g, const GaborGrid& grid) {
  require_pulse(g, grid, "analyze");
  if (f.size() != grid.L) {
    std::ostringstream err;
    err << "analyze: signal length " << f.size() << " does not match L=" << grid.L;
    throw DimensionError(err.str());
  }
  const long L = grid.L;
  const long K = grid.channels();
  Eigen::MatrixXcd twiddle(grid.M, K);
  for (long m = 0; m < grid.M; ++m)
    for (long r = 0; r < K; ++r) twiddle(m, r) = expj(-kTwoPi * static_cast<double>((m * r) % K) / K);

  Frame y(grid.M, grid.N);
  CVector folded(K);
  for (long n = 0; n < grid.N; ++n) {
    folded.setZero();
    const long shift = n * grid.a;
    for (long t = 0; t < L; ++t) folded[t % K] += std::conj(g.samples[wrap(t - shift, L)]) * f[t];
    y.col(n) = twiddle * folded;
  }
  return y;
}

cplx cross_ambiguity(const Pulse& gamma, const Pulse& g, double tau, double nu, const GaborGrid& grid) {
  require_pulse(gamma, grid, "cross_ambiguity");
  require_pulse(g, grid, "cross_ambiguity");
  const long L = grid.L;
  const CVector shifted = fft::delay(gamma.samples, tau * grid.fs, fft::centered_first_bin(L));
  const long start = -(L / 2);
  cplx acc = 0.0;
  for (long t = 0; t < L; ++t) {
    const long ts = start + wrap(t - start, L);
    acc += std::conj(g.samples[t]) * shifted[t] * expj(kTwoPi * nu * static_cast<double>(ts) / grid.fs);
  }
  return acc;
}

double biorthogonality_residual(const Pulse& gamma, const Pulse& g, const GaborGrid& grid) {
  require_pulse(gamma, grid, "biorthogonality_residual");
  require_pulse(g, grid, "biorthogonality_residual");
  const long L = grid.L;
  const long K = grid.channels();
  double worst = 0.0;
  CVector folded(K);
  for (long n = 0; n < grid.N; ++n) {
    folded.setZero();
    for (long t = 0; t < L; ++t)
      folded[t % K] += std::conj(g.samples[t]) * gamma.samples[wrap(t - n * grid.a, L)];
    for (long m = 0; m < K; ++m) {
      cplx acc = 0.0;
      for (long r = 0; r < K; ++r) acc += folded[r] * expj(kTwoPi * static_cast<double>((m * r) % K) / K);
      const cplx target = (m == 0 && n == 0) ? cplx(1.0) : cplx(0.0);
      worst = std::max(worst, std::abs(acc - target));
    }
  }
  return worst;
}

Pulse default_pulse(const GaborGrid& grid, double spread) {
  return tight_orthogonalize(gaussian_prototype(grid, spread), grid);
}

}  // namespace ddlf
