#pragma once

#include "ddlf/grid.hpp"
#include "ddlf/types.hpp"

namespace ddlf {

// A pulse sampled on the cyclic signal of a GaborGrid, centered at sample 0.
struct Pulse {
  Signal samples;

  double norm() const { return samples.norm(); }
  Eigen::Index size() const { return samples.size(); }
};

// Periodized, centered Gaussian exp(-pi t^2 / w^2) with w = spread * sqrt(a K)
// samples, i.e. a time width of spread * sqrt(T / F). Unit norm.
Pulse gaussian_prototype(const GaborGrid& grid, double spread = 1.0);

// Orthogonalizes `prototype` so that its time-frequency shifts on the grid
// lattice form an orthonormal system. Computed as S^{-1/2} applied to the
// prototype, where S is the frame operator of the adjoint lattice (time step
// K samples, frequency step N bins). S splits into a blocks of size N x N
// which are eigendecomposed independently.
//
// Throws FrameError when the adjoint frame operator has a condition number
// above 1e12.
Pulse tight_orthogonalize(const Pulse& prototype, const GaborGrid& grid);

// f[t] = sum_{m,n} x(m,n) gamma[t - n a] exp(2 pi j m b t / L)
Signal synthesize(const Frame& x, const Pulse& gamma, const GaborGrid& grid);

// y(m,n) = sum_t conj(g[t - n a]) exp(-2 pi j m b t / L) f[t]
Frame analyze(const Signal& f, const Pulse& g, const GaborGrid& grid);

// A(tau, nu) = sum_t conj(g[t]) gamma_tau[t] exp(2 pi j nu t / fs), with t
// read as a signed sample index in [-L/2, L/2) and gamma_tau the band-limited
// (DFT phase ramp) delay of gamma by tau seconds.
cplx cross_ambiguity(const Pulse& gamma, const Pulse& g, double tau, double nu,
                     const GaborGrid& grid);

// max over the full lattice of |<g_{m,n}, gamma_{0,0}> - delta_{m,n}|.
double biorthogonality_residual(const Pulse& gamma, const Pulse& g, const GaborGrid& grid);

// Orthogonalized Gaussian for `grid`.
Pulse default_pulse(const GaborGrid& grid, double spread = 1.0);

}  // namespace ddlf
