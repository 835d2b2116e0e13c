#include "ddlf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>

namespace ddlf {

void ReconstructionGrid::validate(const GaborGrid& grid) const {
  if (Q < 0 || W < 0 || Wn < 0) throw ConfigError("reconstruction grid: negative extent");
  if (2 * Q + 1 > grid.N) throw ConfigError("reconstruction grid: 2Q + 1 exceeds N");
  if (W + Wn + 1 > grid.M) throw ConfigError("reconstruction grid: W + Wn + 1 exceeds M");
}

ReconstructionGrid reconstruction_grid_for(double tau_max, double nu_max, const GaborGrid& grid, int margin) {
  ReconstructionGrid k;
  k.Q = static_cast<int>(std::floor(nu_max * grid.T() * grid.N)) + margin;
  k.W = static_cast<int>(std::floor(tau_max * grid.F() * grid.M)) + margin;
  k.Wn = margin;
  k.Q = std::clamp(k.Q, 0, (grid.N - 1) / 2);
  k.Wn = std::clamp(k.Wn, 0, grid.M - 1);
  k.W = std::clamp(k.W, 0, grid.M - 1 - k.Wn);
  return k;
}

std::string_view to_string(EstimatorVariant v) {
  switch (v) {
    case EstimatorVariant::lmmse: return "lmmse";
    case EstimatorVariant::srh: return "srh";
    case EstimatorVariant::srh_na: return "srh-na";
    case EstimatorVariant::srh_ma: return "srh-ma";
    case EstimatorVariant::srh_mna: return "srh-mna";
  }
  return "srh";
}

EstimatorVariant parse_estimator_variant(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto v : {EstimatorVariant::lmmse, EstimatorVariant::srh, EstimatorVariant::srh_na, EstimatorVariant::srh_ma,
                 EstimatorVariant::srh_mna}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

CVector partial_cmd(const CVector& q, const PilotSequence& p) {
  if (q.size() != p.symbols.size()) throw DimensionError("partial_cmd: pilot count mismatch");
  CVector h(q.size());
  for (Eigen::Index s = 0; s < q.size(); ++s) {
    if (std::abs(p.symbols[s]) == 0.0) throw PilotError("partial_cmd: zero pilot symbol");
    h[s] = q[s] / p.symbols[s];
  }
  return h;
}

double relaxation_delta(double sigma2, double sigma_z2, const PilotSequence& p) {
  double inverse_energy = 0.0;
  for (Eigen::Index s = 0; s < p.symbols.size(); ++s) {
    const double e = std::norm(p.symbols[s]);
    if (e == 0.0) throw PilotError("relaxation_delta: zero pilot symbol");
    inverse_energy += 1.0 / e;
  }
  return (sigma2 + sigma_z2) * inverse_energy;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXcd lmmse_dictionary(const std::vector<CellIndex>& cells, int M, int N,
                                  const ReconstructionGrid& grid_k) {
  Eigen::MatrixXcd C(static_cast<long>(cells.size()), grid_k.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(M) * N);
  long j = 0;
  for (int d = -grid_k.Wn; d <= grid_k.W; ++d) {
    const int k = -d;
    for (int l = -grid_k.Q; l <= grid_k.Q; ++l, ++j) {
      for (size_t s = 0; s < cells.size(); ++s) {
        const auto& c = cells[s];
        const double phase =
            -kTwoPi * (static_cast<double>(c.n) * l / N - static_cast<double>(c.m) * k / M);
        C(static_cast<long>(s), j) = scale * expj(phase);
      }
    }
  }
  return C;
}

LmmseEstimator::LmmseEstimator(const PilotPlacement& pl, const ReconstructionGrid& grid_k, double sigma2)
    : M_(pl.M), N_(pl.N) {
  if (sigma2 < 0.0) throw ConfigError("lmmse: negative noise variance");
  if (2 * grid_k.Q + 1 > pl.N || grid_k.W + grid_k.Wn + 1 > pl.M || grid_k.Q < 0 || grid_k.W < 0 || grid_k.Wn < 0)
    throw ConfigError("lmmse: reconstruction grid does not fit the frame");
  pilot_dictionary_ = lmmse_dictionary(pl.pilot_indices, pl.M, pl.N, grid_k);
  underdetermined_ = grid_k.size() > pl.pilot_count();

  std::vector<CellIndex> all;
  all.reserve(static_cast<size_t>(pl.M) * pl.N);
  for (int n = 0; n < pl.N; ++n)
    for (int m = 0; m < pl.M; ++m) all.push_back({m, n});
  synthesis_ = lmmse_dictionary(all, pl.M, pl.N, grid_k);

  const long K = grid_k.size();
  Eigen::MatrixXcd normal = pilot_dictionary_.adjoint() * pilot_dictionary_;
  normal.diagonal().array() += sigma2;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
    std::ostringstream err;
    err << "lmmse: normal matrix is singular (|K| = " << K << ", P = " << pl.pilot_count()
        << ", sigma2 = " << sigma2 << ")";
    throw SolverError(err.str());
  }
  solve_ = ldlt.solve(pilot_dictionary_.adjoint());
}

CMDEstimate LmmseEstimator::estimate(const CVector& h_pilot) const {
  if (h_pilot.size() != pilot_dictionary_.rows()) throw DimensionError("lmmse: pilot count mismatch");
  const CVector H = solve_ * h_pilot;
  const CVector h = synthesis_ * H;
  CMDEstimate out;
  out.h_tilde = Eigen::Map<const Frame>(h.data(), M_, N_);
  out.residual = (h_pilot - pilot_dictionary_ * H).squaredNorm();
  return out;
}

CMDEstimate lmmse_estimate(const CVector& h_pilot, const PilotPlacement& pl, const EstimatorConfig& cfg) {
  return LmmseEstimator(pl, cfg.grid_k, cfg.sigma2).estimate(h_pilot);
}

// ---------------------------------------------------------------------------

HessianKernels hessian_kernels() {
  HessianKernels k;
  k.tt << 0, 0, 0, -1, 2, -1, 0, 0, 0;
  k.ff << 0, -1, 0, 0, 2, 0, 0, -1, 0;
  k.tf << -1, 1, 0, 1, -1, 0, 0, 0, 0;
  return k;
}

Frame valid_convolution(const Frame& E, const Eigen::Matrix3d& kernel) {
  if (E.rows() < 3 || E.cols() < 3) throw DimensionError("valid_convolution: array smaller than the kernel");
  Frame out = Frame::Zero(E.rows() - 2, E.cols() - 2);
  for (long n = 0; n < out.cols(); ++n) {
    for (long m = 0; m < out.rows(); ++m) {
      cplx acc = 0.0;
      for (int l = -1; l <= 1; ++l)
        for (int k = -1; k <= 1; ++k) acc += E(m - l + 1, n - k + 1) * kernel(l + 1, k + 1);
      out(m, n) = acc;
    }
  }
  return out;
}

double weighted_hessian_energy(const Frame& h_ex, double alpha, double beta) {
  const auto k = hessian_kernels();
  const double a2 = alpha * alpha;
  const double b2 = beta * beta;
  const double ab = alpha * beta;
  const Frame ff = valid_convolution(h_ex, k.ff);
  const Frame tf = valid_convolution(h_ex, k.tf);
  const Frame tt = valid_convolution(h_ex, k.tt);
  return a2 * a2 * ff.squaredNorm() + 2.0 * ab * ab * tf.squaredNorm() + b2 * b2 * tt.squaredNorm();
}

double srh_objective(const Frame& h_ex, const CVector& h_pilot, const PilotPlacement& pl, double alpha,
                     double beta, double omega) {
  if (h_ex.rows() != pl.M + 2 || h_ex.cols() != pl.N + 2) throw DimensionError("srh_objective: shape mismatch");
  if (h_pilot.size() != pl.pilot_count()) throw DimensionError("srh_objective: pilot count mismatch");
  double fidelity = 0.0;
  for (size_t s = 0; s < pl.pilot_indices.size(); ++s) {
    const auto& c = pl.pilot_indices[s];
    fidelity += std::norm(h_pilot[static_cast<long>(s)] - h_ex(c.m + 1, c.n + 1));
  }
  return weighted_hessian_energy(h_ex, alpha, beta) + omega * fidelity;
}

SrhParameters resolve_srh_parameters(const EstimatorConfig& cfg, int pilot_count, const PilotSequence* pilots) {
  if (pilot_count <= 0) throw PilotError("srh: no pilots");
  SrhParameters p;
  const bool mode_aware = cfg.variant == EstimatorVariant::srh_ma || cfg.variant == EstimatorVariant::srh_mna;
  const bool noise_aware = cfg.variant == EstimatorVariant::srh_na || cfg.variant == EstimatorVariant::srh_mna;
  if (mode_aware) {
    p.alpha = cfg.alpha;
    p.beta = cfg.beta;
  }
  if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw ConfigError("srh: alpha and beta must be positive");
  if (noise_aware) {
    const double delta = pilots ? relaxation_delta(cfg.sigma2, cfg.sigma_z2, *pilots)
                                : (cfg.sigma2 + cfg.sigma_z2) * pilot_count;
    p.omega = delta > 1e-8 ? 1.0 / delta : 1e8;
  } else {
    p.omega = cfg.omega > 0.0 ? cfg.omega : 1.0 / pilot_count;
  }
  return p;
}

std::pair<double, double> mode_weights(double tau_max, double nu_max, const GaborGrid& grid) {
  const double per_time_step = nu_max * grid.T();
  const double per_freq_step = tau_max * grid.F();
  double ratio = 1.0;
  if (per_time_step > 0.0 && per_freq_step > 0.0) ratio = per_time_step / per_freq_step;
  else if (per_time_step > 0.0) ratio = 1e3;
  else if (per_freq_step > 0.0) ratio = 1e-3;
  ratio = std::clamp(ratio, 1e-3, 1e3);
  const double alpha = std::sqrt(ratio);
  return {alpha, 1.0 / alpha};
}

namespace {

using Triplet = Eigen::Triplet<double>;

}  // namespace

SrhEstimator::SrhEstimator(const PilotPlacement& pl, const SrhParameters& params, SrhSolver solver)
    : placement_(pl), params_(params), solver_(solver) {
  if (!(params.alpha > 0.0) || !(params.beta > 0.0)) throw ConfigError("srh: alpha and beta must be positive");
  if (!(params.omega > 0.0)) throw ConfigError("srh: omega must be positive");
  if (pl.pilot_count() == 0) throw PilotError("srh: no pilots");
  const int rows = pl.M + 2;
  const int cols = pl.N + 2;
  const long unknowns = static_cast<long>(rows) * cols;
  auto var = [rows](long m, long n) { return m + n * rows; };

  // Weighted stencil rows: ff with alpha^2, tf with sqrt(2) alpha beta (it
  // appears twice in the Frobenius norm), tt with beta^2.
  const auto k = hessian_kernels();
  const double a2 = params.alpha * params.alpha;
  const double b2 = params.beta * params.beta;
  const double ab = std::sqrt(2.0) * params.alpha * params.beta;
  std::vector<Triplet> stencil;
  long row = 0;
  for (long n = 0; n < pl.N; ++n) {
    for (long m = 0; m < pl.M; ++m) {
      const std::pair<const Eigen::Matrix3d*, double> parts[] = {{&k.ff, a2}, {&k.tf, ab}, {&k.tt, b2}};
      for (const auto& [kernel, weight] : parts) {
        for (int l = -1; l <= 1; ++l) {
          for (int kk = -1; kk <= 1; ++kk) {
            const double c = (*kernel)(l + 1, kk + 1);
            if (c != 0.0) stencil.emplace_back(row, var(m - l + 1, n - kk + 1), weight * c);
          }
        }
        ++row;
      }
    }
  }
  Eigen::SparseMatrix<double> D(row, unknowns);
  D.setFromTriplets(stencil.begin(), stencil.end());
  Eigen::SparseMatrix<double> normal = D.transpose() * D;

  std::vector<Triplet> extra;
  Eigen::VectorXd touched = Eigen::VectorXd::Zero(unknowns);
  for (int j = 0; j < D.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, j); it; ++it) touched[it.col()] = 1.0;
  for (const auto& c : pl.pilot_indices) {
    const long v = var(c.m + 1, c.n + 1);
    extra.emplace_back(v, v, params.omega);
    touched[v] = 1.0;
  }
  // Cells no stencil reaches are pinned to zero.
  for (long v = 0; v < unknowns; ++v)
    if (touched[v] == 0.0) extra.emplace_back(v, v, 1.0);
  Eigen::SparseMatrix<double> diag(unknowns, unknowns);
  diag.setFromTriplets(extra.begin(), extra.end());
  normal_ = normal + diag;
  normal_.makeCompressed();

  if (solver_ == SrhSolver::direct) {
    // The factorization gets a tiny ridge so it stays definite when pilots
    // are collinear; solve_extended refines against the unridged system.
    const double ridge = 1e-12 * normal_.diagonal().sum() / static_cast<double>(unknowns);
    Eigen::SparseMatrix<double> ridged = normal_;
    for (long v = 0; v < unknowns; ++v) ridged.coeffRef(v, v) += ridge;
    auto ldlt = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(ridged);
    if (ldlt->info() != Eigen::Success) throw SolverError("srh: sparse factorization failed");
    ldlt_ = std::move(ldlt);
  }
}

Frame SrhEstimator::solve_extended(const CVector& h_pilot) const {
  const auto& pl = placement_;
  if (h_pilot.size() != pl.pilot_count()) throw DimensionError("srh: pilot count mismatch");
  const long rows = pl.M + 2;
  const long unknowns = rows * (pl.N + 2);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(unknowns, 2);
  for (size_t s = 0; s < pl.pilot_indices.size(); ++s) {
    const auto& c = pl.pilot_indices[s];
    const long v = (c.m + 1) + (c.n + 1) * rows;
    rhs(v, 0) += params_.omega * h_pilot[static_cast<long>(s)].real();
    rhs(v, 1) += params_.omega * h_pilot[static_cast<long>(s)].imag();
  }
  Eigen::MatrixXd sol(unknowns, 2);
  if (solver_ == SrhSolver::direct) {
    sol = ldlt_->solve(rhs);
    if (ldlt_->info() != Eigen::Success) throw SolverError("srh: sparse solve failed");
    // The right-hand side has no component along the null space, so the
    // refinement only removes the ridge bias.
    const double target = 1e-14 * std::max(rhs.norm(), 1e-300);
    for (int step = 0; step < 8; ++step) {
      const Eigen::MatrixXd residual = rhs - normal_ * sol;
      if (residual.norm() <= target) break;
      sol += ldlt_->solve(residual);
    }
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-8);
    cg.setMaxIterations(static_cast<Eigen::Index>(10 * unknowns));
    cg.compute(normal_);
    for (int part = 0; part < 2; ++part) {
      sol.col(part) = cg.solve(rhs.col(part));
      if (cg.info() != Eigen::Success) {
        std::ostringstream err;
        err << "srh: conjugate gradient did not converge after " << cg.iterations()
            << " iterations (relative residual " << cg.error() << ")";
        throw SolverError(err.str());
      }
    }
  }
  Frame h_ex(rows, pl.N + 2);
  for (long v = 0; v < unknowns; ++v) h_ex(v % rows, v / rows) = cplx(sol(v, 0), sol(v, 1));
  return h_ex;
}

CMDEstimate SrhEstimator::estimate(const CVector& h_pilot) const {
  const Frame h_ex = solve_extended(h_pilot);
  CMDEstimate out;
  out.h_tilde = h_ex.block(1, 1, placement_.M, placement_.N);
  for (size_t s = 0; s < placement_.pilot_indices.size(); ++s) {
    const auto& c = placement_.pilot_indices[s];
    out.residual += std::norm(h_pilot[static_cast<long>(s)] - h_ex(c.m + 1, c.n + 1));
  }
  return out;
}

CMDEstimate srh_estimate(const CVector& h_pilot, const PilotPlacement& pl, const EstimatorConfig& cfg,
                         const PilotSequence* pilots) {
  if (cfg.variant == EstimatorVariant::lmmse) throw ConfigError("srh_estimate: variant is lmmse");
  const auto params = resolve_srh_parameters(cfg, pl.pilot_count(), pilots);
  return SrhEstimator(pl, params).estimate(h_pilot);
}

}  // namespace ddlf
