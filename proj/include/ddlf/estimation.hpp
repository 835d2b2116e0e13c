#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ddlf/grid.hpp"
#include "ddlf/piloting.hpp"
#include "ddlf/types.hpp"

namespace ddlf {

// Delay-Doppler support used by the LMMSE estimator: Doppler bins -Q..Q and
// delay bins -Wn..W (physical delay, so delay bin d sits at DD column -d).
struct ReconstructionGrid {
  int Q = 1;
  int W = 1;
  int Wn = 1;

  int size() const { return (2 * Q + 1) * (W + Wn + 1); }
  void validate(const GaborGrid& grid) const;
};

// Q = floor(nu_max T N) + margin, W = floor(tau_max F M) + margin, Wn = margin,
// clamped to the frame.
ReconstructionGrid reconstruction_grid_for(double tau_max, double nu_max, const GaborGrid& grid, int margin = 1);

enum class EstimatorVariant { lmmse, srh, srh_na, srh_ma, srh_mna };

std::string_view to_string(EstimatorVariant v);
EstimatorVariant parse_estimator_variant(std::string_view name);

struct EstimatorConfig {
  EstimatorVariant variant = EstimatorVariant::srh_mna;
  // Mode weights (used by srh_ma and srh_mna).
  double alpha = 1.0;
  double beta = 1.0;
  double sigma2 = 0.0;
  double sigma_z2 = 0.0;
  // Tikhonov weight for srh and srh_ma; <= 0 selects 1 / P.
  double omega = 0.0;
  ReconstructionGrid grid_k;
};

struct CMDEstimate {
  Frame h_tilde;
  double residual = 0.0;  // data-fidelity term at the solution
};

// h_pilot[s] = q[s] / p[s]. Throws PilotError on a zero pilot.
CVector partial_cmd(const CVector& q, const PilotSequence& p);

// delta = (sigma2 + sigma_z2) sum_s |p_s|^-2
double relaxation_delta(double sigma2, double sigma_z2, const PilotSequence& p);

// ---------------------------------------------------------------------------
// LMMSE on the reconstruction grid

// P x |K| dictionary linking the reconstruction grid to the pilot cells,
// entries exp(-2 pi j (n l / N - m k / M)) / sqrt(N M).
Eigen::MatrixXcd lmmse_dictionary(const std::vector<CellIndex>& cells, int M, int N,
                                  const ReconstructionGrid& grid_k);

// Precomputed linear map h_pilot -> h_tilde for one placement, grid and noise
// variance.
class LmmseEstimator {
 public:
  LmmseEstimator(const PilotPlacement& pl, const ReconstructionGrid& grid_k, double sigma2);

  CMDEstimate estimate(const CVector& h_pilot) const;

  // More unknowns than pilots; the solution then relies on sigma2.
  bool underdetermined() const { return underdetermined_; }

 private:
  int M_ = 0;
  int N_ = 0;
  Eigen::MatrixXcd pilot_dictionary_;  // P x |K|
  Eigen::MatrixXcd solve_;             // |K| x P
  Eigen::MatrixXcd synthesis_;         // MN x |K|
  bool underdetermined_ = false;
};

CMDEstimate lmmse_estimate(const CVector& h_pilot, const PilotPlacement& pl, const EstimatorConfig& cfg);

// ---------------------------------------------------------------------------
// Smoothness-regularized Hessian estimator

struct HessianKernels {
  Eigen::Matrix3d tt;
  Eigen::Matrix3d ff;
  Eigen::Matrix3d tf;
};

HessianKernels hessian_kernels();

// Valid part of the 2D convolution with a 3x3 kernel:
//   out(m, n) = sum_{l,k in -1..1} E(m - l + 1, n - k + 1) kernel(l + 1, k + 1)
// giving a (rows - 2) x (cols - 2) array.
Frame valid_convolution(const Frame& E, const Eigen::Matrix3d& kernel);

// sum over the M x N valid cells of the squared Frobenius norm of
// [[a^2 E*ff, a b E*tf], [a b E*tf, b^2 E*tt]].
double weighted_hessian_energy(const Frame& h_ex, double alpha, double beta);

// weighted_hessian_energy + omega sum_s |h_pilot_s - h_ex(pilot_s + (1, 1))|^2
double srh_objective(const Frame& h_ex, const CVector& h_pilot, const PilotPlacement& pl, double alpha,
                     double beta, double omega);

struct SrhParameters {
  double alpha = 1.0;
  double beta = 1.0;
  double omega = 1.0;
};

// Resolves the variant semantics: srh uses alpha = beta = 1 and the default
// omega, _ma variants take alpha and beta from cfg, _na variants use
// omega = 1 / delta (capped at 1e8). `pilots` gives sum |p|^-2; without it
// unit-energy pilots are assumed.
SrhParameters resolve_srh_parameters(const EstimatorConfig& cfg, int pilot_count,
                                     const PilotSequence* pilots = nullptr);

// Mode weights from the spread bounds: alpha / beta = (T nu_max) / (F tau_max)
// with alpha beta = 1. The ratio is clamped to [1e-3, 1e3].
std::pair<double, double> mode_weights(double tau_max, double nu_max, const GaborGrid& grid);

enum class SrhSolver { direct, conjugate_gradient };

// Normal equations of the Tikhonov problem for one placement and parameter
// set, factorized once. Unknowns are the (M + 2) x (N + 2) extended CMD.
class SrhEstimator {
 public:
  SrhEstimator(const PilotPlacement& pl, const SrhParameters& params, SrhSolver solver = SrhSolver::direct);

  CMDEstimate estimate(const CVector& h_pilot) const;

  // Full extended solution, (M + 2) x (N + 2).
  Frame solve_extended(const CVector& h_pilot) const;

  const SrhParameters& parameters() const { return params_; }

 private:
  PilotPlacement placement_;
  SrhParameters params_;
  SrhSolver solver_;
  Eigen::SparseMatrix<double> normal_;
  std::shared_ptr<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

CMDEstimate srh_estimate(const CVector& h_pilot, const PilotPlacement& pl, const EstimatorConfig& cfg,
                         const PilotSequence* pilots = nullptr);

}  // namespace ddlf
