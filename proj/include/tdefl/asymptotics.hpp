#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "tdefl/model.hpp"
#include "tdefl/rmt.hpp"

namespace tdefl {

/// Candidate solution of the deflation limit system: limiting singular
/// values, signal/estimate alignments rho[l](i, j) = lim |<x_{i,l}, u_{j,l}>|
/// and estimate/estimate alignments eta[l](i, j) = lim |<u_{i,l}, u_{j,l}>|
/// (symmetric, unit diagonal).
struct AsymptoticState {
  Eigen::VectorXd lambdas;
  std::vector<Eigen::MatrixXd> rho;
  std::vector<Eigen::MatrixXd> eta;
  double residual_inf = std::numeric_limits<double>::infinity();
  int label = 0;

  double rho_avg(int i, int j) const;
  double eta_avg(int i, int j) const;
};

/// Model-side data the limit system is parameterized by.
struct SystemSpec {
  int r = 1;
  int d = 3;
  Eigen::VectorXd betas;
  std::vector<Eigen::MatrixXd> alphas;  // per mode, r x r, unit diagonal
  SpectralParams spectral;

  static SystemSpec make(int r, int d, const Eigen::VectorXd& betas, double alpha);
  static SystemSpec from_model(const ModelParams& params);

  /// r + d r^2 + d r (r-1) / 2; the system is square by construction.
  int unknown_count() const;
  void validate() const;
  /// True when the 7-equation reduced system applies (r=2, d=3, equal dims,
  /// one common off-diagonal correlation across pairs and modes).
  bool reduced_form_applies() const;
  double common_alpha() const;
};

/// Equation residuals of the limit system, in a fixed documented order:
///   block A (one per step i):
///     f(l_i) + sum_{k<i} l_k prod_l eta_l(k,i) - sum_k b_k prod_l rho_l(k,i)
///   block B (per mode l, step i, signal j):
///     h_l(l_i) rho_l(j,i) + sum_{k<i} l_k rho_l(j,k) prod_{m!=l} eta_m(k,i)
///       - sum_k b_k alpha_l(k,j) prod_{m!=l} rho_m(k,i)
///   block C (per mode l, step i, earlier step j < i):
///     h_l(l_i) eta_l(j,i) + g_l(l_j) prod_{m!=l} eta_m(j,i)
///       + sum_{k<i} l_k eta_l(k,j) prod_{m!=l} eta_m(k,i)
///       - sum_k b_k rho_l(k,j) prod_{m!=l} rho_m(k,i)
/// Iteration order: A by i; B by (l, i, j); C by (l, i, j).
Eigen::VectorXd system_residual(const AsymptoticState& state, const SystemSpec& spec);

/// Independent straight-line re-evaluation of the same equations (no shared
/// helpers or cached spectral values); used to re-verify accepted solutions.
Eigen::VectorXd system_residual_reference(const AsymptoticState& state,
                                          const SystemSpec& spec);

/// The reduced 7-equation system for two deflation steps on an order-3
/// tensor with equal dimensions. Arguments: (l1, l2, eta), (b1, b2, alpha),
/// (rho11, rho12, rho21, rho22); rho_ij aligns signal i with step j.
Eigen::VectorXd rank2_residual(const Eigen::Vector3d& lambdas_eta,
                               const Eigen::Vector3d& betas,
                               const Eigen::Vector4d& rhos);

/// Packing of the unknowns (lambdas, then rho by (signal, step, mode), then
/// eta by pair (i<j) and mode).
Eigen::VectorXd pack_state(const AsymptoticState& state, const SystemSpec& spec);
AsymptoticState unpack_state(const Eigen::VectorXd& x, const SystemSpec& spec);

struct NewtonOptions {
  double tol = 1e-12;       // convergence: residual infinity norm
  int max_iters = 200;
  double fd_step = 1e-7;    // central differences, scaled by max(1, |x_j|)
  int max_backtracks = 30;  // step halvings per iteration
};

struct NewtonResult {
  Eigen::VectorXd x;
  double residual_inf = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::string failure;
};

/// Damped Newton with finite-difference Jacobian and residual-norm
/// backtracking. `project` (optional) clamps iterates into the admissible
/// region before every evaluation.
NewtonResult newton_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
                          Eigen::VectorXd x0, const NewtonOptions& opts = {},
                          const std::function<void(Eigen::VectorXd&)>& project = {});

struct MultiStartOptions {
  int num_starts = 100;
  NewtonOptions newton;
  double accept_residual = 1e-10;  // re-verification bound on accepted states
  double dedup_tol = 1e-6;
};

/// Newton from random starts, keeping converged solutions with all
/// alignments in [0, 1] and every lambda above the right support edge.
/// De-duplicated, re-verified through an independent evaluation, and labeled
/// (for two steps: label 1 = highest rho_12, i.e. highest signal-1/step-2
/// alignment). Deterministic given the seed.
std::vector<AsymptoticState> multi_start_solve(const SystemSpec& spec,
                                               std::uint64_t seed,
                                               const MultiStartOptions& opts = {});

/// One admissible parameter estimate recovered from measured deflation
/// outputs (two steps, order 3, equal dimensions).
struct SnrEstimate {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double alpha = 0.0;
  Eigen::Vector4d rho = Eigen::Vector4d::Zero();  // rho11, rho12, rho21, rho22
  double residual_inf = std::numeric_limits<double>::infinity();
};

/// Solves the reduced system for (beta1, beta2, alpha, rho..) with
/// (lambda1, lambda2, eta) fixed to measurements. Returns every admissible
/// solution (beta >= 0, alpha and rho in [0, 1]) with its residual.
std::vector<SnrEstimate> estimate_snr(double lambda1, double lambda2, double eta,
                                      std::uint64_t seed,
                                      const MultiStartOptions& opts = {});

}  // namespace tdefl
