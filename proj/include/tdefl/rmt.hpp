#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "tdefl/tensor.hpp"

namespace tdefl {

/// Tensor order and dimension fractions c_l = n_l / sum_m n_m.
struct SpectralParams {
  int d = 3;
  Eigen::VectorXd c;

  static SpectralParams equal_dims(int d);
  static SpectralParams from_dims(const std::vector<int>& dims);

  /// True when every c_l equals 1/d to within 1e-12 (closed form applies).
  bool is_equal_dims() const;
  void validate() const;
};

/// One evaluation of the limiting Stieltjes transform at a real point
/// outside the spectral support: g = sum_l g_l with per-mode quadratic
/// residuals g_l^2 - (g + z) g_l - c_l reported for verification.
struct StieltjesEval {
  double z = 0.0;
  double g = 0.0;
  Eigen::VectorXd g_per_mode;
  Eigen::VectorXd residuals;
};

/// Derived spectral quantities used by the asymptotic systems:
/// f = z + g, h_l = -c_l / g_l; in the equal-dims case also
/// h = -1/g (all h_l coincide) and q = z + g/d.
struct SpectralAux {
  double z = 0.0;
  double g = 0.0;
  double f = 0.0;
  Eigen::VectorXd g_per_mode;
  Eigen::VectorXd h_per_mode;
  bool equal_dims = false;
  double h = 0.0;  // valid when equal_dims
  double q = 0.0;  // valid when equal_dims
};

/// Closed-form Stieltjes transform of the limiting semicircle-type measure
/// for equal dimension fractions: g(z) = d(-z + sqrt(z^2 - 4(d-1)/d)) / (2(d-1))
/// for z above the right support edge, with the mirrored branch below the left
/// edge. Throws NumericalError for |z| strictly inside the support.
double stieltjes_closed_form(double z, int d);

/// Damped fixed-point solution of the coupled per-mode quadratics for
/// general dimension fractions. Start g = -1/z, damping 0.5, tolerance 1e-13,
/// at most 1e5 iterations; throws NumericalError when the iteration fails to
/// converge (z inside or too close to the support) or when two distinct
/// starting points reach different fixed points.
StieltjesEval stieltjes_fixed_point(double z, const SpectralParams& params);

/// Dispatcher: exact closed form for equal dims, fixed point otherwise.
StieltjesEval stieltjes_eval(double z, const SpectralParams& params);

/// f, h_l (and h, q in the equal-dims case) at a point outside the support.
SpectralAux spectral_aux(double z, const SpectralParams& params);

/// Support interval [left, right] of the limiting measure. Analytic
/// +-2 sqrt((d-1)/d) for equal dims; otherwise the right edge is located by
/// bisection on the convergence of the fixed-point iteration (resolution
/// 1e-8) and the support is symmetric.
std::pair<double, double> support_edge(const SpectralParams& params);

/// Stieltjes transform at complex z (Im z > 0), for density evaluation via
/// the inversion formula. Damped fixed point with the root branch chosen so
/// g_l ~ -c_l/z at infinity.
std::complex<double> stieltjes_complex(std::complex<double> z,
                                       const SpectralParams& params);

/// Limiting spectral density and CDF sampled on a uniform grid, obtained
/// from Im g(x + i*eps) / pi and trapezoidal integration.
struct DensityCurve {
  Eigen::VectorXd x;
  Eigen::VectorXd density;
  Eigen::VectorXd cdf;
};
DensityCurve limiting_density(const SpectralParams& params, double x_min,
                              double x_max, int n_points = 2000,
                              double eps = 1e-6);

/// Symmetric N x N block matrix associated to a tensor and d contraction
/// vectors: block (l, m), l < m, is the contraction of t on every mode
/// except l and m; diagonal blocks are zero; block (m, l) is the transpose.
Eigen::MatrixXd block_contraction_matrix(const DenseTensor& t,
                                         const VectorTuple& vectors);

/// Eigenvalues of a symmetric matrix, ascending.
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m);

/// (1/N) sum_k 1/(lambda_k - z). Throws NumericalError when z is within
/// 1e-8 of an eigenvalue.
double resolvent_trace(const Eigen::VectorXd& eigenvalues, double z);
double resolvent_trace(const Eigen::MatrixXd& m, double z);

}  // namespace tdefl
