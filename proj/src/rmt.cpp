#include "tdefl/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdefl/errors.hpp"

namespace tdefl {

namespace {

constexpr double kFixedPointTol = 1e-13;
constexpr int kFixedPointMaxIters = 100000;
constexpr double kResidualTol = 1e-12;

double edge_equal(int d) { return 2.0 * std::sqrt((d - 1.0) / d); }

// One damped fixed-point pass from a given start; returns false on
// non-convergence. Root branch: g_l < 0 above the right edge, g_l > 0
// below the left edge.
bool run_fixed_point(double z, const SpectralParams& params, double g0,
                     double* g_out, Eigen::VectorXd* g_modes) {
  const int d = params.d;
  const double sign = z > 0 ? -1.0 : 1.0;
  double g = g0;
  Eigen::VectorXd gl(d);
  for (int it = 0; it < kFixedPointMaxIters; ++it) {
    double sum = 0.0;
    for (int l = 0; l < d; ++l) {
      const double b = g + z;
      const double disc = b * b + 4.0 * params.c[l];
      gl[l] = 0.5 * (b + sign * std::sqrt(disc));
      sum += gl[l];
    }
    const double g_next = 0.5 * g + 0.5 * sum;
    if (std::abs(g_next - g) < kFixedPointTol) {
      *g_out = g_next;
      *g_modes = gl;
      return true;
    }
    g = g_next;
  }
  return false;
}

Eigen::VectorXd quadratic_residuals(double z, double g, const Eigen::VectorXd& gl,
                                    const SpectralParams& params) {
  Eigen::VectorXd res(params.d);
  for (int l = 0; l < params.d; ++l) {
    res[l] = gl[l] * gl[l] - (g + z) * gl[l] - params.c[l];
  }
  return res;
}

}  // namespace

SpectralParams SpectralParams::equal_dims(int d) {
  SpectralParams p;
  p.d = d;
  p.c = Eigen::VectorXd::Constant(d, 1.0 / d);
  return p;
}

SpectralParams SpectralParams::from_dims(const std::vector<int>& dims) {
  SpectralParams p;
  p.d = static_cast<int>(dims.size());
  p.c.resize(p.d);
  double total = 0.0;
  for (int n : dims) total += n;
  for (int l = 0; l < p.d; ++l) p.c[l] = dims[l] / total;
  p.validate();
  return p;
}

bool SpectralParams::is_equal_dims() const {
  for (int l = 0; l < d; ++l) {
    if (std::abs(c[l] - 1.0 / d) > 1e-12) return false;
  }
  return true;
}

void SpectralParams::validate() const {
  if (d < 2) throw std::invalid_argument("SpectralParams: order must be >= 2");
  if (c.size() != d) throw std::invalid_argument("SpectralParams: c has wrong length");
  double sum = 0.0;
  for (int l = 0; l < d; ++l) {
    if (c[l] <= 0.0 || c[l] >= 1.0) {
      throw std::invalid_argument("SpectralParams: c[" + std::to_string(l) +
                                  "] outside (0,1)");
    }
    sum += c[l];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("SpectralParams: fractions sum to " +
                                std::to_string(sum));
  }
}

double stieltjes_closed_form(double z, int d) {
  if (d < 2) throw std::invalid_argument("stieltjes_closed_form: d must be >= 2");
  const double edge2 = 4.0 * (d - 1.0) / d;
  double disc = z * z - edge2;
  if (disc < 0.0) {
    if (disc > -1e-14) {
      disc = 0.0;  // numerically at the edge
    } else {
      throw NumericalError("stieltjes_closed_form: z = " + std::to_string(z) +
                           " inside the spectral support");
    }
  }
  const double root = std::sqrt(disc);
  // Branch with g -> 0 at infinity: -sqrt above the support, +sqrt below.
  const double s = z > 0 ? root : -root;
  return d * (-z + s) / (2.0 * (d - 1.0));
}

StieltjesEval stieltjes_fixed_point(double z, const SpectralParams& params) {
  params.validate();
  if (z == 0.0) {
    throw NumericalError("stieltjes_fixed_point: z = 0 inside the support");
  }
  double g = 0.0;
  Eigen::VectorXd gl;
  if (!run_fixed_point(z, params, -1.0 / z, &g, &gl)) {
    throw NumericalError("stieltjes_fixed_point: no convergence at z = " +
                         std::to_string(z) + " (likely inside the support)");
  }
  // A second, distinct start guards against multiple attracting fixed points.
  double g2 = 0.0;
  Eigen::VectorXd gl2;
  if (run_fixed_point(z, params, -2.0 / z, &g2, &gl2) && std::abs(g2 - g) > 1e-9) {
    throw NumericalError("stieltjes_fixed_point: multiple fixed points at z = " +
                         std::to_string(z));
  }
  StieltjesEval eval;
  eval.z = z;
  eval.g = g;
  eval.g_per_mode = gl;
  eval.residuals = quadratic_residuals(z, g, gl, params);
  for (int l = 0; l < params.d; ++l) {
    if (std::abs(eval.residuals[l]) > kResidualTol) {
      throw NumericalError("stieltjes_fixed_point: residual " +
                           std::to_string(eval.residuals[l]) + " at mode " +
                           std::to_string(l));
    }
  }
  return eval;
}

StieltjesEval stieltjes_eval(double z, const SpectralParams& params) {
  if (!params.is_equal_dims()) return stieltjes_fixed_point(z, params);
  StieltjesEval eval;
  eval.z = z;
  eval.g = stieltjes_closed_form(z, params.d);
  eval.g_per_mode = Eigen::VectorXd::Constant(params.d, eval.g / params.d);
  eval.residuals = quadratic_residuals(z, eval.g, eval.g_per_mode, params);
  return eval;
}

SpectralAux spectral_aux(double z, const SpectralParams& params) {
  const StieltjesEval eval = stieltjes_eval(z, params);
  SpectralAux aux;
  aux.z = z;
  aux.g = eval.g;
  aux.f = z + eval.g;
  aux.g_per_mode = eval.g_per_mode;
  aux.h_per_mode.resize(params.d);
  for (int l = 0; l < params.d; ++l) {
    if (eval.g_per_mode[l] == 0.0) {
      throw NumericalError("spectral_aux: g_l = 0 at z = " + std::to_string(z));
    }
    aux.h_per_mode[l] = -params.c[l] / eval.g_per_mode[l];
  }
  aux.equal_dims = params.is_equal_dims();
  if (aux.equal_dims) {
    aux.h = -1.0 / eval.g;
    aux.q = z + eval.g / params.d;
  }
  return aux;
}

std::pair<double, double> support_edge(const SpectralParams& params) {
  params.validate();
  if (params.is_equal_dims()) {
    const double e = edge_equal(params.d);
    return {-e, e};
  }
  // Outside the support the real fixed point exists and converges with tiny
  // residual; inside there is no real solution. Bisect on that predicate.
  auto outside = [&params](double z) {
    double g = 0.0;
    Eigen::VectorXd gl;
    if (!run_fixed_point(z, params, -1.0 / z, &g, &gl)) return false;
    const Eigen::VectorXd res = quadratic_residuals(z, g, gl, params);
    return res.cwiseAbs().maxCoeff() < 1e-10;
  };
  double hi = 1.0;
  while (!outside(hi)) {
    hi *= 2.0;
    if (hi > 64.0) throw NumericalError("support_edge: no convergence region found");
  }
  double lo = hi / 2.0;
  if (outside(lo)) {
    // Shrink until lo is inside the support.
    while (lo > 1e-6 && outside(lo)) lo /= 2.0;
  }
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (outside(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double right = 0.5 * (lo + hi);
  return {-right, right};
}

std::complex<double> stieltjes_complex(std::complex<double> z,
                                       const SpectralParams& params) {
  params.validate();
  using C = std::complex<double>;
  C g = -1.0 / z;
  for (int it = 0; it < kFixedPointMaxIters; ++it) {
    C sum = 0.0;
    for (int l = 0; l < params.d; ++l) {
      const C b = g + z;
      C s = std::sqrt(b * b + 4.0 * params.c[l]);
      // Pick the square root aligned with b so the small root -c_l/b is taken.
      if (std::real(s * std::conj(b)) < 0.0) s = -s;
      sum += 0.5 * (b - s);
    }
    const C g_next = 0.5 * g + 0.5 * sum;
    if (std::abs(g_next - g) < kFixedPointTol) return g_next;
    g = g_next;
  }
  throw NumericalError("stieltjes_complex: no convergence at z = (" +
                       std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                       ")");
}

DensityCurve limiting_density(const SpectralParams& params, double x_min,
                              double x_max, int n_points, double eps) {
  if (n_points < 2) throw std::invalid_argument("limiting_density: n_points < 2");
  DensityCurve curve;
  curve.x.resize(n_points);
  curve.density.resize(n_points);
  curve.cdf.resize(n_points);
  const double step = (x_max - x_min) / (n_points - 1);
  constexpr double kPi = 3.14159265358979323846;
  for (int i = 0; i < n_points; ++i) {
    const double x = x_min + i * step;
    curve.x[i] = x;
    const std::complex<double> g = stieltjes_complex({x, eps}, params);
    curve.density[i] = std::max(0.0, g.imag() / kPi);
  }
  curve.cdf[0] = 0.0;
  for (int i = 1; i < n_points; ++i) {
    curve.cdf[i] =
        curve.cdf[i - 1] + 0.5 * (curve.density[i] + curve.density[i - 1]) * step;
  }
  return curve;
}

Eigen::MatrixXd block_contraction_matrix(const DenseTensor& t,
                                         const VectorTuple& vectors) {
  const int d = t.order();
  if (d < 3) {
    throw std::invalid_argument("block_contraction_matrix: order must be >= 3");
  }
  const auto& shape = t.shape();
  int total = 0;
  std::vector<int> offsets(d);
  for (int l = 0; l < d; ++l) {
    offsets[l] = total;
    total += shape[l];
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(total, total);
  for (int l = 0; l < d; ++l) {
    for (int k = l + 1; k < d; ++k) {
      const Eigen::MatrixXd block = contract_two_holes(t, vectors, l, k);
      m.block(offsets[l], offsets[k], shape[l], shape[k]) = block;
      m.block(offsets[k], offsets[l], shape[k], shape[l]) = block.transpose();
    }
  }
  return m;
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eigenvalues: eigendecomposition failed");
  }
  return solver.eigenvalues();
}

double resolvent_trace(const Eigen::VectorXd& eigenvalues, double z) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n == 0) throw std::invalid_argument("resolvent_trace: empty spectrum");
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double gap = eigenvalues[k] - z;
    if (std::abs(gap) < 1e-8) {
      throw NumericalError("resolvent_trace: z within 1e-8 of eigenvalue " +
                           std::to_string(eigenvalues[k]));
    }
    acc += 1.0 / gap;
  }
  return acc / n;
}

double resolvent_trace(const Eigen::MatrixXd& m, double z) {
  return resolvent_trace(sym_eigenvalues(m), z);
}

}  // namespace tdefl
