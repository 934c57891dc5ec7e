#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace tdefl {

/// One vector per tensor mode; vector l has length n_l.
using VectorTuple = std::vector<Eigen::VectorXd>;

/// Dense order-d tensor over doubles, flat row-major storage:
/// entry (p_1, ..., p_d) (0-based) lives at offset
/// ((p_1 * n_2 + p_2) * n_3 + ...) + p_d, i.e. mode 1 varies slowest and
/// mode d fastest. All algorithms in this library assume this layout.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<int> shape);
  DenseTensor(std::vector<int> shape, std::vector<double> data);

  int order() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Bounds-checked element access, mostly for tests and small oracles.
  double& at(const std::vector<int>& idx);
  double at(const std::vector<int>& idx) const;

  double frobenius_norm() const;

  /// *this += a * x. Shapes must match.
  DenseTensor& add_scaled(double a, const DenseTensor& x);
  DenseTensor& operator*=(double s);

 private:
  std::size_t offset(const std::vector<int>& idx) const;

  std::vector<int> shape_;
  std::vector<double> data_;
};

/// weight * v_1 (x) v_2 (x) ... (x) v_d. Entry (p_1..p_d) equals
/// weight * prod_l v_l[p_l].
DenseTensor outer_product(const VectorTuple& vectors, double weight);

/// Full contraction T(v_1, ..., v_d) = sum T_{p_1..p_d} prod_l v_l[p_l].
double contract_full(const DenseTensor& t, const VectorTuple& vectors);

/// Contraction on every mode except `hole` (0-based); the entry of
/// `vectors` at position `hole` is ignored. Component p of the result is
/// the full contraction with the p-th canonical basis vector at that mode.
Eigen::VectorXd contract_partial(const DenseTensor& t, const VectorTuple& vectors,
                                 int hole);

/// Contraction on every mode except the two holes a < b. Entry (p, q) is
/// the full contraction with e_p at mode a and e_q at mode b.
Eigen::MatrixXd contract_two_holes(const DenseTensor& t, const VectorTuple& vectors,
                                   int hole_a, int hole_b);

/// Elementwise inner product <T, S>.
double inner(const DenseTensor& a, const DenseTensor& b);

/// Mode-`mode` unfolding: n_mode x prod_{m != mode} n_m. Row p collects all
/// entries with index p at `mode`; columns run over the remaining modes in
/// row-major order (mode index increasing, later modes fastest).
Eigen::MatrixXd unfold(const DenseTensor& t, int mode);

/// Inverse of unfold for the same mode and shape.
DenseTensor fold(const Eigen::MatrixXd& m, const std::vector<int>& shape, int mode);

}  // namespace tdefl
