#include "tdefl/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tdefl {

namespace {

std::size_t checked_size(const std::vector<int>& shape) {
  if (shape.size() < 2) {
    throw std::invalid_argument("DenseTensor: order must be at least 2, got " +
                                std::to_string(shape.size()));
  }
  std::size_t n = 1;
  for (int s : shape) {
    if (s <= 0) {
      throw std::invalid_argument("DenseTensor: non-positive dimension " +
                                  std::to_string(s));
    }
    n *= static_cast<std::size_t>(s);
  }
  return n;
}

void check_vector_sizes(const DenseTensor& t, const VectorTuple& vectors,
                        int skip_a, int skip_b, const char* who) {
  const auto& shape = t.shape();
  if (static_cast<int>(vectors.size()) != t.order()) {
    throw std::invalid_argument(std::string(who) + ": expected " +
                                std::to_string(t.order()) + " vectors, got " +
                                std::to_string(vectors.size()));
  }
  for (int m = 0; m < t.order(); ++m) {
    if (m == skip_a || m == skip_b) continue;
    if (vectors[m].size() != shape[m]) {
      throw std::invalid_argument(std::string(who) + ": vector at mode " +
                                  std::to_string(m) + " has length " +
                                  std::to_string(vectors[m].size()) +
                                  ", tensor dimension is " + std::to_string(shape[m]));
    }
  }
}

// out[i] = sum_j buf[i*n + j] * v[j]; contracts the trailing (fastest) mode.
void reduce_trailing(std::vector<double>& buf, std::size_t rows, int n,
                     const Eigen::VectorXd& v) {
  const double* in = buf.data();
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    const double* row = in + i * static_cast<std::size_t>(n);
    for (int j = 0; j < n; ++j) acc += row[j] * v[j];
    buf[i] = acc;
  }
  buf.resize(rows);
}

// out[j] = sum_i v[i] * buf[i*rest + j]; contracts the leading (slowest) mode.
void reduce_leading(std::vector<double>& buf, int n, std::size_t rest,
                    const Eigen::VectorXd& v) {
  std::vector<double> out(rest, 0.0);
  for (int i = 0; i < n; ++i) {
    const double w = v[i];
    const double* row = buf.data() + static_cast<std::size_t>(i) * rest;
    for (std::size_t j = 0; j < rest; ++j) out[j] += w * row[j];
  }
  buf = std::move(out);
}

// Contracts an interior mode: buf viewed as (outer, n, inner).
void reduce_middle(std::vector<double>& buf, std::size_t outer, int n,
                   std::size_t inner, const Eigen::VectorXd& v) {
  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    double* dst = out.data() + o * inner;
    for (int j = 0; j < n; ++j) {
      const double w = v[j];
      const double* src = buf.data() + (o * static_cast<std::size_t>(n) + j) * inner;
      for (std::size_t k = 0; k < inner; ++k) dst[k] += w * src[k];
    }
  }
  buf = std::move(out);
}

}  // namespace

DenseTensor::DenseTensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

DenseTensor::DenseTensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_size(shape_) != data_.size()) {
    throw std::invalid_argument("DenseTensor: data length " +
                                std::to_string(data_.size()) +
                                " does not match shape product");
  }
}

std::size_t DenseTensor::offset(const std::vector<int>& idx) const {
  if (idx.size() != shape_.size()) {
    throw std::invalid_argument("DenseTensor::at: wrong index arity");
  }
  std::size_t off = 0;
  for (std::size_t m = 0; m < shape_.size(); ++m) {
    if (idx[m] < 0 || idx[m] >= shape_[m]) {
      throw std::out_of_range("DenseTensor::at: index out of range at mode " +
                              std::to_string(m));
    }
    off = off * static_cast<std::size_t>(shape_[m]) + static_cast<std::size_t>(idx[m]);
  }
  return off;
}

double& DenseTensor::at(const std::vector<int>& idx) { return data_[offset(idx)]; }
double DenseTensor::at(const std::vector<int>& idx) const { return data_[offset(idx)]; }

double DenseTensor::frobenius_norm() const {
  double acc = 0.0;
  for (double x : data_) acc += x * x;
  return std::sqrt(acc);
}

DenseTensor& DenseTensor::add_scaled(double a, const DenseTensor& x) {
  if (x.shape_ != shape_) {
    throw std::invalid_argument("DenseTensor::add_scaled: shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

DenseTensor outer_product(const VectorTuple& vectors, double weight) {
  if (vectors.size() < 2) {
    throw std::invalid_argument("outer_product: need at least 2 vectors");
  }
  std::vector<int> shape;
  shape.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.size() == 0) throw std::invalid_argument("outer_product: zero-length vector");
    shape.push_back(static_cast<int>(v.size()));
  }
  // Grow mode by mode; mode d ends up fastest, matching the layout.
  std::vector<double> buf{weight};
  for (const auto& v : vectors) {
    const int n = static_cast<int>(v.size());
    std::vector<double> next(buf.size() * static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < buf.size(); ++i) {
      for (int p = 0; p < n; ++p) {
        next[i * static_cast<std::size_t>(n) + p] = buf[i] * v[p];
      }
    }
    buf = std::move(next);
  }
  return DenseTensor(std::move(shape), std::move(buf));
}

double contract_full(const DenseTensor& t, const VectorTuple& vectors) {
  check_vector_sizes(t, vectors, -1, -1, "contract_full");
  std::vector<double> buf(t.values());
  std::size_t rows = t.size();
  for (int m = t.order() - 1; m >= 0; --m) {
    const int n = t.shape()[m];
    rows /= static_cast<std::size_t>(n);
    reduce_trailing(buf, rows, n, vectors[m]);
  }
  return buf[0];
}

Eigen::VectorXd contract_partial(const DenseTensor& t, const VectorTuple& vectors,
                                 int hole) {
  if (hole < 0 || hole >= t.order()) {
    throw std::invalid_argument("contract_partial: hole index " +
                                std::to_string(hole) + " out of range");
  }
  check_vector_sizes(t, vectors, hole, -1, "contract_partial");
  std::vector<double> buf(t.values());
  std::size_t total = t.size();
  for (int m = t.order() - 1; m > hole; --m) {
    const int n = t.shape()[m];
    total /= static_cast<std::size_t>(n);
    reduce_trailing(buf, total, n, vectors[m]);
  }
  for (int m = 0; m < hole; ++m) {
    const int n = t.shape()[m];
    total /= static_cast<std::size_t>(n);
    reduce_leading(buf, n, total, vectors[m]);
  }
  return Eigen::Map<const Eigen::VectorXd>(buf.data(), t.shape()[hole]);
}

Eigen::MatrixXd contract_two_holes(const DenseTensor& t, const VectorTuple& vectors,
                                   int hole_a, int hole_b) {
  const int d = t.order();
  if (d < 3) throw std::invalid_argument("contract_two_holes: order must be >= 3");
  if (hole_a == hole_b) {
    throw std::invalid_argument("contract_two_holes: holes must be distinct");
  }
  if (hole_a > hole_b) std::swap(hole_a, hole_b);
  if (hole_a < 0 || hole_b >= d) {
    throw std::invalid_argument("contract_two_holes: hole index out of range");
  }
  check_vector_sizes(t, vectors, hole_a, hole_b, "contract_two_holes");

  std::vector<double> buf(t.values());
  std::size_t total = t.size();
  for (int m = d - 1; m > hole_b; --m) {
    const int n = t.shape()[m];
    total /= static_cast<std::size_t>(n);
    reduce_trailing(buf, total, n, vectors[m]);
  }
  for (int m = 0; m < hole_a; ++m) {
    const int n = t.shape()[m];
    total /= static_cast<std::size_t>(n);
    reduce_leading(buf, n, total, vectors[m]);
  }
  // Remaining modes hole_a..hole_b; contract interior ones, rightmost first,
  // so the inner stride stays n_{hole_b}.
  const std::size_t inner = static_cast<std::size_t>(t.shape()[hole_b]);
  for (int m = hole_b - 1; m > hole_a; --m) {
    const int n = t.shape()[m];
    std::size_t outer = static_cast<std::size_t>(t.shape()[hole_a]);
    for (int k = hole_a + 1; k < m; ++k) outer *= static_cast<std::size_t>(t.shape()[k]);
    reduce_middle(buf, outer, n, inner, vectors[m]);
  }
  const int rows = t.shape()[hole_a];
  const int cols = t.shape()[hole_b];
  Eigen::MatrixXd out(rows, cols);
  for (int p = 0; p < rows; ++p) {
    for (int q = 0; q < cols; ++q) {
      out(p, q) = buf[static_cast<std::size_t>(p) * cols + q];
    }
  }
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("inner: shape mismatch");
  }
  double acc = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) acc += pa[i] * pb[i];
  return acc;
}

Eigen::MatrixXd unfold(const DenseTensor& t, int mode) {
  const int d = t.order();
  if (mode < 0 || mode >= d) {
    throw std::invalid_argument("unfold: mode " + std::to_string(mode) +
                                " out of range");
  }
  const auto& shape = t.shape();
  std::size_t lead = 1, trail = 1;
  for (int m = 0; m < mode; ++m) lead *= static_cast<std::size_t>(shape[m]);
  for (int m = mode + 1; m < d; ++m) trail *= static_cast<std::size_t>(shape[m]);
  const int n = shape[mode];
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(lead * trail));
  const double* src = t.data();
  for (std::size_t o = 0; o < lead; ++o) {
    for (int p = 0; p < n; ++p) {
      const double* row = src + (o * static_cast<std::size_t>(n) + p) * trail;
      for (std::size_t s = 0; s < trail; ++s) {
        out(p, static_cast<Eigen::Index>(o * trail + s)) = row[s];
      }
    }
  }
  return out;
}

DenseTensor fold(const Eigen::MatrixXd& m, const std::vector<int>& shape, int mode) {
  const int d = static_cast<int>(shape.size());
  if (mode < 0 || mode >= d) {
    throw std::invalid_argument("fold: mode out of range");
  }
  std::size_t lead = 1, trail = 1;
  for (int k = 0; k < mode; ++k) lead *= static_cast<std::size_t>(shape[k]);
  for (int k = mode + 1; k < d; ++k) trail *= static_cast<std::size_t>(shape[k]);
  const int n = shape[mode];
  if (m.rows() != n || m.cols() != static_cast<Eigen::Index>(lead * trail)) {
    throw std::invalid_argument("fold: matrix size does not match target shape");
  }
  DenseTensor out(shape);
  double* dst = out.data();
  for (std::size_t o = 0; o < lead; ++o) {
    for (int p = 0; p < n; ++p) {
      double* row = dst + (o * static_cast<std::size_t>(n) + p) * trail;
      for (std::size_t s = 0; s < trail; ++s) {
        row[s] = m(p, static_cast<Eigen::Index>(o * trail + s));
      }
    }
  }
  return out;
}

}  // namespace tdefl
