#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tdefl/tensor.hpp"

namespace tdefl {

/// Parameters of the rank-r order-d spiked tensor model
/// T = sum_i beta_i x_{i,1} (x) ... (x) x_{i,d} + W / sqrt(N), N = sum_l n_l.
struct ModelParams {
  int r = 1;
  int d = 3;
  std::vector<int> dims;            // n_1..n_d
  Eigen::VectorXd betas;            // r signal-to-noise weights, >= 0
  std::vector<Eigen::MatrixXd> alphas;  // per-mode r x r correlation targets,
                                        // unit diagonal, entries in [0, 1]
  std::uint64_t seed = 0;

  /// Same correlation target alpha for every off-diagonal pair and mode.
  static std::vector<Eigen::MatrixXd> uniform_alpha(int r, int d, double alpha);

  int total_dim() const;  // N
  void validate() const;
};

/// The planted component: weights plus r unit-vector tuples with the
/// realized per-mode Gram matrices of their inner products.
struct SpikeSet {
  Eigen::VectorXd weights;
  std::vector<VectorTuple> components;       // components[i][l] in R^{n_l}
  std::vector<Eigen::MatrixXd> realized_gram;  // per mode, r x r
};

/// Draws r unit vectors per mode whose Gram matrix equals the target
/// exactly: r i.i.d. Gaussian vectors are orthonormalized, then mixed by a
/// factor A with A A^T = target (Cholesky when positive definite, symmetric
/// square root on the semidefinite boundary). Deterministic given the seed.
SpikeSet generate_correlated_spikes(const ModelParams& params);

/// i.i.d. standard Gaussian entries, deterministic per seed.
DenseTensor sample_noise(const std::vector<int>& dims, std::uint64_t seed);

/// sum_i beta_i outer(x_i) + noise / sqrt(N).
DenseTensor assemble_model(const SpikeSet& spikes, const DenseTensor& noise);

/// Convenience pipeline: spikes from the params seed, noise from a derived
/// sub-seed, assembled model.
struct GeneratedModel {
  SpikeSet spikes;
  DenseTensor tensor;
};
GeneratedModel generate_model(const ModelParams& params);

/// Raw binary tensor file: magic "SPKT", u32 version, u32 order, u32 dims[d],
/// then the flat row-major payload as little-endian IEEE f64.
void write_model(const std::string& path, const DenseTensor& t);
DenseTensor read_model(const std::string& path);

}  // namespace tdefl
