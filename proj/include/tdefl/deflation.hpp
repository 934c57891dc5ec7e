#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdefl/model.hpp"
#include "tdefl/tensor.hpp"

namespace tdefl {

struct PowerIterOptions {
  double tol = 1e-10;
  int max_iters = 1000;  // full sweeps over all modes
  int random_restarts = 0;  // extra random-init runs; best value kept
  std::uint64_t restart_seed = 0;
};

enum class PowerIterStatus { kConverged, kMaxIters, kDegenerate };

/// A singular pair estimate: value, unit vectors, and the worst per-mode
/// residual of the stationarity identities T(u.., ., ..u) = lambda u_l.
struct RankOnePair {
  double lambda = 0.0;
  VectorTuple vectors;
  double kkt_residual = 0.0;
  int iterations = 0;
  PowerIterStatus status = PowerIterStatus::kConverged;

  bool converged() const { return status == PowerIterStatus::kConverged; }
};

/// Per-mode leading left singular vectors of the unfoldings, sign-normalized
/// so the largest-magnitude entry is positive. Initialization for the power
/// method.
VectorTuple svd_init(const DenseTensor& t);

/// Cyclic power iteration u_l <- normalize(T(u.., ., ..u)) until the largest
/// per-mode update (after sign alignment) drops below tol. The contraction
/// value is non-decreasing across sweeps; the returned lambda is positive.
RankOnePair power_iteration(const DenseTensor& t, VectorTuple init,
                            const PowerIterOptions& opts = {});

/// Result of a sequential deflation run. Alignments are absolute values:
/// rho[l](i, j) = |<x_{i,l}, u_{j,l}>| (signal i vs step j, present only when
/// the truth was supplied), eta[l](i, j) = |<u_{i,l}, u_{j,l}>| with unit
/// diagonal.
struct DeflationRecord {
  std::vector<RankOnePair> steps;
  bool has_truth = false;
  std::vector<Eigen::MatrixXd> rho;  // per mode, r_truth x steps
  std::vector<Eigen::MatrixXd> eta;  // per mode, steps x steps
  std::uint64_t seed = 0;

  int num_steps() const { return static_cast<int>(steps.size()); }
  bool all_converged() const;
  /// Mean over modes of rho[.](i, j) / eta[.](i, j).
  double rho_avg(int i, int j) const;
  double eta_avg(int i, int j) const;

  std::string to_json_string() const;
  static DeflationRecord from_json_string(const std::string& text);
};

/// Runs num_steps rounds of: initialize on the current residual tensor,
/// power-iterate, subtract the rank-one estimate. Non-convergence at a step
/// is recorded on that step, not thrown.
DeflationRecord deflate(const DenseTensor& t1, int num_steps,
                        const SpikeSet* truth = nullptr,
                        const PowerIterOptions& opts = {});

}  // namespace tdefl
