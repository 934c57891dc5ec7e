#include "tdefl/deflation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tdefl/errors.hpp"
#include "tdefl/rng.hpp"

namespace tdefl {

namespace {

void check_unit(const VectorTuple& vectors, const char* who) {
  for (std::size_t l = 0; l < vectors.size(); ++l) {
    if (std::abs(vectors[l].norm() - 1.0) > 1e-12) {
      throw std::invalid_argument(std::string(who) + ": vector at mode " +
                                  std::to_string(l) + " is not unit norm");
    }
  }
}

double kkt_residual_of(const DenseTensor& t, const VectorTuple& vectors,
                       double lambda) {
  double worst = 0.0;
  for (int l = 0; l < t.order(); ++l) {
    const Eigen::VectorXd w = contract_partial(t, vectors, l);
    worst = std::max(worst, (w - lambda * vectors[l]).norm());
  }
  return worst;
}

VectorTuple random_unit_tuple(const std::vector<int>& dims, std::uint64_t seed) {
  GaussianStream gauss(seed);
  VectorTuple tuple(dims.size());
  for (std::size_t l = 0; l < dims.size(); ++l) {
    Eigen::VectorXd v(dims[l]);
    for (int p = 0; p < dims[l]; ++p) v[p] = gauss.next();
    tuple[l] = v / v.norm();
  }
  return tuple;
}

}  // namespace

VectorTuple svd_init(const DenseTensor& t) {
  if (t.frobenius_norm() == 0.0) {
    throw NumericalError("svd_init: zero tensor");
  }
  VectorTuple init(t.order());
  for (int l = 0; l < t.order(); ++l) {
    const Eigen::MatrixXd u = unfold(t, l);
    // Leading left singular vector via the small n_l x n_l Gram matrix.
    const Eigen::MatrixXd gram = u * u.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) {
      throw NumericalError("svd_init: eigendecomposition failed at mode " +
                           std::to_string(l));
    }
    Eigen::VectorXd v = es.eigenvectors().col(gram.rows() - 1);
    int arg_max = 0;
    v.cwiseAbs().maxCoeff(&arg_max);
    if (v[arg_max] < 0.0) v = -v;
    init[l] = v.normalized();
  }
  return init;
}

RankOnePair power_iteration(const DenseTensor& t, VectorTuple init,
                            const PowerIterOptions& opts) {
  if (opts.tol <= 0.0) throw std::invalid_argument("power_iteration: tol must be > 0");
  if (static_cast<int>(init.size()) != t.order()) {
    throw std::invalid_argument("power_iteration: init arity mismatch");
  }
  check_unit(init, "power_iteration");

  RankOnePair pair;
  pair.vectors = std::move(init);
  pair.status = PowerIterStatus::kMaxIters;

  double objective = contract_full(t, pair.vectors);
  for (int sweep = 1; sweep <= opts.max_iters; ++sweep) {
    double max_diff = 0.0;
    for (int l = 0; l < t.order(); ++l) {
      const Eigen::VectorXd w = contract_partial(t, pair.vectors, l);
      const double norm = w.norm();
      if (norm < 1e-300) {
        pair.status = PowerIterStatus::kDegenerate;
        pair.iterations = sweep;
        pair.lambda = 0.0;
        pair.kkt_residual = kkt_residual_of(t, pair.vectors, 0.0);
        return pair;
      }
      const Eigen::VectorXd next = w / norm;
      const double diff =
          std::min((next - pair.vectors[l]).norm(), (next + pair.vectors[l]).norm());
      max_diff = std::max(max_diff, diff);
      pair.vectors[l] = next;
    }
    const double new_objective = contract_full(t, pair.vectors);
    if (new_objective + 1e-10 * std::max(1.0, std::abs(new_objective)) < objective) {
      throw NumericalError("power_iteration: contraction value decreased from " +
                           std::to_string(objective) + " to " +
                           std::to_string(new_objective));
    }
    objective = new_objective;
    pair.iterations = sweep;
    if (max_diff < opts.tol) {
      pair.status = PowerIterStatus::kConverged;
      break;
    }
  }

  pair.lambda = contract_full(t, pair.vectors);
  if (pair.lambda < 0.0) {
    pair.vectors[0] = -pair.vectors[0];
    pair.lambda = -pair.lambda;
  }
  pair.kkt_residual = kkt_residual_of(t, pair.vectors, pair.lambda);
  return pair;
}

bool DeflationRecord::all_converged() const {
  return std::all_of(steps.begin(), steps.end(),
                     [](const RankOnePair& p) { return p.converged(); });
}

double DeflationRecord::rho_avg(int i, int j) const {
  double acc = 0.0;
  for (const auto& m : rho) acc += m(i, j);
  return acc / static_cast<double>(rho.size());
}

double DeflationRecord::eta_avg(int i, int j) const {
  double acc = 0.0;
  for (const auto& m : eta) acc += m(i, j);
  return acc / static_cast<double>(eta.size());
}

DeflationRecord deflate(const DenseTensor& t1, int num_steps, const SpikeSet* truth,
                        const PowerIterOptions& opts) {
  if (num_steps < 1) throw std::invalid_argument("deflate: num_steps must be >= 1");

  DeflationRecord record;
  DenseTensor work = t1;
  for (int step = 0; step < num_steps; ++step) {
    RankOnePair best = power_iteration(work, svd_init(work), opts);
    for (int k = 0; k < opts.random_restarts; ++k) {
      const RankOnePair candidate = power_iteration(
          work,
          random_unit_tuple(work.shape(),
                            derive_seed(opts.restart_seed, 3, step * 1024 + k)),
          opts);
      if (candidate.converged() &&
          (!best.converged() || candidate.lambda > best.lambda)) {
        best = candidate;
      }
    }
    work.add_scaled(-best.lambda, outer_product(best.vectors, 1.0));
    record.steps.push_back(std::move(best));
  }

  const int d = t1.order();
  const int steps = record.num_steps();
  record.eta.assign(d, Eigen::MatrixXd::Identity(steps, steps));
  for (int l = 0; l < d; ++l) {
    for (int i = 0; i < steps; ++i) {
      for (int j = i + 1; j < steps; ++j) {
        const double v =
            std::abs(record.steps[i].vectors[l].dot(record.steps[j].vectors[l]));
        record.eta[l](i, j) = v;
        record.eta[l](j, i) = v;
      }
    }
  }
  if (truth != nullptr) {
    record.has_truth = true;
    const int r = static_cast<int>(truth->components.size());
    record.rho.assign(d, Eigen::MatrixXd::Zero(r, steps));
    for (int l = 0; l < d; ++l) {
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < steps; ++j) {
          record.rho[l](i, j) = std::abs(
              truth->components[i][l].dot(record.steps[j].vectors[l]));
        }
      }
    }
  }
  return record;
}

std::string DeflationRecord::to_json_string() const {
  nlohmann::json j;
  j["lambda"] = nlohmann::json::array();
  j["kkt_residual"] = nlohmann::json::array();
  j["iterations"] = nlohmann::json::array();
  j["converged"] = nlohmann::json::array();
  for (const auto& step : steps) {
    j["lambda"].push_back(step.lambda);
    j["kkt_residual"].push_back(step.kkt_residual);
    j["iterations"].push_back(step.iterations);
    j["converged"].push_back(step.converged());
  }
  const int steps_n = num_steps();
  const int d = steps_n > 0 ? static_cast<int>(steps[0].vectors.size()) : 0;
  auto pack = [d](const std::vector<Eigen::MatrixXd>& per_mode) {
    nlohmann::json out = nlohmann::json::array();
    if (per_mode.empty()) return out;
    const int rows = static_cast<int>(per_mode[0].rows());
    const int cols = static_cast<int>(per_mode[0].cols());
    for (int i = 0; i < rows; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int jcol = 0; jcol < cols; ++jcol) {
        nlohmann::json modes = nlohmann::json::array();
        for (int l = 0; l < d; ++l) modes.push_back(per_mode[l](i, jcol));
        row.push_back(modes);
      }
      out.push_back(row);
    }
    return out;
  };
  if (has_truth) j["rho"] = pack(rho);
  j["eta"] = pack(eta);
  j["seed"] = seed;
  return j.dump(2);
}

DeflationRecord DeflationRecord::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("deflation record: invalid JSON: ") + e.what());
  }
  DeflationRecord record;
  try {
    const auto& lambdas = j.at("lambda");
    const auto& kkts = j.at("kkt_residual");
    const auto& iters = j.at("iterations");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      RankOnePair p;
      p.lambda = lambdas.at(i).get<double>();
      p.kkt_residual = kkts.at(i).get<double>();
      p.iterations = iters.at(i).get<int>();
      if (j.contains("converged") && !j["converged"].at(i).get<bool>()) {
        p.status = PowerIterStatus::kMaxIters;
      }
      record.steps.push_back(std::move(p));
    }
    auto unpack = [](const nlohmann::json& arr, std::vector<Eigen::MatrixXd>* out) {
      const int rows = static_cast<int>(arr.size());
      if (rows == 0) return;
      const int cols = static_cast<int>(arr.at(0).size());
      const int d = static_cast<int>(arr.at(0).at(0).size());
      out->assign(d, Eigen::MatrixXd::Zero(rows, cols));
      for (int i = 0; i < rows; ++i) {
        for (int jcol = 0; jcol < cols; ++jcol) {
          for (int l = 0; l < d; ++l) {
            (*out)[l](i, jcol) = arr.at(i).at(jcol).at(l).get<double>();
          }
        }
      }
    };
    if (j.contains("rho")) {
      record.has_truth = true;
      unpack(j["rho"], &record.rho);
    }
    unpack(j.at("eta"), &record.eta);
    record.seed = j.value("seed", 0ULL);
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("deflation record: missing or bad field: ") +
                          e.what());
  }
  return record;
}

}  // namespace tdefl
